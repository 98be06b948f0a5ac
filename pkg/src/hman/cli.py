"""Command-line front end.

Usage::

    hman simulate    --config CFG [--out DIR] [--seed S] [--plot]
    hman msd         --config CFG [--out DIR] [--seed S] [--plot]
    hman spectrum    --config CFG [--out DIR]
    hman bound-sweep [--config CFG] [--n-list 10,20] [--p 0.2] [--m-v 1] [--seeds 0,1] [--out DIR]
    hman validate    --config CFG

``--config five_agent.json`` falls back to the bundled five-agent
example when no such file exists. Exit codes: 0 success, 2 config parse
error, 3 validation error, 4 IO error, 5 numerical failure (including a
violated rate ordering).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import graph, model, moments, spectral
from .errors import HmanError, NumericalError, ResampleLimitExceeded, ValidationError
from .plotting import line_plot

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4, 5


class ConfigParseError(HmanError):
    pass


class ConfigIOError(HmanError):
    pass


@dataclass
class ExperimentConfig:
    """Experiment description loaded from JSON.

    Exactly one of ``matrix`` (nested lists), ``matrix_file`` (sparse text
    format) or ``generator`` (``{"n", "p", "seed"}``) defines the network.
    ``roster`` is a list of type names, a block-count mapping such as
    ``{"averagers": 3, "copiers": 1, "voters": 1}``, or a single type name
    applied to every agent. ``rosters`` lists rosters for ``spectrum``.
    """

    matrix: list | None = None
    matrix_file: str | None = None
    generator: dict | None = None
    roster: Any = None
    rosters: list | None = None
    x0: list | None = None
    pairs: list | None = None
    horizon: int = 50
    trials: int = 1000
    epsilon: float = model.DEFAULT_EPSILON
    seed: int = 0
    out: str | None = None
    sweep: dict | None = None

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | os.PathLike | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**data)
        sources = [cfg.matrix is not None, cfg.matrix_file is not None, cfg.generator is not None]
        if sum(sources) > 1:
            raise ValidationError("give only one of matrix, matrix_file, generator")
        if cfg.matrix_file is not None:
            path = Path(cfg.matrix_file)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            if not path.is_file():
                raise ConfigIOError(f"matrix file not found: {path}")
            cfg._matrix_path = path
        for key in ("horizon", "trials", "seed"):
            if not isinstance(getattr(cfg, key), int) or getattr(cfg, key) < 0:
                raise ValidationError(f"{key} must be a nonnegative integer")
        if not (isinstance(cfg.epsilon, (int, float)) and cfg.epsilon > 0):
            raise ValidationError("epsilon must be positive")
        return cfg

    def to_dict(self) -> dict:
        return {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if getattr(self, f.name) is not None
        }

    def network(self) -> graph.NetworkMatrix:
        if self.matrix is not None:
            return graph.validate(self.matrix)
        if self.matrix_file is not None:
            path = getattr(self, "_matrix_path", Path(self.matrix_file))
            try:
                return graph.read_matrix(path)
            except OSError as exc:
                raise ConfigIOError(str(exc)) from exc
        if self.generator is not None:
            gen = self.generator
            try:
                return graph.erdos_renyi_network(int(gen["n"]), float(gen["p"]), int(gen.get("seed", 0)))
            except KeyError as exc:
                raise ValidationError(f"generator needs key {exc}") from None
        raise ValidationError("config defines no network (matrix, matrix_file or generator)")

    def build_model(self, g: graph.NetworkMatrix | None = None) -> model.Hman:
        g = self.network() if g is None else g
        spec = self.roster if self.roster is not None else "averager"
        return model.Hman(g, model.roster_from_spec(spec, g.n))

    def initial_opinions(self, n: int) -> np.ndarray:
        if self.x0 is None:
            return np.random.default_rng([self.seed, 0xC0FFEE]).random(n)
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (n,) or np.any(x0 < 0) or np.any(x0 > 1):
            raise ValidationError(f"x0 must hold {n} values in [0, 1]")
        return x0


def _bundled(name: str) -> str | None:
    res = resources.files("hman") / "data" / name
    return res.read_text() if res.is_file() else None


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    if path.is_file():
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigIOError(str(exc)) from exc
        base = path.parent
    else:
        text = _bundled(path.name)
        if text is None:
            raise ConfigIOError(f"config file not found: {path}")
        base = None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_dict(data, base)


class OutputSet:
    """Collects output files and publishes them only when the command succeeds."""

    def __init__(self, out_dir: str | os.PathLike):
        self.out_dir = Path(out_dir)
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> None:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            tmp = Path(tempfile.mkdtemp(prefix=".hman-", dir=self.out_dir))
            try:
                for name, text in self.files.items():
                    with open(tmp / name, "w", newline="\n") as fh:
                        fh.write(text)
                for name in self.files:
                    os.replace(tmp / name, self.out_dir / name)
            finally:
                shutil.rmtree(tmp, ignore_errors=True)
        except OSError as exc:
            raise ConfigIOError(str(exc)) from exc


def _require_ergodic(g: graph.NetworkMatrix) -> None:
    diag = graph.diagnose(g)
    if not diag.ergodic:
        raise ValidationError(
            f"network is not ergodic (strongly_connected={diag.strongly_connected}, "
            f"aperiodic={diag.aperiodic})"
        )


def cmd_simulate(cfg: ExperimentConfig, outputs: OutputSet, plot: bool = False) -> int:
    hman = cfg.build_model()
    x0 = cfg.initial_opinions(hman.n)
    traj = model.simulate(hman, x0, cfg.horizon, cfg.seed)
    outputs.add("trajectory.csv", traj.to_csv())
    if plot:
        k = np.arange(len(traj))
        series = {
            f"{i} ({hman.roster[i].value})": (k, traj.states[:, i]) for i in range(hman.n)
        }
        outputs.add("trajectory.svg", line_plot(series, "Opinion trajectories", "k", "x_i[k]"))
    t = model.consensus_time(traj, cfg.epsilon)
    print(f"consensus_time={'absent' if t is None else t}")
    return EXIT_OK


def standardized_discrepancy(estimate, exact, stderr, floor: float = 1e-12) -> np.ndarray:
    """``|estimate - exact| / stderr``, with zero-variance cells compared to ``floor``."""
    diff = np.abs(np.asarray(estimate) - np.asarray(exact))
    se = np.asarray(stderr)
    out = np.where(diff <= floor, 0.0, np.inf)
    pos = se > 0
    out[pos] = np.maximum(diff[pos] - floor, 0.0) / se[pos]
    return out


def cmd_msd(cfg: ExperimentConfig, outputs: OutputSet, plot: bool = False) -> int:
    hman = cfg.build_model()
    if cfg.trials < 1:
        raise ValidationError("trials must be at least 1")
    x0 = cfg.initial_opinions(hman.n)
    pairs = [tuple(p) for p in (cfg.pairs or [[i, 0] for i in range(1, hman.n)])]
    for i, j in pairs:
        if not (0 <= i < hman.n and j == 0):
            raise ValidationError(f"pairs must be (i, 0) with 0 <= i < {hman.n}, got {(i, j)}")
    rec = moments.build_extended_recursion(hman)
    seq = moments.iterate_eov(rec, x0, cfg.horizon)
    est = model.monte_carlo_msd(hman, x0, cfg.trials, cfg.horizon, cfg.seed)
    outputs.add("exact_msd.csv", seq.msd_csv(pairs))
    outputs.add("mc_msd.csv", est.to_csv())
    outputs.add("eov_second.csv", seq.second_csv())
    outputs.add("eov_first.csv", seq.first_csv())
    worst = 0.0
    lines = []
    for i, j in pairs:
        z = standardized_discrepancy(est.msd[:, i], seq.msd(i, j), est.stderr[:, i])
        worst = max(worst, float(z.max()))
        lines.append(f"max_standardized_discrepancy[{i}:{j}]={float(z.max())!r}\n")
    summary = (
        f"trials={cfg.trials}\nhorizon={cfg.horizon}\nseed={cfg.seed}\n"
        + "".join(lines)
        + f"max_standardized_discrepancy={worst!r}\n"
    )
    outputs.add("summary.txt", summary)
    if plot:
        k = np.arange(cfg.horizon + 1)
        series = {}
        for i, j in pairs:
            series[f"exact {i}-{j}"] = (k, seq.msd(i, j))
            series[f"MC {i}-{j}"] = (k, est.msd[:, i])
        outputs.add("msd.svg", line_plot(series, "Mean square deviation", "k", "E(x_i - x_j)^2"))
    sys.stdout.write(summary)
    return EXIT_OK


def _roster_label(r: model.AgentRoster) -> str:
    return "".join(t.value[0] for t in r)


def cmd_spectrum(cfg: ExperimentConfig, outputs: OutputSet) -> int:
    g = cfg.network()
    _require_ergodic(g)
    specs = cfg.rosters if cfg.rosters else [cfg.roster if cfg.roster is not None else "averager"]
    rosters = [model.roster_from_spec(s, g.n) for s in specs]
    text = []
    for r in rosters:
        rep = spectral.spectral_report(model.Hman(g, r))
        text.append(f"roster={_roster_label(r)}\nm_a={r.m_a}\nm_c={r.m_c}\nm_v={r.m_v}\n")
        text.append(rep.to_text())
    status = EXIT_OK
    if len(rosters) > 1:
        order = spectral.rate_ordering_report(g, rosters)
        outputs.add("ordering.csv", order.to_csv())
        text.append(f"ordering_ok={str(order.ok).lower()}\n")
        for v in order.violations:
            text.append(f"violation={v}\n")
        if not order.ok:
            status = EXIT_NUMERICAL
    report = "".join(text)
    outputs.add("spectrum.txt", report)
    sys.stdout.write(report)
    return status


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_bound_sweep(cfg: ExperimentConfig, outputs: OutputSet, args, plot: bool = False) -> int:
    sweep = dict(cfg.sweep or {})
    if args.n_list:
        sweep["n_list"] = _int_list(args.n_list)
    if args.p is not None:
        sweep["p"] = args.p
    if args.m_v is not None:
        sweep["m_v"] = args.m_v
    if args.seeds:
        sweep["seeds"] = _int_list(args.seeds)
    n_list = sweep.get("n_list", [10, 20, 40, 60])
    p = float(sweep.get("p", 0.2))
    m_v = int(sweep.get("m_v", 1))
    seeds = sweep.get("seeds", list(range(5)))
    for n in n_list:
        if n * n <= 2 * m_v or m_v < 1 or m_v > n:
            raise ValidationError(f"invalid sweep point n={n}, m_v={m_v}")
    if not 0 < p <= 1:
        raise ValidationError(f"p must lie in (0, 1], got {p}")
    try:
        result = spectral.bound_sweep(n_list, p, m_v, seeds, int(sweep.get("max_attempts", 100)))
    except ResampleLimitExceeded as exc:
        raise ValidationError(str(exc)) from exc
    outputs.add("sweep.csv", result.to_csv())
    outputs.add("instances.csv", result.instances_csv())
    if plot:
        ns = sorted(result.by_n())
        series = {"mean ratio": (ns, [result.mean_ratio(n) for n in ns])}
        outputs.add("sweep.svg", line_plot(series, "Consensus time / bound", "n", "ratio"))
    sys.stdout.write(result.to_csv())
    return EXIT_OK


def cmd_validate(cfg: ExperimentConfig) -> int:
    g = cfg.network()
    diag = graph.diagnose(g)
    lines = [
        f"n={g.n}",
        f"nnz={g.nnz}",
        f"strongly_connected={str(diag.strongly_connected).lower()}",
        f"aperiodic={str(diag.aperiodic).lower()}",
        f"ergodic={str(diag.ergodic).lower()}",
    ]
    if cfg.roster is not None:
        r = cfg.build_model(g).roster
        lines += [f"m_a={r.m_a}", f"m_c={r.m_c}", f"m_v={r.m_v}"]
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", help="output directory (default: config 'out' or ./out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--plot", action="store_true", help="also write SVG plots")

    parser = argparse.ArgumentParser(prog="hman", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "msd", "spectrum", "validate"):
        sub.add_parser(name, parents=[common])
    sweep = sub.add_parser("bound-sweep", parents=[common])
    sweep.add_argument("--n-list", help="comma-separated network sizes")
    sweep.add_argument("--p", type=float, help="edge probability")
    sweep.add_argument("--m-v", type=int, help="voter count")
    sweep.add_argument("--seeds", help="comma-separated seeds")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config)
        elif args.command == "bound-sweep":
            cfg = ExperimentConfig()
        else:
            raise ConfigParseError(f"{args.command} needs --config")
        if args.seed is not None:
            cfg.seed = args.seed
        outputs = OutputSet(args.out or cfg.out or "out")
        if args.command == "simulate":
            status = cmd_simulate(cfg, outputs, args.plot)
        elif args.command == "msd":
            status = cmd_msd(cfg, outputs, args.plot)
        elif args.command == "spectrum":
            status = cmd_spectrum(cfg, outputs)
        elif args.command == "bound-sweep":
            status = cmd_bound_sweep(cfg, outputs, args, args.plot)
        else:
            return cmd_validate(cfg)
        outputs.commit()
        return status
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
