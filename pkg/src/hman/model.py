"""Hybrid averager / copier / voter network and its sample paths.

Random streams
--------------
Trial ``t`` of a run seeded with ``seed`` draws from
``PCG64(SeedSequence([seed, t]))``. Within a trial every step consumes
exactly ``n`` uniforms, one per agent in index order, so the uniform used by
agent ``i`` at step ``k`` sits at position ``k * n + i`` of the trial's
stream (averagers consume theirs without using it). :func:`simulate` is
trial 0 of the same scheme, so a single simulated path is reproduced
exactly by the Monte Carlo routines.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .graph import NetworkMatrix

DEFAULT_EPSILON = 1e-6


class AgentType(str, enum.Enum):
    AVERAGER = "averager"
    COPIER = "copier"
    VOTER = "voter"

    @classmethod
    def parse(cls, value) -> "AgentType":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"a": "averager", "c": "copier", "v": "voter"}
        key = aliases.get(key, key.rstrip("s"))
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown agent type {value!r}") from None


A, C, V = AgentType.AVERAGER, AgentType.COPIER, AgentType.VOTER


@dataclass(frozen=True)
class AgentRoster:
    """Per-agent type assignment. Any ordering of types is allowed."""

    types: tuple[AgentType, ...]

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(AgentType.parse(t) for t in self.types))

    @classmethod
    def from_blocks(cls, averagers=0, copiers=0, voters=0) -> "AgentRoster":
        """Contiguous labelling: averagers first, then copiers, then voters."""
        return cls((A,) * averagers + (C,) * copiers + (V,) * voters)

    @classmethod
    def uniform(cls, n: int, kind) -> "AgentRoster":
        return cls((AgentType.parse(kind),) * n)

    def __len__(self):
        return len(self.types)

    def __iter__(self):
        return iter(self.types)

    def __getitem__(self, i):
        return self.types[i]

    def indices(self, kind) -> np.ndarray:
        kind = AgentType.parse(kind)
        return np.array([i for i, t in enumerate(self.types) if t is kind], dtype=np.intp)

    @property
    def m_a(self) -> int:
        return self.types.count(A)

    @property
    def m_c(self) -> int:
        return self.types.count(C)

    @property
    def m_v(self) -> int:
        return self.types.count(V)

    def names(self) -> list[str]:
        return [t.value for t in self.types]


@dataclass(frozen=True)
class Hman:
    """A network matrix together with the type of every agent."""

    g: NetworkMatrix
    roster: AgentRoster

    def __post_init__(self):
        if not isinstance(self.roster, AgentRoster):
            object.__setattr__(self, "roster", AgentRoster(tuple(self.roster)))
        if len(self.roster) != self.g.n:
            raise ValidationError(
                f"roster has {len(self.roster)} agents but the network has {self.g.n}"
            )
        # copier inverse-CDF tables, built once
        tables = {}
        for i in self.roster.indices(C):
            cols, w = self.g.row(i)
            cdf = np.cumsum(w)
            cdf[-1] = 1.0
            tables[int(i)] = (cols, cdf)
        object.__setattr__(self, "_copier_tables", tables)

    @property
    def n(self) -> int:
        return self.g.n


@dataclass(frozen=True)
class Trajectory:
    """``states[k]`` is the opinion vector at step ``k``."""

    states: np.ndarray

    def __len__(self):
        return self.states.shape[0]

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    def to_csv(self) -> str:
        return trajectory_csv(self)


def check_opinions(model: Hman, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValidationError(f"expected {model.n} opinions, got shape {x.shape}")
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > 1):
        raise ValidationError("opinions must lie in [0, 1]")
    return x


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def advance(model: Hman, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Synchronous update of one or many opinion vectors given their uniforms.

    ``x`` and ``u`` have shape ``(n,)`` or ``(m, n)``; row ``r`` of ``u``
    drives row ``r`` of ``x``.
    """
    single = x.ndim == 1
    X = np.atleast_2d(x)
    U = np.atleast_2d(u)
    avg = np.clip(np.asarray(model.g.csr @ X.T).T, 0.0, 1.0)
    out = avg.copy()
    for i, (cols, cdf) in model._copier_tables.items():
        pick = np.minimum(np.searchsorted(cdf, U[:, i], side="right"), cols.size - 1)
        out[:, i] = X[np.arange(X.shape[0]), cols[pick]]
    vi = model.roster.indices(V)
    if vi.size:
        out[:, vi] = (U[:, vi] < avg[:, vi]).astype(float)
    return out[0] if single else out


def step(model: Hman, x, rng: np.random.Generator) -> np.ndarray:
    """One synchronous update drawing ``n`` uniforms from ``rng``."""
    x = np.asarray(x, dtype=float)
    return advance(model, x, rng.random(model.n))


def simulate(model: Hman, x0, horizon: int, seed: int = 0) -> Trajectory:
    if horizon < 0:
        raise ValidationError("horizon must be nonnegative")
    x = check_opinions(model, x0)
    rng = trial_rng(seed, 0)
    states = np.empty((horizon + 1, model.n))
    states[0] = x
    for k in range(horizon):
        x = step(model, x, rng)
        states[k + 1] = x
    return Trajectory(states)


def consensus_time(traj: Trajectory, epsilon: float = DEFAULT_EPSILON) -> int | None:
    """First step at which the opinion spread drops below ``epsilon``."""
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    spread = traj.states.max(axis=1) - traj.states.min(axis=1)
    hits = np.flatnonzero(spread < epsilon)
    return int(hits[0]) if hits.size else None


@dataclass(frozen=True)
class MsdEstimate:
    """Monte Carlo estimates indexed ``[k, i]``.

    ``msd[k, i]`` estimates ``E((x_i[k] - x_ref[k])**2)``; ``mean`` estimates
    ``E(x_i[k])``. Standard errors are sample standard deviations over
    ``sqrt(trials)``.
    """

    msd: np.ndarray
    stderr: np.ndarray
    mean: np.ndarray
    mean_stderr: np.ndarray
    trials: int
    ref: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,agent,msd,stderr\n")
        K, n = self.msd.shape
        for k in range(K):
            for i in range(n):
                buf.write(f"{k},{i},{float(self.msd[k, i])!r},{float(self.stderr[k, i])!r}\n")
        return buf.getvalue()


def _trial_uniforms(seed: int, trials: Iterable[int], steps: int, n: int) -> np.ndarray:
    return np.stack([trial_rng(seed, t).random((steps, n)) for t in trials])


class _Moments:
    """Running mean and centred sum of squares, merged chunk by chunk (Chan et al.)."""

    def __init__(self, shape):
        self.count = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def add(self, k, values):
        m = values.shape[0]
        mean = values.mean(axis=0)
        m2 = ((values - mean) ** 2).sum(axis=0)
        total = self.count + m
        delta = mean - self.mean[k]
        self.mean[k] += delta * m / total
        self.m2[k] += m2 + delta**2 * self.count * m / total

    def result(self):
        if self.count < 2:
            return self.mean, np.zeros_like(self.mean)
        return self.mean, np.sqrt(self.m2 / (self.count - 1) / self.count)


def monte_carlo_msd(
    model: Hman,
    x0,
    trials: int,
    horizon: int,
    seed: int = 0,
    ref: int = 0,
    chunk: int | None = None,
) -> MsdEstimate:
    """Estimate mean-square deviations from agent ``ref`` over independent trials.

    Trials are simulated in vectorised chunks; trial ``t`` always uses the
    stream derived from ``(seed, t)`` so results do not depend on ``chunk``.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if horizon < 0:
        raise ValidationError("horizon must be nonnegative")
    x0 = check_opinions(model, x0)
    n = model.n
    if chunk is None:
        chunk = max(1, min(trials, 4_000_000 // max(1, horizon * n)))
    dev_stats = _Moments((horizon + 1, n))
    x_stats = _Moments((horizon + 1, n))
    for start in range(0, trials, chunk):
        ids = range(start, min(trials, start + chunk))
        U = _trial_uniforms(seed, ids, horizon, n)
        X = np.tile(x0, (len(ids), 1))
        for k in range(horizon + 1):
            if k:
                X = advance(model, X, U[:, k - 1, :])
            dev_stats.add(k, (X - X[:, [ref]]) ** 2)
            x_stats.add(k, X)
        dev_stats.count += len(ids)
        x_stats.count += len(ids)
    msd, se = dev_stats.result()
    mean, mse = x_stats.result()
    return MsdEstimate(msd, se, mean, mse, trials, ref)


@dataclass(frozen=True)
class ConsensusRuns:
    """Per-trial consensus step (``-1`` if not reached) and consensus value."""

    times: np.ndarray
    values: np.ndarray

    @property
    def reached(self) -> np.ndarray:
        return self.times >= 0


def run_to_consensus(
    model: Hman,
    x0,
    trials: int,
    seed: int = 0,
    epsilon: float = DEFAULT_EPSILON,
    max_steps: int = 100_000,
    block: int = 256,
) -> ConsensusRuns:
    """Run trials in lockstep until each one's spread falls below ``epsilon``.

    Each trial's uniforms are drawn from its own stream in blocks of
    ``block`` steps, which yields the same sequence as step-by-step draws.
    """
    x0 = check_opinions(model, x0)
    n = model.n
    rngs = [trial_rng(seed, t) for t in range(trials)]
    times = np.full(trials, -1, dtype=np.int64)
    values = np.full(trials, np.nan)
    X = np.tile(x0, (trials, 1))
    active = np.arange(trials)
    k = 0
    while True:
        spread = X.max(axis=1) - X.min(axis=1)
        done = spread < epsilon
        times[active[done]] = k
        values[active[done]] = X[done].mean(axis=1)
        X, active = X[~done], active[~done]
        if active.size == 0 or k >= max_steps:
            break
        nb = min(block, max_steps - k)
        U = np.stack([rngs[t].random((nb, n)) for t in active])
        for b in range(nb):
            X = advance(model, X, U[:, b, :])
            k += 1
            spread = X.max(axis=1) - X.min(axis=1)
            if np.any(spread < epsilon) and b < nb - 1:
                # retire finished trials, keep the unused uniforms of the rest
                done = spread < epsilon
                times[active[done]] = k
                values[active[done]] = X[done].mean(axis=1)
                X, active, U = X[~done], active[~done], U[~done]
                if active.size == 0:
                    break
        if active.size == 0:
            break
    return ConsensusRuns(times, values)


def trajectory_csv(traj: Trajectory) -> str:
    n = traj.states.shape[1]
    buf = io.StringIO()
    buf.write("k," + ",".join(f"x_{i}" for i in range(n)) + "\n")
    for k, row in enumerate(traj.states):
        buf.write(f"{k}," + ",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def roster_from_spec(spec, n: int | None = None) -> AgentRoster:
    """Build a roster from a list of type names or a block-count mapping."""
    if isinstance(spec, AgentRoster):
        roster = spec
    elif isinstance(spec, dict):
        allowed = {"averagers", "copiers", "voters"}
        extra = set(spec) - allowed
        if extra:
            raise ValidationError(f"unknown roster keys {sorted(extra)}")
        roster = AgentRoster.from_blocks(**{k: int(v) for k, v in spec.items()})
    elif isinstance(spec, str):
        if n is None:
            raise ValidationError("a uniform roster name needs the agent count")
        roster = AgentRoster.uniform(n, spec)
    elif isinstance(spec, Sequence):
        roster = AgentRoster(tuple(spec))
    else:
        raise ValidationError(f"cannot interpret roster {spec!r}")
    if n is not None and len(roster) != n:
        raise ValidationError(f"roster has {len(roster)} agents, network has {n}")
    return roster
