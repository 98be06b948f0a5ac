"""Spectra of the network and moment-recursion matrices.

The quantity of interest is the subdominant eigenvalue ``lambda_s`` of the
block recursion matrix: the largest-magnitude eigenvalue strictly inside
the unit circle. ``1 / |1 - lambda_s|`` is the mean consensus time. With at
least one voter, ``lambda_s`` is the dominant eigenvalue of ``G2``, which we
get by power iteration on a sparse operator. Small problems can also be
done densely.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    ConvergenceFailure,
    DegenerateEigenvectorError,
    NoSubdominantError,
    NoVotersError,
)
from .graph import NetworkMatrix, ergodic_erdos_renyi
from .model import V, AgentRoster, Hman
from .moments import ExtendedRecursion, build_extended_recursion

GAP_TOL = 1e-8
TIE_TOL = 1e-10
DENSE_LIMIT = 4000
ORDER_SLACK = 1e-9


def _dense(matrix) -> np.ndarray:
    if sp.issparse(matrix):
        return matrix.toarray()
    return np.asarray(matrix, dtype=float)


def spectrum(matrix) -> np.ndarray:
    """All eigenvalues (with multiplicity) of a square matrix, as complex numbers."""
    a = _dense(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
    try:
        return np.linalg.eigvals(a).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def _pick_largest(vals: np.ndarray) -> complex:
    mags = np.abs(vals)
    top = vals[mags >= mags.max() - TIE_TOL]
    # deterministic representative: largest real part, then largest imaginary part
    order = np.lexsort((-top.imag, -top.real))
    return complex(top[order[0]])


def subdominant_of(eigenvalues, gap_tol: float = GAP_TOL) -> complex:
    vals = np.asarray(eigenvalues, dtype=complex)
    inside = vals[np.abs(vals) < 1.0 - gap_tol]
    if inside.size == 0:
        raise NoSubdominantError("every eigenvalue lies on the unit circle")
    return _pick_largest(inside)


def subdominant(matrix, gap_tol: float = GAP_TOL) -> complex:
    """Largest-magnitude eigenvalue with modulus below ``1 - gap_tol``."""
    return subdominant_of(spectrum(matrix), gap_tol)


def power_iteration(
    matrix,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
    x0: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Spectral radius and Perron vector of a nonnegative matrix.

    Iterates the shifted operator ``(A + I) / 2`` so periodic classes do not
    stall convergence. When the iterate is strictly positive the
    Collatz-Wielandt bounds ``min(Ax/x) <= rho <= max(Ax/x)`` give the
    stopping rule; otherwise the estimate must stop moving for a while.
    """
    dim = matrix.shape[0]
    if dim == 0:
        return 0.0, np.zeros(0)
    x = np.full(dim, 1.0 / dim) if x0 is None else np.asarray(x0, float) / np.sum(x0)
    prev = np.inf
    calm = 0
    for _ in range(max_iter):
        y = np.asarray(matrix @ x).ravel()
        est = y.sum()  # x sums to 1
        if est == 0.0:
            return 0.0, x
        if np.all(x > 0):
            ratios = y / x
            lo, hi = ratios.min(), ratios.max()
            if hi - lo <= tol * hi:
                return float(0.5 * (lo + hi)), x
        calm = calm + 1 if abs(est - prev) <= tol * est else 0
        if calm >= 50:
            return float(est), x
        prev = est
        x = 0.5 * (x + y / est)
        x /= x.sum()
    raise ConvergenceFailure(f"power iteration did not converge in {max_iter} steps")


def _voter_pairs(roster: AgentRoster, n: int) -> np.ndarray:
    vi = roster.indices(V)
    return vi * n + vi


def _delete_pairs(matrix: sp.csr_matrix, drop: np.ndarray) -> sp.csr_matrix:
    keep = np.setdiff1d(np.arange(matrix.shape[0]), drop)
    return matrix[keep][:, keep]


def reduced_g2(rec: ExtendedRecursion) -> sp.csr_matrix:
    """``G2`` with the voter identical-pair rows and columns deleted.

    Those rows of ``G2`` are zero, so the deleted matrix has the same
    nonzero spectrum.
    """
    return _delete_pairs(rec.g2.tocsr(), _voter_pairs(rec.roster, rec.n))


def kron_principal_submatrix(g: NetworkMatrix, voters: Sequence[int]) -> sp.csr_matrix:
    """Principal submatrix of ``G kron G`` without the voter pairs ``(v, v)``.

    For voter-averager rosters its dominant eigenvalue is ``lambda_s``.
    """
    voters = np.asarray(voters, dtype=np.intp)
    return _delete_pairs(sp.kron(g.csr, g.csr, format="csr"), voters * g.n + voters)


def dominant_of_g2(rec: ExtendedRecursion, tol: float = 1e-12) -> float:
    """Dominant (Perron) eigenvalue of ``G2``.

    With voters present the zero voter rows are deleted first, which keeps
    the positive-iterate stopping rule usable.
    """
    a = reduced_g2(rec) if rec.roster.m_v else rec.g2
    return power_iteration(a, tol=tol)[0]


def lambda2(g: NetworkMatrix, gap_tol: float = GAP_TOL) -> complex:
    return subdominant(g.csr, gap_tol)


def lambda2_eigenvector(g: NetworkMatrix, gap_tol: float = GAP_TOL):
    """``(lambda_2, v_2)`` for ``G``; raises if ``lambda_2`` is not simple."""
    vals, vecs = np.linalg.eig(g.toarray())
    lam = subdominant_of(vals, gap_tol)
    close = np.abs(vals - lam) <= 1e-8 * max(1.0, abs(lam))
    if close.sum() != 1:
        raise DegenerateEigenvectorError(f"lambda_2 = {lam} has multiplicity {close.sum()}")
    return lam, vecs[:, np.flatnonzero(close)[0]]


def embedding_vector(v2: np.ndarray) -> np.ndarray:
    """``1 kron v2 - v2 kron 1``; zero at every identical pair ``(i, i)``."""
    ones = np.ones(v2.size)
    return np.kron(ones, v2) - np.kron(v2, ones)


def lambda2_embedding_residual(g: NetworkMatrix, rec: ExtendedRecursion) -> float:
    """``||G2 v - lambda_2 v||_inf / ||v||_inf`` for ``v = 1 kron v2 - v2 kron 1``."""
    lam, v2 = lambda2_eigenvector(g)
    v = embedding_vector(v2)
    r = rec.g2 @ v - lam * v
    return float(np.abs(r).max() / np.abs(v).max())


def check_lambda2_embedding(g: NetworkMatrix, rec: ExtendedRecursion, tol: float = 1e-8) -> bool:
    return lambda2_embedding_residual(g, rec) <= tol


class Bound(NamedTuple):
    bound_lambda: float
    bound_time: float
    degenerate: bool = False


def consensus_time_bound(n: int, m_v: int) -> Bound:
    """Lower bounds ``1 - m_v / (n^2 - m_v)`` on ``lambda_s`` and ``n^2 / m_v - 1`` on the time.

    Valid for voter-averager rosters on symmetric networks. When
    ``n^2 < 2 m_v`` (only possible for ``n = 1``) both are clipped at 0 and
    flagged as degenerate.
    """
    if m_v < 1:
        raise NoVotersError("the bound needs at least one voter")
    if m_v > n:
        raise ValueError(f"m_v={m_v} exceeds n={n}")
    n2 = n * n
    if n2 - 2 * m_v < 0:
        return Bound(0.0, max(0.0, n2 / m_v - 1.0), True)
    return Bound(1.0 - m_v / (n2 - m_v), n2 / m_v - 1.0)


def lambda_s(model: Hman | ExtendedRecursion, method: str = "auto", tol: float = 1e-12) -> complex:
    """Subdominant eigenvalue of the block recursion matrix.

    ``method`` is ``"dense"`` (full eigendecomposition), ``"power"`` (dominant
    eigenvalue of ``G2``; needs a voter) or ``"auto"``.
    """
    rec = model if isinstance(model, ExtendedRecursion) else build_extended_recursion(model)
    if method == "auto":
        method = "dense" if rec.n * rec.n + rec.n <= DENSE_LIMIT else "power"
    if method == "dense":
        return subdominant(rec.full())
    if method == "power":
        if not rec.roster.m_v:
            raise NoVotersError("the power route needs at least one voter")
        return complex(dominant_of_g2(rec, tol))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SpectralReport:
    lambda2_of_g: complex
    lambda_s: complex
    dominant_g2: float
    mean_consensus_time: float
    bound_lambda: float | None = None
    bound_time: float | None = None
    bound_degenerate: bool = False

    def to_text(self) -> str:
        rows = [
            ("lambda2_of_g", _fmt(self.lambda2_of_g)),
            ("abs_lambda2_of_g", repr(abs(self.lambda2_of_g))),
            ("lambda_s", _fmt(self.lambda_s)),
            ("abs_lambda_s", repr(abs(self.lambda_s))),
            ("dominant_g2", repr(self.dominant_g2)),
            ("mean_consensus_time", repr(self.mean_consensus_time)),
            ("bound_lambda", "absent" if self.bound_lambda is None else repr(self.bound_lambda)),
            ("bound_time", "absent" if self.bound_time is None else repr(self.bound_time)),
            ("bound_degenerate", str(self.bound_degenerate).lower()),
        ]
        return "".join(f"{k}={v}\n" for k, v in rows)


def _fmt(z: complex) -> str:
    z = complex(z)
    return repr(z.real) if z.imag == 0 else f"{z.real!r}{z.imag:+.17g}j"


def spectral_report(model: Hman, method: str = "auto") -> SpectralReport:
    rec = build_extended_recursion(model)
    lam_s = lambda_s(rec, method)
    bound = (None, None, False)
    if model.roster.m_v:
        bound = tuple(consensus_time_bound(model.n, model.roster.m_v))
    return SpectralReport(
        lambda2_of_g=lambda2(model.g),
        lambda_s=lam_s,
        dominant_g2=dominant_of_g2(rec),
        mean_consensus_time=1.0 / abs(1.0 - lam_s),
        bound_lambda=bound[0],
        bound_time=bound[1],
        bound_degenerate=bound[2],
    )


@dataclass
class RateOrderingReport:
    """``|lambda_s|`` per roster, in input order, plus the ordering checks."""

    rosters: list[AgentRoster]
    lambdas: list[complex]
    averager_reference: float
    voter_reference: float | None
    violations: list[str] = field(default_factory=list)

    @property
    def order(self) -> list[int]:
        """Roster indices sorted by ``|lambda_s|`` (stable)."""
        return sorted(range(len(self.lambdas)), key=lambda k: abs(self.lambdas[k]))

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("rank,roster,m_a,m_c,m_v,lambda_s,abs_lambda_s\n")
        for rank, k in enumerate(self.order):
            r = self.rosters[k]
            label = "".join(t.value[0] for t in r)
            buf.write(
                f"{rank},{label},{r.m_a},{r.m_c},{r.m_v},{_fmt(self.lambdas[k])},"
                f"{abs(self.lambdas[k])!r}\n"
            )
        return buf.getvalue()


def rate_ordering_report(
    g: NetworkMatrix, rosters: Sequence[AgentRoster], method: str = "auto"
) -> RateOrderingReport:
    """Compare consensus rates of several rosters on one network.

    Checks that no roster beats the all-averager rate ``|lambda_2(G)|`` and
    that no roster with a voter beats the all-voter rate, both within
    ``ORDER_SLACK``. Violations are listed, not raised.
    """
    rosters = [r if isinstance(r, AgentRoster) else AgentRoster(tuple(r)) for r in rosters]
    lambdas = [lambda_s(Hman(g, r), method) for r in rosters]
    avg_ref = abs(lambda2(g))
    voter_ref = None
    if any(r.m_v for r in rosters):
        voter_ref = abs(lambda_s(Hman(g, AgentRoster.uniform(g.n, V)), method))
    report = RateOrderingReport(rosters, lambdas, avg_ref, voter_ref)
    for k, (r, lam) in enumerate(zip(rosters, lambdas)):
        if abs(lam) < avg_ref - ORDER_SLACK:
            report.violations.append(f"roster {k} faster than the averager model")
        if r.m_v and abs(lam) < voter_ref - ORDER_SLACK:
            report.violations.append(f"roster {k} faster than the voter model")
    return report


@dataclass(frozen=True)
class SweepInstance:
    n: int
    seed: int
    resamples: int
    voters: tuple[int, ...]
    lambda_s: float
    time: float
    bound_lambda: float
    bound_time: float

    @property
    def ratio(self) -> float:
        return self.time / self.bound_time


def sweep_instance(n: int, p: float, m_v: int, seed: int, max_attempts: int = 100) -> SweepInstance:
    """One point of the bound-tightness experiment.

    Draws an ergodic ER network from ``(seed, attempt)`` streams, places
    ``m_v`` voters on distinct vertices chosen by ``default_rng([seed, n])``,
    makes everyone else an averager and computes ``lambda_s`` by power
    iteration.
    """
    if n * n <= 2 * m_v:
        raise ValueError(f"need n^2 > 2 m_v, got n={n}, m_v={m_v}")
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    g, resamples = ergodic_erdos_renyi(n, p, seed, max_attempts)
    voters = np.sort(np.random.default_rng([seed, n]).choice(n, size=m_v, replace=False))
    types = ["averager"] * n
    for v in voters:
        types[v] = "voter"
    rec = build_extended_recursion(Hman(g, AgentRoster(tuple(types))))
    lam = dominant_of_g2(rec)
    bound = consensus_time_bound(n, m_v)
    return SweepInstance(
        n, seed, resamples, tuple(int(v) for v in voters), lam, 1.0 / abs(1.0 - lam),
        bound.bound_lambda, bound.bound_time,
    )


@dataclass
class SweepResult:
    p: float
    m_v: int
    instances: list[SweepInstance]

    def by_n(self) -> dict[int, list[SweepInstance]]:
        out: dict[int, list[SweepInstance]] = {}
        for inst in self.instances:
            out.setdefault(inst.n, []).append(inst)
        return out

    def mean_ratio(self, n: int) -> float:
        return float(np.mean([i.ratio for i in self.by_n()[n]]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,m_v,lambda_s,bound_lambda,time,bound_time,ratio\n")
        for n, group in self.by_n().items():
            lam = float(np.mean([i.lambda_s for i in group]))
            t = float(np.mean([i.time for i in group]))
            ratio = float(np.mean([i.ratio for i in group]))
            b = group[0]
            buf.write(f"{n},{self.m_v},{lam!r},{b.bound_lambda!r},{t!r},{b.bound_time!r},{ratio!r}\n")
        return buf.getvalue()

    def instances_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,seed,resamples,voters,lambda_s,time,bound_time,ratio\n")
        for i in self.instances:
            voters = " ".join(map(str, i.voters))
            buf.write(
                f"{i.n},{i.seed},{i.resamples},{voters},{i.lambda_s!r},{i.time!r},"
                f"{i.bound_time!r},{i.ratio!r}\n"
            )
        return buf.getvalue()


def bound_sweep(n_list, p: float, m_v: int, seeds, max_attempts: int = 100) -> SweepResult:
    """Ratio of mean consensus time to the closed-form bound over ER networks."""
    instances = [sweep_instance(n, p, m_v, s, max_attempts) for n in n_list for s in seeds]
    return SweepResult(p, m_v, instances)
