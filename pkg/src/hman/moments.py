"""Exact first- and second-moment recursion for the hybrid network.

The expected extended opinion vector ``[E(x kron x); E(x)]`` evolves
linearly under the block matrix ``[[G2, G21], [0, G]]``. Pair ``(i, j)``
(0-based) lives at index ``i * n + j`` of the second-moment block, which is
``(i - 1) * n + j`` in 1-based labelling.

Rows of ``G2`` / ``G21`` by pair type:

* ``i != j``, or ``i == j`` an averager: ``G2`` row is ``g_i kron g_j``, ``G21`` row is 0
* ``i == j`` a copier: ``G2`` has ``g_iz`` at column ``(z, z)``; ``G21`` row is 0
* ``i == j`` a voter: ``G2`` row is 0, ``G21`` row is ``g_i``
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import ValidationError
from .graph import NetworkMatrix
from .model import A, C, V, AgentRoster, Hman

CONSENSUS_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ExtendedRecursion:
    g2: sp.csr_matrix
    g21: sp.csr_matrix
    g: NetworkMatrix
    roster: AgentRoster

    @property
    def n(self) -> int:
        return self.g.n

    def pair(self, i: int, j: int) -> int:
        return i * self.n + j

    def full(self) -> sp.csr_matrix:
        """The ``(n^2 + n)``-square block recursion matrix."""
        n = self.n
        return sp.bmat(
            [[self.g2, self.g21], [sp.csr_matrix((n, n * n)), self.g.csr]], format="csr"
        )

    def apply_g2(self, second: np.ndarray) -> np.ndarray:
        """``G2 @ second`` without touching the assembled ``G2``.

        Uses ``(G kron G) vec(X) = vec(G X G^T)`` for row-major ``vec`` and
        then overwrites the copier and voter identical-pair rows.
        """
        n = self.n
        G = self.g.csr
        X = second.reshape(n, n)
        Y = np.asarray(G @ np.asarray(G @ X).T).T
        diag = np.diagonal(X)
        for i in self.roster.indices(C):
            cols, w = self.g.row(i)
            Y[i, i] = w @ diag[cols]
        vi = self.roster.indices(V)
        Y[vi, vi] = 0.0
        return Y.reshape(-1)

    def apply(self, second: np.ndarray, first: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One step of the expected-EOV recursion."""
        new_second = self.apply_g2(second)
        vi = self.roster.indices(V)
        if vi.size:
            f = np.asarray(self.g.csr[vi] @ first).ravel()
            new_second[vi * self.n + vi] += f
        return new_second, np.asarray(self.g.csr @ first).ravel()


def build_extended_recursion(model: Hman) -> ExtendedRecursion:
    g, roster = model.g, model.roster
    n = g.n
    G = g.csr
    indptr, indices, data = G.indptr, G.indices, G.data
    row_of = np.repeat(np.arange(n), np.diff(indptr))  # row index j of each stored g_jb
    rows, cols, vals = [], [], []
    for i in range(n):
        a_cols, a_w = g.row(i)
        # g_i kron g_j for every j at once: rows (i, j), columns (a, b)
        r = i * n + np.tile(row_of, a_cols.size)
        c = (a_cols[:, None] * n + indices[None, :]).ravel()
        v = (a_w[:, None] * data[None, :]).ravel()
        if roster[i] is not A:
            keep = r != i * n + i
            r, c, v = r[keep], c[keep], v[keep]
            if roster[i] is C:
                r = np.concatenate([r, np.full(a_cols.size, i * n + i)])
                c = np.concatenate([c, a_cols * n + a_cols])
                v = np.concatenate([v, a_w])
        rows.append(r)
        cols.append(c)
        vals.append(v)
    g2 = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n * n, n * n)
    )
    g2.sort_indices()
    vi = roster.indices(V)
    g21 = sp.csr_matrix((n * n, n))
    if vi.size:
        sel = G[vi].tocoo()
        g21 = sp.csr_matrix(
            (sel.data, (vi[sel.row] * n + vi[sel.row], sel.col)), shape=(n * n, n)
        )
    return ExtendedRecursion(g2, g21, g, roster)


@dataclass(frozen=True)
class ExpectedEov:
    """Expected extended opinion vector at one time step."""

    second: np.ndarray
    first: np.ndarray

    @property
    def n(self) -> int:
        return self.first.size

    def entry(self, i: int, j: int) -> float:
        return float(self.second[i * self.n + j])

    def spread(self) -> float:
        return eov_spread(self.second, self.first)


def eov_spread(second: np.ndarray, first: np.ndarray) -> float:
    """Largest of the max-min spreads of the two blocks.

    The blocks are compared separately: without voters the second moments
    settle at ``d`` and the first moments at some other constant.
    """
    return float(max(np.ptp(second), np.ptp(first)))


class EovSequence:
    """Expected EOVs for steps ``0..horizon``, stored as two arrays."""

    def __init__(self, second: np.ndarray, first: np.ndarray):
        self.second = second
        self.first = first

    def __len__(self):
        return self.first.shape[0]

    def __getitem__(self, k) -> ExpectedEov:
        return ExpectedEov(self.second[k], self.first[k])

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    @property
    def n(self) -> int:
        return self.first.shape[1]

    def msd(self, i: int, j: int) -> np.ndarray:
        n = self.n
        s = self.second
        return s[:, i * n + i] - 2 * s[:, i * n + j] + s[:, j * n + j]

    def second_csv(self) -> str:
        n = self.n
        labels = [f"{i}:{j}" for i in range(n) for j in range(n)]
        buf = io.StringIO()
        buf.write("k,pair,value\n")
        for k, row in enumerate(self.second):
            for lab, v in zip(labels, row):
                buf.write(f"{k},{lab},{float(v)!r}\n")
        return buf.getvalue()

    def first_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,agent,value\n")
        for k, row in enumerate(self.first):
            for i, v in enumerate(row):
                buf.write(f"{k},{i},{float(v)!r}\n")
        return buf.getvalue()

    def msd_csv(self, pairs) -> str:
        buf = io.StringIO()
        buf.write("k,i,j,msd\n")
        series = {(i, j): self.msd(i, j) for i, j in pairs}
        for k in range(len(self)):
            for (i, j), s in series.items():
                buf.write(f"{k},{i},{j},{float(s[k])!r}\n")
        return buf.getvalue()


def initial_eov(x0) -> tuple[np.ndarray, np.ndarray]:
    x0 = np.asarray(x0, dtype=float)
    return np.kron(x0, x0), x0.copy()


def iterate_eov(rec: ExtendedRecursion, x0, horizon: int) -> EovSequence:
    """Expected EOVs from the deterministic initial opinions ``x0``."""
    if horizon < 0:
        raise ValidationError("horizon must be nonnegative")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (rec.n,):
        raise ValidationError(f"expected {rec.n} opinions, got shape {x0.shape}")
    n = rec.n
    second = np.empty((horizon + 1, n * n))
    first = np.empty((horizon + 1, n))
    second[0], first[0] = initial_eov(x0)
    for k in range(horizon):
        second[k + 1], first[k + 1] = rec.apply(second[k], first[k])
    return EovSequence(second, first)


def eov_consensus_step(
    rec: ExtendedRecursion, x0, tol: float = CONSENSUS_TOL, max_steps: int = 10_000
) -> tuple[int | None, ExpectedEov]:
    """First step at which :func:`eov_spread` drops below ``tol``.

    Returns ``(None, last_eov)`` if that does not happen within ``max_steps``.
    Only the current iterate is kept in memory.
    """
    second, first = initial_eov(x0)
    for k in range(max_steps + 1):
        if eov_spread(second, first) < tol:
            return k, ExpectedEov(second, first)
        if k < max_steps:
            second, first = rec.apply(second, first)
    return None, ExpectedEov(second, first)


def mean_square_deviation(eov: ExpectedEov, i: int, j: int) -> float:
    """``E((x_i - x_j)^2)`` from the second-moment entries."""
    if i == j:
        return 0.0
    return eov.entry(i, i) - 2 * eov.entry(i, j) + eov.entry(j, j)


def gamma2_reachability(rec: ExtendedRecursion, source: int = 0) -> bool:
    """Whether pair ``(source, source)`` reaches every pair in the ``G2`` digraph.

    The digraph has an edge ``r -> q`` whenever ``G2[q, r] != 0``.
    """
    adj = sp.csr_matrix(rec.g2.T, dtype=bool)
    order = csgraph.breadth_first_order(
        adj, source * rec.n + source, directed=True, return_predecessors=False
    )
    return order.size == rec.n * rec.n
