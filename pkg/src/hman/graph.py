"""Network matrices, their digraphs, and random network generation.

A network matrix ``G`` is an ``n x n`` nonnegative row-stochastic matrix.
Row ``i`` holds the weights agent ``i`` puts on its neighbours, so the
network graph has a directed edge ``j -> i`` whenever ``G[i, j] > 0``.
All reachability helpers here use that orientation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import (
    InvalidProbabilityError,
    NegativeEntryError,
    NonSquareError,
    ResampleLimitExceeded,
    RowSumError,
    ValidationError,
)

ROW_SUM_TOL = 1e-12
ZERO_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class NetworkMatrix:
    """Validated row-stochastic network matrix stored in CSR form.

    Only strictly positive weights are stored. Build instances through
    :func:`validate` (or the generators), not directly.
    """

    csr: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and weights of row ``i`` (the neighbour set of agent ``i``)."""
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        return self.csr.indices[lo:hi], self.csr.data[lo:hi]

    def neighbors(self, i: int) -> np.ndarray:
        return self.row(i)[0]

    def is_symmetric(self, tol: float = 0.0) -> bool:
        diff = abs(self.csr - self.csr.T)
        return diff.nnz == 0 or diff.max() <= tol

    def entries(self):
        """Yield ``(i, j, g_ij)`` in row-major order."""
        coo = self.csr.tocoo()
        for i, j, v in zip(coo.row, coo.col, coo.data):
            yield int(i), int(j), float(v)

    def __eq__(self, other):
        if not isinstance(other, NetworkMatrix):
            return NotImplemented
        if self.csr.shape != other.csr.shape:
            return False
        return (self.csr != other.csr).nnz == 0

    def __hash__(self):
        return hash((self.n, self.csr.indices.tobytes(), self.csr.data.tobytes()))

    def __repr__(self):
        return f"NetworkMatrix(n={self.n}, nnz={self.nnz})"


@dataclass(frozen=True)
class GraphDiagnostics:
    strongly_connected: bool
    aperiodic: bool

    @property
    def ergodic(self) -> bool:
        return self.strongly_connected and self.aperiodic


def validate(matrix) -> NetworkMatrix:
    """Check a raw nonnegative square array and wrap it as a :class:`NetworkMatrix`.

    Parameters
    ----------
    matrix : array_like or scipy sparse matrix
        Candidate network matrix.

    Raises
    ------
    NonSquareError, NegativeEntryError, RowSumError
    """
    if sp.issparse(matrix):
        a = sp.csr_matrix(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NonSquareError(a.shape)
    else:
        arr = np.asarray(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise NonSquareError(arr.shape)
        a = sp.csr_matrix(arr)
    a.sum_duplicates()
    a.sort_indices()
    if not np.all(np.isfinite(a.data)):
        raise ValidationError("network matrix contains non-finite entries")
    neg = np.flatnonzero(a.data < 0)
    if neg.size:
        coo = a.tocoo()
        k = neg[0]
        raise NegativeEntryError(int(coo.row[k]), int(coo.col[k]), float(coo.data[k]))
    a.data[a.data < ZERO_TOL] = 0.0
    a.eliminate_zeros()
    sums = np.asarray(a.sum(axis=1)).ravel()
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        raise RowSumError(int(bad[0]), float(sums[bad[0]]))
    a.data.setflags(write=False)
    return NetworkMatrix(a)


def _influence_graph(g: NetworkMatrix) -> sp.csr_matrix:
    # adjacency with A[j, i] = 1 iff edge j -> i iff g_ij > 0
    return sp.csr_matrix(g.csr.T, dtype=bool)


def is_strongly_connected(g: NetworkMatrix) -> bool:
    ncomp = csgraph.connected_components(
        _influence_graph(g), directed=True, connection="strong", return_labels=False
    )
    return ncomp == 1


def period(g: NetworkMatrix) -> int:
    """gcd of all directed cycle lengths in the network graph (0 if acyclic).

    Each strongly connected component is handled by breadth-first levels:
    for every intra-component edge ``u -> v`` the quantity
    ``level(u) + 1 - level(v)`` is a multiple of the component period, and
    the gcd over those edges equals it.
    """
    adj = _influence_graph(g)
    _, labels = csgraph.connected_components(adj, directed=True, connection="strong")
    coo = adj.tocoo()
    same = labels[coo.row] == labels[coo.col]
    src, dst = coo.row[same], coo.col[same]
    if src.size == 0:
        return 0
    levels = np.full(g.n, -1, dtype=np.int64)
    for comp in np.unique(labels[src]):
        members = np.flatnonzero(labels == comp)
        root = int(members[0])
        dist = csgraph.shortest_path(adj, directed=True, unweighted=True, indices=root)
        levels[members] = dist[members].astype(np.int64)
    diffs = np.abs(levels[src] + 1 - levels[dst])
    return int(reduce(math.gcd, diffs.tolist(), 0))


def is_aperiodic(g: NetworkMatrix) -> bool:
    return period(g) == 1


def diagnose(g: NetworkMatrix) -> GraphDiagnostics:
    return GraphDiagnostics(is_strongly_connected(g), is_aperiodic(g))


def is_ergodic(g: NetworkMatrix) -> bool:
    return diagnose(g).ergodic


def erdos_renyi_network(n: int, p: float, seed=None) -> NetworkMatrix:
    """Erdos-Renyi network matrix with one common weight on every edge.

    Undirected edges appear independently with probability ``p``. Every
    edge carries the same weight ``w = 1 / (d_max + 1)`` where ``d_max`` is
    the largest degree, and each self-loop takes the remainder
    ``1 - d_i * w`` (always at least ``w``). The result is symmetric and
    row-stochastic; isolated vertices get a self-loop of weight 1.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts.
    """
    if not (0.0 <= p <= 1.0):
        raise InvalidProbabilityError(p)
    if n < 1:
        raise ValidationError(f"agent count must be positive, got {n}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    iu, ju = iu[keep], ju[keep]
    deg = np.bincount(np.concatenate([iu, ju]), minlength=n)
    w = 1.0 / (deg.max() + 1.0)
    rows = np.concatenate([iu, ju, np.arange(n)])
    cols = np.concatenate([ju, iu, np.arange(n)])
    vals = np.concatenate([np.full(2 * iu.size, w), 1.0 - deg * w])
    return validate(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)))


def ergodic_erdos_renyi(n: int, p: float, seed: int, max_attempts: int = 100):
    """Sample ER networks with seeds ``(seed, attempt)`` until one is ergodic.

    Returns the network and the number of rejected draws.
    """
    for attempt in range(max_attempts):
        g = erdos_renyi_network(n, p, seed=[seed, attempt])
        if is_ergodic(g):
            return g, attempt
    raise ResampleLimitExceeded(n, p, max_attempts)


def read_matrix(path: str | os.PathLike) -> NetworkMatrix:
    """Read the sparse text format: ``n`` on the first line, then ``i j g_ij`` lines."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 1:
        raise ValidationError(f"{path}: first line must hold the agent count")
    try:
        n = int(lines[0][0])
        rows, cols, vals = [], [], []
        for parts in lines[1:]:
            if len(parts) != 3:
                raise ValueError(parts)
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            vals.append(float(parts[2]))
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed entry {exc}") from None
    if n < 1 or any(not (0 <= r < n and 0 <= c < n) for r, c in zip(rows, cols)):
        raise ValidationError(f"{path}: index out of range for n={n}")
    return validate(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))


def format_matrix(g: NetworkMatrix) -> str:
    out = [str(g.n)]
    out.extend(f"{i} {j} {v!r}" for i, j, v in g.entries())
    return "\n".join(out) + "\n"


def write_matrix(g: NetworkMatrix, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(g))
