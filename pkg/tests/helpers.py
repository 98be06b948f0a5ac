"""Random test networks and rosters shared by the test modules."""

import numpy as np

from hman import AgentRoster, validate

FIVE_G = [
    [0.4, 0.2, 0.2, 0.0, 0.2],
    [0.2, 0.4, 0.2, 0.2, 0.0],
    [0.2, 0.2, 0.4, 0.2, 0.0],
    [0.0, 0.2, 0.2, 0.6, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.8],
]
FIVE_X0 = [0.2, 0.9, 0.35, 0.6, 0.05]
TYPES = ("averager", "copier", "voter")


def normalize_rows(w):
    w = np.asarray(w, dtype=float)
    return w / w.sum(axis=1, keepdims=True)


def random_stochastic(n, rng, density=0.4):
    """Row-stochastic matrix on a random support (every row nonempty)."""
    mask = rng.random((n, n)) < density
    mask[np.arange(n), rng.integers(n, size=n)] = True
    return normalize_rows(mask * rng.uniform(0.1, 1.0, (n, n)))


def random_ergodic(n, rng, density=0.3):
    """Directed cycle plus self-loops plus random extra edges."""
    mask = rng.random((n, n)) < density
    mask[np.arange(n), (np.arange(n) + 1) % n] = True
    mask[np.arange(n), np.arange(n)] = True
    return validate(normalize_rows(mask * rng.uniform(0.1, 1.0, (n, n))))


def random_symmetric_ergodic(n, rng, density=0.3):
    """Symmetric stochastic matrix on a connected support with self-loops."""
    mask = np.triu(rng.random((n, n)) < density, 1)
    if n > 1:
        mask[np.arange(n - 1), np.arange(1, n)] = True
    mask = mask | mask.T
    w = mask * rng.uniform(0.1, 1.0, (n, n))
    w = np.triu(w, 1)
    w = w + w.T
    w /= w.sum(axis=1).max() * rng.uniform(1.05, 1.5)
    w[np.arange(n), np.arange(n)] = 1.0 - w.sum(axis=1)
    return validate(w)


def block_diagonal(n1, n2, rng):
    """Two disconnected ergodic blocks."""
    a = random_ergodic(n1, rng).toarray()
    b = random_ergodic(n2, rng).toarray()
    out = np.zeros((n1 + n2, n1 + n2))
    out[:n1, :n1] = a
    out[n1:, n1:] = b
    return validate(out)


def random_roster(n, rng, kinds=TYPES):
    return AgentRoster(tuple(rng.choice(kinds, size=n)))
