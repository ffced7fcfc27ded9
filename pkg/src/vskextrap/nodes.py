"""One-dimensional node distributions on ``[a, b]``."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

__all__ = [
    "Distribution",
    "NodeSet",
    "van_der_corput",
    "halton",
    "chebyshev",
    "random_uniform",
    "equispaced",
    "generate",
]


class Distribution(str, Enum):
    HALTON = "halton"
    CHEBYSHEV = "chebyshev"
    RANDOM = "random"
    UNIFORM = "uniform"


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Sorted, pairwise distinct abscissae with their provenance."""

    points: np.ndarray
    distribution: Distribution
    seed: int = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)

    def __eq__(self, other):
        return (
            isinstance(other, NodeSet)
            and self.distribution == other.distribution
            and self.seed == other.seed
            and np.array_equal(self.points, other.points)
        )


def _check_interval(n, a, b, n_min=1):
    if int(n) != n or n < n_min:
        raise DomainError(f"need an integer n >= {n_min}, got {n!r}")
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")


def van_der_corput(indices, base=2):
    """Radical inverse of each nonnegative integer index in ``base``."""
    out = []
    for i in indices:
        v, denom = 0.0, 1.0
        i = int(i)
        while i:
            i, digit = divmod(i, base)
            denom *= base
            v += digit / denom
        out.append(v)
    return np.array(out)


def halton(n, a, b):
    """First ``n`` base-2 van der Corput points from index 1, mapped to ``[a, b]``."""
    _check_interval(n, a, b)
    u = van_der_corput(range(1, n + 1), 2)
    return NodeSet(np.sort(a + (b - a) * u), Distribution.HALTON)


def chebyshev(n, a, b, kind="lobatto"):
    """Chebyshev nodes on ``[a, b]``, sorted ascending.

    ``kind="lobatto"`` gives the extrema ``cos(k pi / (n-1))``, endpoints
    included; ``kind="gauss"`` gives the roots ``cos((2k-1) pi / (2n))``.
    """
    if kind == "lobatto":
        _check_interval(n, a, b, n_min=2)
        t = np.cos(np.arange(n) * np.pi / (n - 1))
    elif kind == "gauss":
        _check_interval(n, a, b)
        t = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))
    else:
        raise DomainError(f"unknown Chebyshev kind {kind!r}")
    pts = (a + b) / 2 + (b - a) / 2 * t
    pts = np.sort(pts)
    if kind == "lobatto":
        pts[0], pts[-1] = a, b
    return NodeSet(pts, Distribution.CHEBYSHEV)


def random_uniform(n, a, b, seed):
    """``n`` sorted i.i.d. Uniform(a, b) draws from a PCG64 generator.

    Collisions (and draws landing exactly on ``a``) are redrawn.
    """
    _check_interval(n, a, b)
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = set()
    while len(pts) < n:
        for v in a + (b - a) * rng.random(n - len(pts)):
            if a < v < b:
                pts.add(float(v))
    return NodeSet(np.sort(np.fromiter(pts, dtype=np.float64)), Distribution.RANDOM, int(seed))


def equispaced(n, a, b):
    """``x_k = a + k (b - a) / (n - 1)`` for ``k = 0..n-1``."""
    _check_interval(n, a, b, n_min=2)
    k = np.arange(n)
    pts = a + k * (b - a) / (n - 1)
    pts[-1] = b
    return NodeSet(pts, Distribution.UNIFORM)


def generate(distribution, n, a, b, seed=0, chebyshev_kind="gauss"):
    """Dispatch on the distribution tag."""
    dist = Distribution(distribution)
    if dist is Distribution.HALTON:
        return halton(n, a, b)
    if dist is Distribution.CHEBYSHEV:
        return chebyshev(n, a, b, kind=chebyshev_kind)
    if dist is Distribution.RANDOM:
        return random_uniform(n, a, b, seed)
    return equispaced(n, a, b)
