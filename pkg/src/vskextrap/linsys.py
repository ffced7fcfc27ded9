"""Saddle-point interpolation systems for conditionally positive definite kernels.

The interpolant ``s(x) = sum_k alpha_k phi(|x - x_k|) + sum_j beta_j p_j(x)``
has coefficients solving::

    [[A + lam*I, P], [P.T, O]] @ [alpha, beta] = [f, 0]

with ``A`` the kernel matrix and ``P`` the polynomial matrix of degree
``l - 1``. ``ridge="full"`` adds ``lam`` to the polynomial block of the
diagonal as well.
"""
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from . import _core
from .errors import DegenerateInputError, DomainError, ShapeError, SingularSystemError
from .kernels import KernelSpec, as_points, cross_matrix, kernel_matrix

__all__ = [
    "PolyBasis",
    "FittedExtrapolant",
    "poly_matrix",
    "assemble",
    "solve",
    "fit",
    "evaluate",
    "RIDGE_SCOPES",
    "PIVOT_RTOL",
]

RIDGE_SCOPES = ("kernel", "full")
PIVOT_RTOL = 1e-12


def _graded_lex(d, degree):
    terms = []
    for total in range(degree + 1):
        block = set()
        for combo in combinations_with_replacement(range(d), total):
            exps = [0] * d
            for var in combo:
                exps[var] += 1
            block.add(tuple(exps))
        terms.extend(sorted(block, reverse=True))
    return tuple(terms)


@dataclass(frozen=True)
class PolyBasis:
    """Monomials of total degree ``<= degree`` in ``d`` variables, graded-lex ordered.

    >>> PolyBasis.create(2, 1).terms
    ((0, 0), (1, 0), (0, 1))
    """

    d: int
    degree: int
    terms: tuple = field(repr=False)

    @classmethod
    def create(cls, d, degree):
        if d < 1:
            raise DomainError(f"basis dimension must be positive, got {d}")
        if degree < 0:
            raise DomainError("polynomial degree must be nonnegative (kernel order l >= 1)")
        return cls(d, degree, _graded_lex(d, degree))

    @classmethod
    def for_kernel(cls, spec):
        return cls.create(spec.d, spec.cpd_order - 1)

    @property
    def m(self):
        return len(self.terms)

    def __post_init__(self):
        if len(self.terms) != comb(self.degree + self.d, self.degree):
            raise DomainError("basis terms do not span the full polynomial space")


def poly_matrix(basis, points):
    """``P[i, j] = p_j(x_i)`` for the monomials of ``basis``."""
    if basis is None or basis.m == 0:
        raise DomainError("empty polynomial basis")
    pts = as_points(points, basis.d)
    out = np.ones((pts.shape[0], basis.m))
    for j, exps in enumerate(basis.terms):
        for var, e in enumerate(exps):
            if e:
                out[:, j] *= pts[:, var] ** e
    return out


def _check_distinct(pts):
    if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
        raise DegenerateInputError("interpolation nodes must be pairwise distinct")


def assemble(spec, basis, nodes, values, lam=0.0, ridge="kernel"):
    """Build the (regularized) block system and its right-hand side.

    Returns ``(K, g)`` with ``K`` of size ``(n+m, n+m)`` and ``g = (f, 0)``.
    """
    if ridge not in RIDGE_SCOPES:
        raise DomainError(f"ridge must be one of {RIDGE_SCOPES}, got {ridge!r}")
    if not lam >= 0:
        raise DomainError(f"ridge parameter must be nonnegative, got {lam}")
    if basis.d != spec.d:
        raise ShapeError(f"basis dimension {basis.d} != kernel dimension {spec.d}")
    pts = as_points(nodes, spec.d)
    f = np.asarray(values, dtype=np.float64).ravel()
    n, m = pts.shape[0], basis.m
    if f.shape[0] != n:
        raise ShapeError(f"{f.shape[0]} values for {n} nodes")
    if n < m:
        raise DegenerateInputError(f"need at least m={m} nodes, got {n}")
    _check_distinct(pts)

    k = np.zeros((n + m, n + m))
    k[:n, :n] = kernel_matrix(spec, pts)
    p = poly_matrix(basis, pts)
    k[:n, n:] = p
    k[n:, :n] = p.T
    if lam:
        size = n + m if ridge == "full" else n
        k[np.arange(size), np.arange(size)] += lam
    g = np.concatenate([f, np.zeros(m)])
    return k, g


def solve(system, rhs, *, context=None):
    """Solve ``system @ gamma = rhs`` by LU with partial pivoting.

    Raises :class:`SingularSystemError` when a pivot falls below
    ``1e-12 * ||system||_inf``. ``context`` is appended to the message.
    """
    k = np.asarray(system, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ShapeError(f"system must be square, got shape {k.shape}")
    g = np.asarray(rhs, dtype=np.float64).ravel()
    if g.shape[0] != k.shape[0]:
        raise ShapeError(f"rhs of length {g.shape[0]} for a {k.shape[0]}-square system")
    norm = np.abs(k).sum(axis=1).max() if k.size else 0.0
    threshold = PIVOT_RTOL * norm if norm > 0 else np.finfo(float).tiny
    lu, piv, bad = _core.lu_factor(k, threshold)
    if bad >= 0:
        where = f" ({context})" if context else ""
        raise SingularSystemError(
            f"numerically singular system{where}: pivot {lu[bad, bad]:.3e} at column "
            f"{bad} below threshold {threshold:.3e}; nodes may not be unisolvent",
            pivot=float(lu[bad, bad]),
            index=int(bad),
            threshold=float(threshold),
        )
    return _core.lu_solve(lu, piv, g)


@dataclass(frozen=True, eq=False)
class FittedExtrapolant:
    """Solved kernel interpolant ``sum alpha_k phi(|x-x_k|) + sum beta_j p_j(x)``.

    ``scaling`` is set for variably scaled models: ``nodes`` are then the
    lifted nodes and calling the model lifts its argument first.
    """

    alpha: np.ndarray
    beta: np.ndarray
    nodes: np.ndarray
    spec: KernelSpec
    basis: PolyBasis
    lam: float = 0.0
    ridge: str = "kernel"
    scaling: object = None

    def __post_init__(self):
        for name in ("alpha", "beta", "nodes"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.alpha.shape[0] != self.nodes.shape[0]:
            raise ShapeError("alpha length must equal the number of nodes")
        if self.beta.shape[0] != self.basis.m:
            raise ShapeError("beta length must equal the basis size")

    @property
    def n(self):
        return self.nodes.shape[0]

    def __call__(self, x):
        if self.scaling is not None:
            from .vsk import evaluate_vsk

            return evaluate_vsk(self, self.scaling, x)
        return evaluate(self, x)


def fit(spec, nodes, values, lam=0.0, ridge="kernel", basis=None):
    """Assemble and solve in one step; returns a :class:`FittedExtrapolant`."""
    basis = basis or PolyBasis.for_kernel(spec)
    pts = as_points(nodes, spec.d)
    k, g = assemble(spec, basis, pts, values, lam, ridge)
    n = pts.shape[0]
    gamma = solve(k, g, context=f"{spec}, n={n}, m={basis.m}, lambda={lam:g}, ridge={ridge}")
    return FittedExtrapolant(gamma[:n], gamma[n:], pts, spec, basis, float(lam), ridge)


def evaluate(model, x):
    """Evaluate ``model`` at one point (returns float) or many (returns array)."""
    scalar = np.ndim(x) == 0 or (model.spec.d > 1 and np.ndim(x) == 1)
    pts = as_points(x, model.spec.d)
    vals = cross_matrix(model.spec, pts, model.nodes) @ model.alpha
    vals = vals + poly_matrix(model.basis, pts) @ model.beta
    return float(vals[0]) if scalar else vals
