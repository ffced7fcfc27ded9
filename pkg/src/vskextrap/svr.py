"""Epsilon-insensitive support vector regression.

The predictor is ``P(x) = sum_i beta_i k(x, x_i) + b`` with
``beta_i = alpha*_i - alpha_i``. Training minimizes the dual::

    1/2 beta @ K @ beta + eps * sum(alpha* + alpha) - f @ beta

subject to ``0 <= alpha_i, alpha*_i <= zeta`` and ``sum(beta) = 0``. The
solver is SMO over the ``2n`` variables ``(alpha*, alpha)`` with
maximal-violating-pair selection for the first index and second-order
(gain-based) selection for the second, stopping once the largest KKT
violation drops below ``tol``.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _core
from .errors import ConfigError, DomainError, ShapeError
from .kernels import KernelSpec, as_points, cross_matrix

__all__ = [
    "PolynomialKernel",
    "SvrModel",
    "gram",
    "train_svr",
    "predict_svr",
    "dual_objective",
    "cross_validate",
    "EPSILON_GRID",
    "ZETA_GRID",
    "PHS_SHIFT",
    "MAX_ITER",
]

logger = logging.getLogger(__name__)

EPSILON_GRID = (1e-4, 1e-3, 1e-2, 1e-1)
ZETA_GRID = (1e-2, 1e-1, 1.0, 10.0, 100.0)
PHS_SHIFT = 1e-8
# The cubic polynomial Gram matrix on [0.1, 2] is badly conditioned and SMO
# needs 1e6..1e7 pair updates to reach a 1e-6 KKT gap there.
MAX_ITER = 10_000_000


@dataclass(frozen=True)
class PolynomialKernel:
    """Inhomogeneous polynomial kernel ``(offset + x . y)**degree``."""

    degree: int = 3
    offset: float = 1.0

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise DomainError(f"polynomial degree must be a positive integer, got {self.degree!r}")
        if self.offset < 0:
            raise DomainError("polynomial kernel offset must be nonnegative")

    def __str__(self):
        return f"poly(degree={self.degree}, offset={self.offset:g})"


def _dim(kernel):
    return kernel.d if isinstance(kernel, KernelSpec) else 1


def gram(kernel, x, y):
    """Kernel matrix ``k(x_i, y_j)`` for a polynomial or polyharmonic kernel."""
    d = _dim(kernel)
    xp, yp = as_points(x, d), as_points(y, d)
    if isinstance(kernel, KernelSpec):
        return cross_matrix(kernel, xp, yp)
    return (kernel.offset + xp @ yp.T) ** kernel.degree


@dataclass(frozen=True, eq=False)
class SvrModel:
    """A trained regressor.

    ``converged`` is False when the iteration cap was hit; ``gap`` is the
    final maximal KKT violation and ``iterations`` the number of pair updates.
    """

    dual_diffs: np.ndarray
    bias: float
    support_index_set: tuple
    kernel: object
    epsilon: float
    zeta: float
    nodes: np.ndarray = field(repr=False)
    converged: bool = True
    iterations: int = 0
    gap: float = 0.0

    def __post_init__(self):
        for name in ("dual_diffs", "nodes"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def alpha_star(self):
        return np.maximum(self.dual_diffs, 0.0)

    @property
    def alpha(self):
        return np.maximum(-self.dual_diffs, 0.0)

    def __call__(self, x):
        return predict_svr(self, x)


def _bias(kmat, beta, f, epsilon, zeta):
    """Average of the KKT bias over free support vectors.

    A point with ``0 < beta_i < zeta`` sits on the upper tube edge, giving
    ``b = f_i - (K beta)_i - eps``; one with ``-zeta < beta_i < 0`` sits on the
    lower edge, giving ``b = f_i - (K beta)_i + eps``. Without free vectors the
    midpoint of the interval allowed by the remaining KKT conditions is used.
    """
    r = f - kmat @ beta
    tiny = 1e-12 * zeta
    upper = (beta > tiny) & (beta < zeta - tiny)
    lower = (beta < -tiny) & (beta > -zeta + tiny)
    if upper.any() or lower.any():
        return float(np.concatenate([r[upper] - epsilon, r[lower] + epsilon]).mean())
    zero = np.abs(beta) <= tiny
    at_top = beta >= zeta - tiny
    at_bottom = beta <= -zeta + tiny
    lo = np.concatenate([r[zero] - epsilon, r[at_bottom] + epsilon])
    hi = np.concatenate([r[zero] + epsilon, r[at_top] - epsilon])
    lb = lo.max() if lo.size else hi.min()
    ub = hi.min() if hi.size else lb
    return float(0.5 * (lb + ub))


def train_svr(kernel, nodes, values, epsilon, zeta, *, tol=1e-6, max_iter=MAX_ITER):
    """Solve the dual problem and return an :class:`SvrModel`.

    For a polyharmonic ``kernel`` a diagonal shift of ``1e-8 * max|A|`` is
    added during training only.
    """
    d = _dim(kernel)
    pts = as_points(nodes, d)
    f = np.asarray(values, dtype=np.float64).ravel()
    if f.shape[0] != pts.shape[0]:
        raise ShapeError(f"{f.shape[0]} values for {pts.shape[0]} nodes")
    if pts.shape[0] < 1:
        raise DomainError("need at least one training point")
    if not epsilon >= 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    if not zeta > 0:
        raise DomainError(f"zeta must be positive, got {zeta}")
    kmat = gram(kernel, pts, pts)
    ktrain = kmat
    if isinstance(kernel, KernelSpec):
        ktrain = kmat + PHS_SHIFT * np.abs(kmat).max() * np.eye(kmat.shape[0])
    beta, it, gap = _core.smo_solve(ktrain, f, float(epsilon), float(zeta), float(tol), int(max_iter))
    converged = gap < tol
    if not converged:
        logger.info(
            "SVR stopped at the iteration cap %d with KKT gap %.3e (eps=%g, zeta=%g)",
            it, gap, epsilon, zeta,
        )
    b = _bias(kmat, beta, f, epsilon, zeta)
    support = tuple(int(i) for i in np.flatnonzero(beta))
    return SvrModel(beta, b, support, kernel, float(epsilon), float(zeta), pts, converged, it, gap)


def predict_svr(model, x):
    """``sum_i beta_i k(x, x_i) + b``; a float for one point, else an array."""
    d = _dim(model.kernel)
    scalar = np.ndim(x) == 0 or (d > 1 and np.ndim(x) == 1)
    vals = gram(model.kernel, x, model.nodes) @ model.dual_diffs + model.bias
    return float(vals[0]) if scalar else vals


def dual_objective(kmat, beta, values, epsilon):
    """Dual objective (minimization form) at ``beta`` with ``alpha * alpha* = 0``."""
    beta = np.asarray(beta, dtype=np.float64)
    f = np.asarray(values, dtype=np.float64)
    return float(0.5 * beta @ kmat @ beta + epsilon * np.abs(beta).sum() - f @ beta)


def _fold_score(kernel, x, f, folds, eps, zeta, tol, max_iter):
    errs = []
    for hold in folds:
        train = np.ones(x.shape[0], dtype=bool)
        train[hold] = False
        model = train_svr(kernel, x[train], f[train], eps, zeta, tol=tol, max_iter=max_iter)
        pred = predict_svr(model, x[hold])
        errs.append(np.sqrt(np.mean((pred - f[hold]) ** 2)))
    return float(np.mean(errs))


def cross_validate(
    nodes,
    values,
    *,
    kernel=PolynomialKernel(),
    folds=3,
    epsilons=EPSILON_GRID,
    zetas=ZETA_GRID,
    tol=1e-6,
    max_iter=MAX_ITER,
    jobs=1,
    return_scores=False,
):
    """Grid search over ``(epsilon, zeta)`` with contiguous-block k-fold validation.

    The samples are sorted by abscissa and split into ``folds`` consecutive
    blocks. The pair with the smallest mean validation RMSE wins; ties go to
    the smaller ``zeta``, then the smaller ``epsilon``. Returns
    ``(epsilon, zeta)``, plus a dict of scores when ``return_scores``.
    """
    x = np.asarray(nodes, dtype=np.float64).ravel()
    f = np.asarray(values, dtype=np.float64).ravel()
    if x.shape != f.shape:
        raise ShapeError(f"{x.shape[0]} nodes but {f.shape[0]} values")
    if int(folds) != folds or folds < 2:
        raise ConfigError(f"need an integer number of folds >= 2, got {folds!r}")
    if x.shape[0] < folds:
        raise ConfigError(f"{x.shape[0]} samples cannot be split into {folds} folds")
    order = np.argsort(x, kind="stable")
    x, f = x[order], f[order]
    blocks = np.array_split(np.arange(x.shape[0]), folds)
    if min(len(blk) for blk in blocks) < 2:
        raise ConfigError(f"a fold with fewer than 2 points ({x.shape[0]} samples, {folds} folds)")
    if not len(epsilons) or not len(zetas):
        raise ConfigError("empty hyperparameter grid")
    grid = [(float(e), float(z)) for z, e in product(sorted(zetas), sorted(epsilons))]

    def score(pair):
        return _fold_score(kernel, x, f, blocks, pair[0], pair[1], tol, max_iter)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(score, grid))
    else:
        scores = [score(p) for p in grid]
    best = min(range(len(grid)), key=lambda k: (scores[k], k))
    logger.debug("cross-validation picked eps=%g zeta=%g (rmse %.3e)", *grid[best], scores[best])
    if return_scores:
        return grid[best], dict(zip(grid, scores))
    return grid[best]
