"""Variably scaled kernels: interpolation on the graph of a scaling function.

A point ``x`` in ``R**d`` is lifted to ``(x, psi(x))`` in ``R**(d+1)`` and a
polyharmonic spline of the same order ``l`` is used on the lifted points,
with polynomials of degree ``l - 1`` in ``d + 1`` variables. For ``d = 1`` and
``l = 2`` this is the thin plate spline with the basis ``{1, x, psi}``.

Scaling functions are plain callables. For ``d = 1`` they receive a 1-D array
of abscissae, otherwise an ``(n, d)`` array; either way they return one value
per point.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ScalingEvaluationError
from .kernels import as_points
from .linsys import evaluate, fit

__all__ = ["ScalingFunction", "lift", "fit_vsk", "evaluate_vsk"]


@dataclass(frozen=True)
class ScalingFunction:
    """Wrap a callable ``psi`` together with a label and its parameters."""

    func: object
    label: str = "custom"
    params: tuple = field(default=())

    def __call__(self, x):
        return self.func(x)


def _psi_values(psi, pts):
    arg = pts[:, 0] if pts.shape[1] == 1 else pts
    try:
        # non-finite values are reported below as a ScalingEvaluationError
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = np.asarray(psi(arg), dtype=np.float64)
    except ArithmeticError as exc:
        raise ScalingEvaluationError(f"scaling function failed: {exc}") from exc
    vals = np.broadcast_to(vals, (pts.shape[0],)) if vals.ndim == 0 else vals.ravel()
    if vals.shape[0] != pts.shape[0]:
        raise ScalingEvaluationError(
            f"scaling function returned {vals.shape[0]} values for {pts.shape[0]} points"
        )
    bad = ~np.isfinite(vals)
    if bad.any():
        x_bad = pts[np.argmax(bad)]
        raise ScalingEvaluationError(f"scaling function is not finite at x={x_bad.tolist()}")
    return vals


def lift(psi, x, d=1):
    """Map points ``x`` in ``R**d`` to ``(x, psi(x))``.

    A single point gives a ``(d+1,)`` vector, several points an ``(n, d+1)``
    array.
    """
    single = np.ndim(x) == 0 or (d > 1 and np.ndim(x) == 1)
    pts = as_points(x, d)
    out = np.column_stack([pts, _psi_values(psi, pts)])
    return out[0] if single else out


def fit_vsk(spec_base, psi, nodes, values, lam=0.0, ridge="kernel"):
    """Fit the variably scaled interpolant for base kernel ``spec_base``.

    The returned model lives in dimension ``spec_base.d + 1`` and keeps a
    reference to ``psi``, which is reused for every later evaluation.
    """
    lifted_spec = spec_base.lifted()
    pts = lift(psi, as_points(nodes, spec_base.d), spec_base.d)
    model = fit(lifted_spec, pts, values, lam=lam, ridge=ridge)
    return replace(model, scaling=psi)


def evaluate_vsk(model, psi, x):
    """Evaluate a variably scaled model at ``x`` (in the original dimension).

    ``psi=None`` uses the scaling function stored in the model.
    """
    psi = model.scaling if psi is None else psi
    d = model.spec.d - 1
    return evaluate(model, lift(psi, x, d))
