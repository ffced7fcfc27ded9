"""Polyharmonic spline kernels.

``phi_{d,l}(r) = r**(2l - d)`` for odd ``d`` and ``r**(2l - d) * log(r)`` for
even ``d``. The kernel is conditionally positive definite of order ``l`` on
``R**d``: the quadratic form ``cpd_sign * c @ A @ c`` is positive for every
nonzero ``c`` orthogonal to polynomials of degree ``l - 1``. The sign is
``(-1)**ceil(k/2)`` for ``r**k`` (odd ``k``) and ``(-1)**(k/2 + 1)`` for
``r**k log r``; for ``d = 1, 2`` it equals ``(-1)**l``.

Points are handled as ``(n, d)`` float arrays throughout the package.
"""
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import DomainError, ShapeError

__all__ = ["KernelSpec", "CUBIC", "TPS", "as_points", "phs_eval", "kernel_matrix", "cross_matrix"]


@dataclass(frozen=True)
class KernelSpec:
    """Polyharmonic spline identified by space dimension ``d`` and order ``l``."""

    d: int
    l: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"kernel dimension must be a positive integer, got {self.d!r}")
        if int(self.l) != self.l or self.l < 1:
            raise DomainError(f"kernel order must be a positive integer, got {self.l!r}")
        if 2 * self.l <= self.d:
            raise DomainError(f"polyharmonic spline needs 2l > d, got d={self.d}, l={self.l}")

    @property
    def power(self):
        return 2 * self.l - self.d

    @property
    def uses_log(self):
        return self.d % 2 == 0

    @property
    def cpd_order(self):
        return self.l

    @property
    def cpd_sign(self):
        k = self.power
        return (-1) ** (k // 2 + 1)

    def lifted(self):
        """Spec of the same order acting on points with one extra coordinate."""
        if 2 * self.l <= self.d + 1:
            raise DomainError(
                f"lifting (d={self.d}, l={self.l}) to d+1 requires 2l > d+1"
            )
        return KernelSpec(self.d + 1, self.l)

    def __str__(self):
        base = "r^%d" % self.power
        return f"phs(d={self.d}, l={self.l}): {base}{' log r' if self.uses_log else ''}"


CUBIC = KernelSpec(1, 2)
TPS = KernelSpec(2, 2)


def as_points(x, d):
    """Coerce ``x`` into an ``(n, d)`` float array.

    A scalar is one point when ``d == 1``; a 1-D array is a list of scalars
    when ``d == 1`` and a single point when ``d > 1``.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        if d != 1:
            raise ShapeError(f"scalar point given for dimension {d}")
        return a.reshape(1, 1)
    if a.ndim == 1:
        if d == 1:
            return a.reshape(-1, 1)
        if a.shape[0] != d:
            raise ShapeError(f"point of length {a.shape[0]} given for dimension {d}")
        return a.reshape(1, d)
    if a.ndim == 2 and a.shape[1] == d:
        return a
    raise ShapeError(f"points of shape {a.shape} do not match dimension {d}")


def phs_eval(spec, r):
    """Evaluate ``phi_{d,l}`` at radius ``r`` (scalar or array).

    ``phi(0) = 0`` for every valid spec, including the ``r**k log r`` case.
    """
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise DomainError("radius must be nonnegative")
    if spec.uses_log:
        out = np.zeros_like(r_arr)
        pos = r_arr > 0
        out[pos] = r_arr[pos] ** spec.power * np.log(r_arr[pos])
    else:
        out = r_arr**spec.power
    return float(out) if out.ndim == 0 else out


def cross_matrix(spec, x, centers):
    """``M[i, k] = phi(|x_i - c_k|)`` for evaluation points ``x``."""
    x = as_points(x, spec.d)
    centers = as_points(centers, spec.d)
    return _core.phs_cross(x, centers, spec.power, spec.uses_log)


def kernel_matrix(spec, points):
    """Symmetric interpolation matrix ``A[i, k] = phi(|x_i - x_k|)``."""
    pts = as_points(points, spec.d)
    a = _core.phs_cross(pts, pts, spec.power, spec.uses_log)
    # exact symmetry regardless of summation order in the distance loop
    return np.triu(a) + np.triu(a, 1).T
