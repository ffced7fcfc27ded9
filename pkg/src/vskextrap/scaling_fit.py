"""Data-driven scaling functions from two parametric decay classes.

Rational:     g(x; mu) = x**(-mu1) / (x**mu2 + mu3)         (x > 0)
Exponential:  g(x; mu) = (mu1 * x + mu3) * exp(-mu2 * x)

Both classes are fitted by robust iteratively reweighted least squares:
Levenberg-Marquardt passes on the weighted residuals alternate with Tukey
bisquare reweighting of leverage-adjusted residuals. The class whose plain
residual norm on the samples is smaller becomes the scaling function.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, FitDegenerateError, PoleError, SelectionError, VskError

__all__ = [
    "ModelClass",
    "ScalingModel",
    "eval_model",
    "model_jacobian",
    "default_init",
    "scan_init",
    "levenberg_marquardt",
    "bisquare_weights",
    "fit_class",
    "select_scaling",
    "POLE_TOL",
]

logger = logging.getLogger(__name__)

POLE_TOL = 1e-14
BISQUARE_TUNE = 4.685
MAD_NORMALIZER = 0.6745


class ModelClass(str, Enum):
    RATIONAL = "rational"
    EXPONENTIAL = "exponential"


def _rational_parts(mu, x):
    if np.any(x <= 0):
        raise DomainError("rational scaling model needs x > 0")
    lx = np.log(x)
    num = np.exp(-mu[0] * lx)
    xp = np.exp(mu[1] * lx)
    den = xp + mu[2]
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError(f"rational model with mu={list(mu)} has a pole on the given points")
    return lx, num, xp, den


def eval_model(cls, mu, x):
    """Evaluate a scaling model of class ``cls`` with parameters ``mu``."""
    cls = ModelClass(cls)
    mu = np.asarray(mu, dtype=np.float64)
    xa = np.asarray(x, dtype=np.float64)
    if cls is ModelClass.RATIONAL:
        _, num, _, den = _rational_parts(mu, xa)
        out = num / den
    else:
        out = (mu[0] * xa + mu[2]) * np.exp(-mu[1] * xa)
    return float(out) if out.ndim == 0 else out


def model_jacobian(cls, mu, x):
    """Analytic ``(n, 3)`` Jacobian of the model with respect to ``mu``."""
    cls = ModelClass(cls)
    mu = np.asarray(mu, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64).ravel()
    jac = np.empty((x.shape[0], 3))
    if cls is ModelClass.RATIONAL:
        lx, num, xp, den = _rational_parts(mu, x)
        g = num / den
        jac[:, 0] = -lx * g
        jac[:, 1] = -num * xp * lx / den**2
        jac[:, 2] = -num / den**2
    else:
        e = np.exp(-mu[1] * x)
        jac[:, 0] = x * e
        jac[:, 1] = -x * (mu[0] * x + mu[2]) * e
        jac[:, 2] = e
    return jac


def default_init(cls, x, f):
    """Starting parameters: ``(0, 1, 1)`` for rational decay; for exponential
    decay the rate comes from a log-linear fit of ``|f|`` and the amplitude
    matches the sample at the smallest abscissa."""
    cls = ModelClass(cls)
    if cls is ModelClass.RATIONAL:
        return np.array([0.0, 1.0, 1.0])
    x = np.asarray(x, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    ok = np.abs(f) > 0
    rate = 0.0
    if ok.sum() >= 2 and np.ptp(x[ok]) > 0:
        rate = -np.polyfit(x[ok], np.log(np.abs(f[ok])), 1)[0]
    k = int(np.argmin(x))
    return np.array([0.0, rate, f[k] * np.exp(rate * x[k])])


SCAN_EXPONENT = np.round(np.arange(-3.0, 6.0 + 1e-9, 0.1), 10)
SCAN_STARTS = 8
SCREEN_ITER = 100
SCAN_RATE = np.round(np.arange(-5.0, 10.0 + 1e-9, 0.05), 10)


def scan_init(cls, x, f, count=1):
    """Grid-search starts that exploit the partly linear structure.

    Exponential: for each rate ``mu2`` on a grid, ``(mu1, mu3)`` solve a
    linear least-squares problem. Rational: for each ``(mu1, mu2)`` on a grid,
    ``mu3`` solves the linearized equation ``f * (x**mu2 + mu3) = x**-mu1``.
    The candidate with the smallest true residual is returned, or with
    ``count > 1`` a ``(count, 3)`` array of the best candidates.
    """
    cls = ModelClass(cls)
    x = np.asarray(x, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    with np.errstate(all="ignore"):
        if cls is ModelClass.EXPONENTIAL:
            e = np.exp(-SCAN_RATE[:, None] * x[None, :])
            u, v = x * e, e
            # 2x2 normal equations per rate
            a11, a12, a22 = (u * u).sum(1), (u * v).sum(1), (v * v).sum(1)
            b1, b2 = (u * f).sum(1), (v * f).sum(1)
            det = a11 * a22 - a12**2
            mu1 = (a22 * b1 - a12 * b2) / det
            mu3 = (a11 * b2 - a12 * b1) / det
            res = ((mu1[:, None] * u + mu3[:, None] * v - f) ** 2).sum(1)
            cand = np.column_stack([mu1, SCAN_RATE, mu3])
        else:
            lx = np.log(x)
            g1, g2 = np.meshgrid(SCAN_EXPONENT, SCAN_EXPONENT, indexing="ij")
            g1, g2 = g1.ravel(), g2.ravel()
            num = np.exp(-g1[:, None] * lx)
            xp = np.exp(g2[:, None] * lx)
            ff = (f * f).sum()
            mu3 = ((num - f * xp) * f).sum(1) / ff if ff > 0 else np.ones_like(g1)
            den = xp + mu3[:, None]
            res = ((num / den - f) ** 2).sum(1)
            res[np.any(np.abs(den) < POLE_TOL, axis=1)] = np.inf
            cand = np.column_stack([g1, g2, mu3])
    res[~np.isfinite(res)] = np.inf
    if not np.isfinite(res).any():
        best = default_init(cls, x, f)[None, :]
    else:
        # prefer local minima of the grid so that starts come from distinct valleys
        shape = (SCAN_RATE.size,) if cls is ModelClass.EXPONENTIAL else (SCAN_EXPONENT.size,) * 2
        grid = res.reshape(shape)
        padded = np.pad(grid, 1, constant_values=np.inf)
        is_min = np.isfinite(grid)
        for shift in np.ndindex(*(3,) * grid.ndim):
            if all(k == 1 for k in shift):
                continue
            window = tuple(slice(k, k + n) for k, n in zip(shift, grid.shape))
            is_min &= grid <= padded[window]
        order = np.argsort(res, kind="stable")
        flat_min = is_min.ravel()
        picks = [i for i in order if flat_min[i]][:count]
        picks += [i for i in order if not flat_min[i] and np.isfinite(res[i])][: count - len(picks)]
        best = cand[picks]
    return best[0] if count == 1 else best


@dataclass(frozen=True, eq=False)
class ScalingModel:
    """A fitted scaling function; callable on abscissae.

    ``residual_norm`` is the unweighted ``||f - g(x_i)||_2`` on the training
    nodes. ``weights`` are the robust weights of the final pass.
    """

    cls: ModelClass
    mu: tuple
    residual_norm: float
    weights: np.ndarray = field(repr=False, default=None)
    converged: bool = True
    iterations: int = 0

    def __call__(self, x):
        return eval_model(self.cls, self.mu, x)

    @property
    def label(self):
        return self.cls.value

    @property
    def params(self):
        return self.mu


def _safe_residual(cls, mu, x, f):
    try:
        r = f - eval_model(cls, mu, x)
    except (PoleError, DomainError, FloatingPointError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def levenberg_marquardt(cls, x, f, mu0, weights=None, *, max_iter=400, xtol=1e-8, damping=1e-3):
    """Minimize ``sum w_i (f_i - g(x_i; mu))**2`` starting at ``mu0``.

    Steps solve the damped normal equations with Marquardt scaling as an
    augmented least-squares problem. The damping starts at ``damping`` and is
    divided by 10 after an accepted step, multiplied by 10 after a rejected
    one. Returns ``(mu, iterations, converged)``.
    """
    x = np.asarray(x, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    w = np.ones_like(f) if weights is None else np.asarray(weights, dtype=np.float64)
    sw = np.sqrt(w)
    mu = np.array(mu0, dtype=np.float64)
    with np.errstate(all="ignore"):
        r = _safe_residual(cls, mu, x, f)
    if r is None:
        raise FitDegenerateError(f"{ModelClass(cls).value} model undefined at initial mu={mu.tolist()}")
    cost = np.sum((sw * r) ** 2)
    fscale = max(1.0, np.max(np.abs(f)))
    lam = damping
    it = 0
    converged = False
    while it < max_iter:
        if cost <= (1e-15 * fscale) ** 2 * f.shape[0]:
            converged = True
            break
        with np.errstate(all="ignore"):
            jac = sw[:, None] * model_jacobian(cls, mu, x)
        if not np.all(np.isfinite(jac)):
            raise FitDegenerateError(f"non-finite Jacobian at mu={mu.tolist()}")
        it += 1
        jtj_diag = np.sum(jac**2, axis=0)
        if not np.any(jtj_diag > 0):
            raise FitDegenerateError(f"Jacobian vanishes at mu={mu.tolist()}")
        scale = np.sqrt(np.maximum(jtj_diag, np.max(jtj_diag) * 1e-14))
        # one SVD of the scaled Jacobian serves every damping value:
        # min |J D^-1 y - r|^2 + lam |y|^2 has y = V diag(s / (s^2 + lam)) U^T r
        u, sv, vt = np.linalg.svd(jac / scale, full_matrices=False)
        ur = u.T @ (sw * r)
        accepted = False
        while lam <= 1e16:
            step = (vt.T @ (sv * ur / (sv**2 + lam))) / scale
            trial = mu + step
            with np.errstate(all="ignore"):
                r_trial = _safe_residual(cls, trial, x, f)
                cost_trial = np.inf if r_trial is None else np.sum((sw * r_trial) ** 2)
            if np.isfinite(cost_trial):
                if cost_trial <= cost:
                    accepted = True
                    break
            lam *= 10.0
        if not accepted:
            sv = np.linalg.svd(jac, compute_uv=False)
            if sv[-1] <= 1e-12 * sv[0]:
                raise FitDegenerateError(
                    f"rank-deficient Jacobian at mu={mu.tolist()} (singular values {sv.tolist()})"
                )
            # no descent direction left at working precision
            converged = True
            break
        small = np.linalg.norm(step) <= xtol * (np.linalg.norm(mu) + xtol)
        mu, r, cost = trial, r_trial, cost_trial
        lam = max(lam / 10.0, 1e-12)
        if small:
            converged = True
            break
    return mu, it, converged


def bisquare_weights(residuals, jac=None, n_params=3, tune=BISQUARE_TUNE, floor=0.0):
    """Tukey bisquare weights of (leverage-adjusted) residuals.

    The residual scale is the median absolute value after dropping the
    ``n_params - 1`` smallest, divided by 0.6745, and never below ``floor``.
    """
    r = np.asarray(residuals, dtype=np.float64)
    if jac is not None:
        q, _ = np.linalg.qr(jac)
        h = np.minimum(np.sum(q**2, axis=1), 0.9999)
        r = r / np.sqrt(1.0 - h)
    a = np.sort(np.abs(r))
    s = np.median(a[max(n_params - 1, 0) :]) / MAD_NORMALIZER
    s = max(s, floor)
    if s == 0:
        return np.ones_like(r)
    u = r / (tune * s)
    return np.where(np.abs(u) < 1.0, (1.0 - u**2) ** 2, 0.0)


def fit_class(cls, nodes, values, init=None, *, robust=True, max_iter=400, max_reweight=100, xtol=1e-8):
    """Fit one model class to ``(nodes, values)``.

    Without ``init`` unweighted Levenberg-Marquardt passes are started from
    :func:`default_init` and from the best :func:`scan_init` candidates. With
    ``robust=False`` the end point with the smallest residual is returned.
    Otherwise the starts and end points are ranked by median absolute
    residual and the best one seeds the bisquare reweighting.
    Non-convergence is reported through ``ScalingModel.converged``; rank loss
    raises :class:`FitDegenerateError`.
    """
    cls = ModelClass(cls)
    x = np.asarray(nodes, dtype=np.float64).ravel()
    f = np.asarray(values, dtype=np.float64).ravel()
    if x.shape != f.shape:
        raise DomainError(f"{x.shape[0]} nodes but {f.shape[0]} values")
    if x.shape[0] < 3:
        raise DomainError("need at least 3 samples to fit 3 parameters")
    if cls is ModelClass.RATIONAL and np.any(x <= 0):
        raise DomainError("rational scaling model needs strictly positive nodes")
    weights = np.ones_like(f)
    if init is None:
        starts = [default_init(cls, x, f), *scan_init(cls, x, f, count=SCAN_STARTS)]
    else:
        starts = [np.array(init, dtype=np.float64)]
    candidates = []
    failure = None
    exact = (1e-15 * max(1.0, np.max(np.abs(f)))) ** 2 * f.shape[0]
    # starts are screened on a short budget; the winner is polished below
    screen = max_iter if len(starts) == 1 else min(max_iter, SCREEN_ITER)
    for mu0 in starts:
        if robust:
            candidates.append((mu0, 0, False))
        try:
            candidates.append(levenberg_marquardt(cls, x, f, mu0, weights, max_iter=screen, xtol=xtol))
        except FitDegenerateError as exc:
            failure = exc
            continue
        with np.errstate(all="ignore"):
            r = _safe_residual(cls, candidates[-1][0], x, f)
        if r is not None and np.sum(r**2) <= exact:
            break  # the data lie in the class; no other start can do better
    best = None
    for mu, its, conv in candidates:
        with np.errstate(all="ignore"):
            r = _safe_residual(cls, mu, x, f)
        if r is None:
            continue
        # a robust start is ranked by its median residual so that one outlier
        # cannot pull the reweighting into its own basin
        key = (np.median(np.abs(r)), np.sum(r**2)) if robust else (np.sum(r**2),)
        if best is None or key < best[0]:
            best = (key, mu, its, conv)
    if best is None:
        raise failure if failure is not None else FitDegenerateError(
            f"{cls.value} model undefined at every start"
        )
    _, mu, total, converged = best
    if not converged and total >= screen:
        mu, its, converged = levenberg_marquardt(cls, x, f, mu, weights, max_iter=max_iter, xtol=xtol)
        total += its
    if robust:
        floor = np.sqrt(np.finfo(float).eps) * max(1.0, np.max(np.abs(f)))
        outer_converged = False
        for _ in range(max_reweight):
            r = f - eval_model(cls, mu, x)
            new_w = bisquare_weights(r, model_jacobian(cls, mu, x), floor=floor)
            if np.count_nonzero(new_w) < 3:
                break
            mu_new, its, converged = levenberg_marquardt(
                cls, x, f, mu, new_w, max_iter=max_iter, xtol=xtol
            )
            total += its
            weights = new_w
            delta = np.max(np.abs(mu_new - mu)) / max(np.max(np.abs(mu)), 1.0)
            mu = mu_new
            if delta <= xtol:
                outer_converged = True
                break
        converged = converged and outer_converged
    resid = float(np.linalg.norm(f - eval_model(cls, mu, x)))
    if not converged:
        logger.info("%s fit stopped before convergence (mu=%s)", cls.value, mu.tolist())
    return ScalingModel(cls, tuple(float(v) for v in mu), resid, weights, converged, total)


def _finite_on(model, domain, samples=201):
    lo, hi = domain
    grid = np.linspace(lo, hi, samples)
    try:
        vals = model(grid)
    except (PoleError, DomainError):
        return False
    return bool(np.all(np.isfinite(vals)))


def select_scaling(nodes, values, *, robust=True, domain=None):
    """Fit both classes and keep the one with the smaller residual norm.

    Ties go to the rational class. With ``domain=(lo, hi)`` a candidate that
    is not finite on that interval is discarded.
    """
    fits = {}
    failures = {}
    for cls in (ModelClass.RATIONAL, ModelClass.EXPONENTIAL):
        try:
            model = fit_class(cls, nodes, values, robust=robust)
        except VskError as exc:
            failures[cls.value] = exc
            continue
        if not np.isfinite(model.residual_norm):
            failures[cls.value] = FitDegenerateError("non-finite residual norm")
        elif domain is not None and not _finite_on(model, domain):
            failures[cls.value] = PoleError(f"fitted model not finite on {tuple(domain)}")
        else:
            fits[cls] = model
    if not fits:
        detail = "; ".join(f"{k}: {v}" for k, v in failures.items())
        raise SelectionError(f"no scaling model could be fitted ({detail})", failures)
    best = min(fits.values(), key=lambda m: (m.residual_norm, m.cls is not ModelClass.RATIONAL))
    logger.debug("selected %s scaling, residual %.3e", best.cls.value, best.residual_norm)
    return best
