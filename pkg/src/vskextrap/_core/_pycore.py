"""Pure-Python/numpy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_ccore`` module; used when the
extension is unavailable or ``VSKEXTRAP_PURE_PYTHON`` is set.
"""
import numpy as np


def phs_cross(x, y, power, use_log):
    """Polyharmonic kernel block ``phi(|x_i - y_k|)`` for row-major point sets."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    diff = x[:, None, :] - y[None, :, :]
    r = np.sqrt(np.einsum("ikd,ikd->ik", diff, diff))
    if not use_log:
        return r**power
    out = np.zeros_like(r)
    pos = r > 0.0
    out[pos] = r[pos] ** power * np.log(r[pos])
    return out


def lu_factor(a, threshold):
    """In-place-style LU with partial pivoting on a copy of ``a``.

    Returns ``(lu, piv, bad)`` where ``bad`` is the first column whose pivot
    magnitude fell below ``threshold`` (``-1`` when none did). Factorization
    stops at ``bad``.
    """
    lu = np.array(a, dtype=np.float64, order="C", copy=True)
    n = lu.shape[0]
    piv = np.arange(n, dtype=np.intp)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        piv[k] = p
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
        pivot = lu[k, k]
        if not abs(pivot) >= threshold:
            return lu, piv, k
        if k + 1 < n:
            lu[k + 1 :, k] /= pivot
            lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, piv, -1


def lu_solve(lu, piv, b):
    x = np.array(b, dtype=np.float64, copy=True)
    n = lu.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            x[k], x[p] = x[p], x[k]
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1 :] @ x[i + 1 :]) / lu[i, i]
    return x


def smo_solve(kmat, f, epsilon, zeta, tol, max_iter):
    """Sequential minimal optimization for the epsilon-SVR dual.

    The 2n variables are ``z = (alpha_star, alpha)`` with labels ``+1`` and
    ``-1``; ``beta = alpha_star - alpha``. Working pairs use the maximal
    violator for ``i`` and second-order selection for ``j``.

    Returns ``(beta, iterations, gap)``; ``gap`` is the final maximal
    violation, so ``gap < tol`` means converged.
    """
    kmat = np.ascontiguousarray(kmat, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    n = f.shape[0]
    y = np.concatenate([np.ones(n), -np.ones(n)])
    idx = np.concatenate([np.arange(n), np.arange(n)])
    fy = y * f[idx]
    diag = np.diag(kmat)
    z = np.zeros(2 * n)
    kb = np.zeros(n)  # K @ beta
    tau = 1e-12
    gap = np.inf
    it = 0
    while it < max_iter:
        grad = y * kb[idx] + epsilon - fy
        up = np.where(y > 0, z < zeta, z > 0)
        low = np.where(y > 0, z > 0, z < zeta)
        if not up.any() or not low.any():
            gap = 0.0
            break
        v = -y * grad
        up_idx = np.flatnonzero(up)
        i = up_idx[_last_argmax(v[up_idx])]
        gmax = v[i]
        low_idx = np.flatnonzero(low)
        gap = gmax - v[low_idx].min()
        if gap < tol:
            break
        ki = idx[i]
        cand = low_idx[gmax - v[low_idx] > 0]
        if cand.size == 0:
            break
        kc = idx[cand]
        quad = diag[ki] + diag[kc] - 2.0 * kmat[ki, kc]
        quad = np.where(quad > 0, quad, tau)
        j = cand[_last_argmax(((gmax - v[cand]) ** 2) / quad)]
        kj = idx[j]
        zi_old, zj_old = z[i], z[j]
        zi, zj = _pair_update(
            z[i], z[j], y[i], y[j], grad[i], grad[j],
            diag[ki] + diag[kj] - 2.0 * kmat[ki, kj], zeta, tau,
        )
        z[i], z[j] = zi, zj
        dbi = y[i] * (zi - zi_old)
        dbj = y[j] * (zj - zj_old)
        # same summation order as the compiled loop
        kb += kmat[:, ki] * dbi
        kb += kmat[:, kj] * dbj
        it += 1
    beta = z[:n] - z[n:]
    return beta, it, float(gap)


def _last_argmax(a):
    # ties resolve to the highest index, as in the compiled loop
    return a.size - 1 - int(np.argmax(a[::-1]))


def _pair_update(zi, zj, yi, yj, gi, gj, quad, c, tau):
    if quad <= 0:
        quad = tau
    if yi != yj:
        delta = (-gi - gj) / quad
        diff = zi - zj
        zi += delta
        zj += delta
        if diff > 0:
            if zj < 0:
                zj = 0.0
                zi = diff
        else:
            if zi < 0:
                zi = 0.0
                zj = -diff
        if diff > 0:
            if zi > c:
                zi = c
                zj = c - diff
        else:
            if zj > c:
                zj = c
                zi = c + diff
    else:
        delta = (gi - gj) / quad
        total = zi + zj
        zi -= delta
        zj += delta
        if total > c:
            if zi > c:
                zi = c
                zj = total - c
        else:
            if zj < 0:
                zj = 0.0
                zi = total
        if total > c:
            if zj > c:
                zj = c
                zi = total - c
        else:
            if zi < 0:
                zi = 0.0
                zj = total
    return zi, zj
