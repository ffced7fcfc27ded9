# cython: language_level=3
"""Compiled hot kernels. Mirrors ``_pycore`` exactly in signature and semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, pow, fabs, INFINITY

cnp.import_array()


def phs_cross(x, y, int power, bint use_log):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t s = xv.shape[0], n = yv.shape[0], d = xv.shape[1]
    out = np.empty((s, n), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, k, c
    cdef double r2, t, r
    with nogil:
        for i in range(s):
            for k in range(n):
                r2 = 0.0
                for c in range(d):
                    t = xv[i, c] - yv[k, c]
                    r2 = r2 + t * t
                r = sqrt(r2)
                if use_log:
                    if r > 0.0:
                        ov[i, k] = pow(r, power) * log(r)
                    else:
                        ov[i, k] = 0.0
                else:
                    ov[i, k] = pow(r, power)
    return out


def lu_factor(a, double threshold):
    lu = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] m = lu
    cdef Py_ssize_t n = m.shape[0]
    piv = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[::1] pv = piv
    cdef Py_ssize_t i, j, k, p
    cdef Py_ssize_t bad = -1
    cdef double big, t, pivot, lik
    with nogil:
        for k in range(n):
            p = k
            big = fabs(m[k, k])
            for i in range(k + 1, n):
                t = fabs(m[i, k])
                if t > big:
                    big = t
                    p = i
            pv[k] = p
            if p != k:
                for j in range(n):
                    t = m[k, j]
                    m[k, j] = m[p, j]
                    m[p, j] = t
            pivot = m[k, k]
            if not fabs(pivot) >= threshold:
                bad = k
                break
            for i in range(k + 1, n):
                m[i, k] = m[i, k] / pivot
                lik = m[i, k]
                for j in range(k + 1, n):
                    m[i, j] = m[i, j] - lik * m[k, j]
    return lu, piv, bad


def lu_solve(lu, piv, b):
    cdef const double[:, ::1] m = np.ascontiguousarray(lu, dtype=np.float64)
    cdef const Py_ssize_t[::1] pv = np.ascontiguousarray(piv, dtype=np.intp)
    x = np.array(b, dtype=np.float64, copy=True)
    cdef double[::1] xv = x
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, k, p
    cdef double t, acc
    with nogil:
        for k in range(n):
            p = pv[k]
            if p != k:
                t = xv[k]
                xv[k] = xv[p]
                xv[p] = t
        for i in range(1, n):
            acc = 0.0
            for j in range(i):
                acc = acc + m[i, j] * xv[j]
            xv[i] = xv[i] - acc
        for i in range(n - 1, -1, -1):
            acc = 0.0
            for j in range(i + 1, n):
                acc = acc + m[i, j] * xv[j]
            xv[i] = (xv[i] - acc) / m[i, i]
    return x


cdef inline void _pair_update(double* zi, double* zj, double yi, double yj,
                              double gi, double gj, double quad, double c,
                              double tau) noexcept nogil:
    cdef double delta, diff, total
    if quad <= 0:
        quad = tau
    if yi != yj:
        delta = (-gi - gj) / quad
        diff = zi[0] - zj[0]
        zi[0] += delta
        zj[0] += delta
        if diff > 0:
            if zj[0] < 0:
                zj[0] = 0.0
                zi[0] = diff
        else:
            if zi[0] < 0:
                zi[0] = 0.0
                zj[0] = -diff
        if diff > 0:
            if zi[0] > c:
                zi[0] = c
                zj[0] = c - diff
        else:
            if zj[0] > c:
                zj[0] = c
                zi[0] = c + diff
    else:
        delta = (gi - gj) / quad
        total = zi[0] + zj[0]
        zi[0] -= delta
        zj[0] += delta
        if total > c:
            if zi[0] > c:
                zi[0] = c
                zj[0] = total - c
        else:
            if zj[0] < 0:
                zj[0] = 0.0
                zi[0] = total
        if total > c:
            if zj[0] > c:
                zj[0] = c
                zi[0] = total - c
        else:
            if zi[0] < 0:
                zi[0] = 0.0
                zj[0] = total


def smo_solve(kmat, f, double epsilon, double zeta, double tol, long max_iter):
    cdef const double[:, ::1] K = np.ascontiguousarray(kmat, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0]
    cdef Py_ssize_t m = 2 * n
    z_arr = np.zeros(m, dtype=np.float64)
    kb_arr = np.zeros(n, dtype=np.float64)
    grad_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] z = z_arr
    cdef double[::1] kb = kb_arr
    cdef double[::1] grad = grad_arr
    cdef double tau = 1e-12
    cdef double gap = INFINITY
    cdef long it = 0
    cdef Py_ssize_t t, kt, i, j, ki, kj, c
    cdef double yt, v, gmax, vmin, gd, quad, obj, best_obj
    cdef double zi, zj, zi_old, zj_old, yi, yj, dbi, dbj
    with nogil:
        while it < max_iter:
            for t in range(m):
                if t < n:
                    grad[t] = kb[t] + epsilon - fv[t]
                else:
                    grad[t] = -kb[t - n] + epsilon + fv[t - n]
            i = -1
            gmax = -INFINITY
            for t in range(m):
                yt = 1.0 if t < n else -1.0
                if (yt > 0 and z[t] < zeta) or (yt < 0 and z[t] > 0):
                    v = -yt * grad[t]
                    if v >= gmax:
                        gmax = v
                        i = t
            vmin = INFINITY
            j = -1
            best_obj = INFINITY
            if i >= 0:
                ki = i if i < n else i - n
                for t in range(m):
                    yt = 1.0 if t < n else -1.0
                    if (yt > 0 and z[t] > 0) or (yt < 0 and z[t] < zeta):
                        v = -yt * grad[t]
                        if v < vmin:
                            vmin = v
                        gd = gmax - v
                        if gd > 0:
                            kt = t if t < n else t - n
                            quad = K[ki, ki] + K[kt, kt] - 2.0 * K[ki, kt]
                            if quad <= 0:
                                quad = tau
                            obj = -(gd * gd) / quad
                            if obj <= best_obj:
                                best_obj = obj
                                j = t
            if i < 0 or vmin == INFINITY:
                gap = 0.0
                break
            gap = gmax - vmin
            if gap < tol or j < 0:
                break
            kj = j if j < n else j - n
            yi = 1.0 if i < n else -1.0
            yj = 1.0 if j < n else -1.0
            zi_old = z[i]
            zj_old = z[j]
            zi = zi_old
            zj = zj_old
            _pair_update(&zi, &zj, yi, yj, grad[i], grad[j],
                         K[ki, ki] + K[kj, kj] - 2.0 * K[ki, kj], zeta, tau)
            z[i] = zi
            z[j] = zj
            dbi = yi * (zi - zi_old)
            dbj = yj * (zj - zj_old)
            for c in range(n):
                kb[c] = kb[c] + K[c, ki] * dbi + K[c, kj] * dbj
            it += 1
    beta = z_arr[:n] - z_arr[n:]
    return beta, int(it), float(gap)
