# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, tanh, fabs, isfinite, NAN

cnp.import_array()

BACKEND = "cython"

cdef enum:
    EUCLID = 0
    HYPER = 1
    GRAPH = 2

cdef enum:
    STATUS_OK = 0
    STATUS_NO_ROOT = 1
    STATUS_NOT_ADMISSIBLE = 2
    STATUS_RMAX = 3
    STATUS_BLOWUP = 4

cdef enum:
    NMAX = 16


def elem_sym_batch(lam):
    cdef double[:, ::1] L = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t m = L.shape[0], n = L.shape[1]
    out_arr = np.zeros((m, n + 1))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t a, i, j
    for a in range(m):
        out[a, 0] = 1.0
        for i in range(n):
            for j in range(i + 1, 0, -1):
                out[a, j] += L[a, i] * out[a, j - 1]
    return out_arr


cdef double _det(double* M, int k) nogil:
    """Determinant of a k x k row-major buffer by partial-pivot LU (destroys M)."""
    cdef int i, j, c, p
    cdef double det = 1.0, piv, f, tmp
    for c in range(k):
        p = c
        piv = fabs(M[c * k + c])
        for i in range(c + 1, k):
            if fabs(M[i * k + c]) > piv:
                piv = fabs(M[i * k + c])
                p = i
        if piv == 0.0:
            return 0.0
        if p != c:
            for j in range(k):
                tmp = M[c * k + j]
                M[c * k + j] = M[p * k + j]
                M[p * k + j] = tmp
            det = -det
        det *= M[c * k + c]
        for i in range(c + 1, k):
            f = M[i * k + c] / M[c * k + c]
            for j in range(c + 1, k):
                M[i * k + j] -= f * M[c * k + j]
    return det


def minor_sums_batch(A):
    cdef double[:, :, ::1] X = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t m = X.shape[0]
    cdef int n = <int>X.shape[1]
    if n > NMAX:
        raise ValueError("compiled minor kernel supports n <= %d" % NMAX)
    out_arr = np.zeros((m, n + 1))
    cdef double[:, ::1] out = out_arr
    cdef double buf[NMAX * NMAX]
    cdef int idx[NMAX]
    cdef Py_ssize_t a
    cdef unsigned int mask, full = (1u << n)
    cdef int i, j, k
    with nogil:
        for a in range(m):
            out[a, 0] = 1.0
            for mask in range(1, full):
                k = 0
                for i in range(n):
                    if mask & (1u << i):
                        idx[k] = i
                        k += 1
                for i in range(k):
                    for j in range(k):
                        buf[i * k + j] = X[a, idx[i], idx[j]]
                out[a, k] += _det(buf, k)
    return out_arr


def sk_grad_batch(A, S, int kmax):
    cdef double[:, :, ::1] X = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[:, ::1] Sv = np.ascontiguousarray(S, dtype=np.float64)
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1]
    out_arr = np.zeros((m, kmax + 1, n, n))
    cdef double[:, :, :, ::1] G = out_arr
    cdef Py_ssize_t a, jj, i, j, l
    cdef double acc
    with nogil:
        for a in range(m):
            for jj in range(1, kmax + 1):
                for i in range(n):
                    for j in range(n):
                        # G_j = S_{j-1} I - G_{j-1} A^T
                        acc = Sv[a, jj - 1] if i == j else 0.0
                        for l in range(n):
                            acc -= G[a, jj - 1, i, l] * X[a, j, l]
                        G[a, jj, i, j] = acc
    return out_arr


# ---------------------------------------------------------------------------
# radial ODE

cdef double _binom(int n, int k) nogil:
    cdef double r = 1.0
    cdef int i
    if k < 0 or k > n:
        return 0.0
    for i in range(1, k + 1):
        r = r * (n - k + i) / i
    return r


cdef double _ipow(double x, int p) nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(p):
        r *= x
    return r


cdef struct Params:
    int geom, n, k, l
    double q, ck1, cl1, ck, cl


cdef int _rhs(Params* P, double r, double u, double du, double* out) nogil:
    cdef double t, alpha, beta, a, sj, w
    cdef int j
    if r == 0.0:
        out[0] = 1.0 + u if P.geom == HYPER else 1.0
        return STATUS_OK
    if P.geom == EUCLID:
        t = du / r
    elif P.geom == HYPER:
        t = du / tanh(r) - u
    else:
        t = du / (r * sqrt(1.0 + du * du))
    alpha = P.ck1 * _ipow(t, P.k - 1)
    if P.l >= 1:
        alpha -= P.q * P.cl1 * _ipow(t, P.l - 1)
    beta = P.q * P.cl * _ipow(t, P.l) - P.ck * _ipow(t, P.k)
    if alpha == 0.0 or not isfinite(alpha):
        out[0] = NAN
        return STATUS_NO_ROOT
    a = beta / alpha
    for j in range(1, P.k + 1):
        sj = a * _binom(P.n - 1, j - 1) * _ipow(t, j - 1) + _binom(P.n - 1, j) * _ipow(t, j)
        if not sj > 0.0:
            out[0] = NAN
            return STATUS_NOT_ADMISSIBLE
    if P.geom == EUCLID:
        out[0] = a
    elif P.geom == HYPER:
        out[0] = a + u
    else:
        w = sqrt(1.0 + du * du)
        out[0] = a * w * w * w
    return STATUS_OK


cdef int _rk4(Params* P, double r, double u, double du, double h,
              double* u_new, double* du_new) nogil:
    cdef double a1, a2, a3, a4
    cdef int s
    s = _rhs(P, r, u, du, &a1)
    if s:
        return s
    s = _rhs(P, r + h / 2, u + h / 2 * du, du + h / 2 * a1, &a2)
    if s:
        return s
    s = _rhs(P, r + h / 2, u + h / 2 * (du + h / 2 * a1), du + h / 2 * a2, &a3)
    if s:
        return s
    s = _rhs(P, r + h, u + h * du + h * h / 2 * a2, du + h * a3, &a4)
    if s:
        return s
    u_new[0] = u + h * du + h * h / 6 * (a1 + a2 + a3)
    du_new[0] = du + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
    if not (isfinite(u_new[0]) and isfinite(du_new[0])):
        return STATUS_BLOWUP
    return STATUS_OK


cdef inline double _stop(int geom, double u, double du, double target) nogil:
    if geom == HYPER:
        return u
    return du - target


def integrate_radial(int geom, int n, int k, int l, double q, double u0,
                     double target, double h, double r_max):
    cdef Params P
    P.geom = geom
    P.n = n
    P.k = k
    P.l = l
    P.q = q
    P.ck1 = _binom(n - 1, k - 1)
    P.cl1 = _binom(n - 1, l - 1)
    P.ck = _binom(n - 1, k)
    P.cl = _binom(n - 1, l)

    cdef Py_ssize_t cap = <Py_ssize_t>(r_max / h) + 3
    rs_a = np.empty(cap)
    us_a = np.empty(cap)
    dus_a = np.empty(cap)
    d2_a = np.empty(cap)
    cdef double[::1] rs = rs_a, us = us_a, dus = dus_a, d2 = d2_a
    cdef double r = 0.0, u = u0, du = 0.0, a, un, dun, lo, hi, mid, bu, bdu
    cdef int status, s, it
    cdef Py_ssize_t cnt = 1

    rs[0] = 0.0
    us[0] = u0
    dus[0] = 0.0
    status = _rhs(&P, r, u, du, &a)
    d2[0] = a
    if status:
        return rs_a[:1], us_a[:1], dus_a[:1], d2_a[:1], status

    with nogil:
        while True:
            if r >= r_max or cnt >= cap - 1:
                status = STATUS_RMAX
                break
            status = _rk4(&P, r, u, du, h, &un, &dun)
            if status:
                break
            if _stop(geom, un, dun, target) >= 0.0:
                lo = 0.0
                hi = h
                bu = un
                bdu = dun
                for it in range(64):
                    mid = 0.5 * (lo + hi)
                    s = _rk4(&P, r, u, du, mid, &un, &dun)
                    if s:
                        hi = mid
                        continue
                    if _stop(geom, un, dun, target) >= 0.0:
                        hi = mid
                        bu = un
                        bdu = dun
                    else:
                        lo = mid
                r = r + hi
                u = bu
                du = bdu
                status = _rhs(&P, r, u, du, &a)
                rs[cnt] = r
                us[cnt] = u
                dus[cnt] = du
                d2[cnt] = a
                cnt += 1
                break
            r = r + h
            u = un
            du = dun
            status = _rhs(&P, r, u, du, &a)
            rs[cnt] = r
            us[cnt] = u
            dus[cnt] = du
            d2[cnt] = a
            cnt += 1
            if status:
                break
    return (rs_a[:cnt].copy(), us_a[:cnt].copy(), dus_a[:cnt].copy(),
            d2_a[:cnt].copy(), status)
