"""Pure-Python/NumPy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
The compiled module is preferred at import time (see ``_backend``); this one
is the fallback and the reference the extension is tested against.
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

import numpy as np

BACKEND = "python"

# radial geometry codes shared with the compiled kernel
EUCLID, HYPER, GRAPH = 0, 1, 2

STATUS_OK = 0
STATUS_NO_ROOT = 1
STATUS_NOT_ADMISSIBLE = 2
STATUS_RMAX = 3
STATUS_BLOWUP = 4

_CHUNK_ENTRIES = 4_000_000


@lru_cache(maxsize=None)
def _subsets(n: int, k: int) -> np.ndarray:
    return np.array(list(combinations(range(n), k)), dtype=np.intp).reshape(-1, k)


def elem_sym_batch(lam):
    """S_0..S_n of each row of ``lam`` by expanding prod(1 + lam_i t)."""
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    m, n = lam.shape
    out = np.zeros((m, n + 1))
    out[:, 0] = 1.0
    for i in range(n):
        # update high-to-low so each coefficient uses the previous polynomial
        out[:, 1 : i + 2] = out[:, 1 : i + 2] + lam[:, i : i + 1] * out[:, 0 : i + 1]
    return out


def minor_sums_batch(A):
    """Sums of all k x k principal minors, k = 0..n, for a stack of matrices."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    m, n, _ = A.shape
    out = np.zeros((m, n + 1))
    out[:, 0] = 1.0
    for k in range(1, n + 1):
        idx = _subsets(n, k)
        per_matrix = len(idx) * k * k
        step = max(1, _CHUNK_ENTRIES // per_matrix)
        for lo in range(0, m, step):
            sub = A[lo : lo + step][:, idx[:, :, None], idx[:, None, :]]
            out[lo : lo + step, k] = np.linalg.det(sub).sum(axis=1)
    return out


def sk_grad_batch(A, S, kmax):
    """Derivative matrices dS_j/da_ij for j = 0..kmax via the trace recursion.

    ``S`` holds S_0..S_n of each matrix. Returns shape (m, kmax + 1, n, n),
    with the j = 0 slice identically zero.
    """
    A = np.asarray(A, dtype=np.float64)
    m, n, _ = A.shape
    out = np.zeros((m, kmax + 1, n, n))
    eye = np.eye(n)
    At = np.swapaxes(A, 1, 2)
    for j in range(1, kmax + 1):
        out[:, j] = S[:, j - 1, None, None] * eye - out[:, j - 1] @ At
    return out


# --------------------------------------------------------------------------
# radial ODE


def _binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return float(math.comb(n, k))


def _radial_rhs(geom, n, k, l, q, r, u, du, coef):
    """Second derivative of the radial profile, or (nan, status) on failure."""
    ck1, cl1, ck, cl = coef
    if r == 0.0:
        if geom == HYPER:
            return 1.0 + u, STATUS_OK
        return 1.0, STATUS_OK
    if geom == EUCLID:
        t = du / r
    elif geom == HYPER:
        t = du / math.tanh(r) - u
    else:
        t = du / (r * math.sqrt(1.0 + du * du))
    alpha = ck1 * t ** (k - 1) - q * cl1 * (t ** (l - 1) if l >= 1 else 0.0)
    beta = q * cl * t**l - ck * t**k
    if alpha == 0.0 or not math.isfinite(alpha):
        return math.nan, STATUS_NO_ROOT
    a = beta / alpha
    # Garding-cone membership of (a, t, ..., t)
    for j in range(1, k + 1):
        sj = a * _binom(n - 1, j - 1) * t ** (j - 1) + _binom(n - 1, j) * t**j
        if not sj > 0.0:
            return math.nan, STATUS_NOT_ADMISSIBLE
    if geom == EUCLID:
        return a, STATUS_OK
    if geom == HYPER:
        return a + u, STATUS_OK
    w = math.sqrt(1.0 + du * du)
    return a * w**3, STATUS_OK


def _rk4_step(geom, n, k, l, q, r, u, du, h, coef):
    a1, s = _radial_rhs(geom, n, k, l, q, r, u, du, coef)
    if s:
        return None, s
    a2, s = _radial_rhs(geom, n, k, l, q, r + h / 2, u + h / 2 * du, du + h / 2 * a1, coef)
    if s:
        return None, s
    du3 = du + h / 2 * a2
    a3, s = _radial_rhs(geom, n, k, l, q, r + h / 2, u + h / 2 * (du + h / 2 * a1), du3, coef)
    if s:
        return None, s
    a4, s = _radial_rhs(
        geom, n, k, l, q, r + h, u + h * du + h * h / 2 * a2, du + h * a3, coef
    )
    if s:
        return None, s
    u_new = u + h * du + h * h / 6 * (a1 + a2 + a3)
    du_new = du + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
    if not (math.isfinite(u_new) and math.isfinite(du_new)):
        return None, STATUS_BLOWUP
    return (u_new, du_new), STATUS_OK


def _stop_value(geom, u, du, target):
    # crossing of zero marks the stopping radius
    if geom == HYPER:
        return u
    return du - target


def integrate_radial(geom, n, k, l, q, u0, target, h, r_max):
    """RK4 (Runge-Kutta-Nystrom form) outward from r = 0 with u'(0) = 0.

    Stops where u' reaches ``target`` (euclid, graph) or u reaches 0 (hyper);
    the last step is shortened by bisection so the stop condition holds to
    rounding. Returns ``(r, u, du, d2u, status)``.
    """
    coef = (_binom(n - 1, k - 1), _binom(n - 1, l - 1), _binom(n - 1, k), _binom(n - 1, l))
    rs, us, dus, d2us = [0.0], [u0], [0.0], []
    r, u, du = 0.0, float(u0), 0.0
    a0, status = _radial_rhs(geom, n, k, l, q, r, u, du, coef)
    if status:
        return _pack(rs, us, dus, [math.nan], status)
    d2us.append(a0)
    while True:
        if r >= r_max:
            return _pack(rs, us, dus, d2us, STATUS_RMAX)
        nxt, status = _rk4_step(geom, n, k, l, q, r, u, du, h, coef)
        if status:
            return _pack(rs, us, dus, d2us, status)
        if _stop_value(geom, *nxt, target) >= 0.0:
            lo, hi = 0.0, h
            best = nxt
            for _ in range(64):
                mid = 0.5 * (lo + hi)
                trial, s = _rk4_step(geom, n, k, l, q, r, u, du, mid, coef)
                if s:
                    hi = mid
                    continue
                if _stop_value(geom, *trial, target) >= 0.0:
                    hi, best = mid, trial
                else:
                    lo = mid
            r = r + hi
            u, du = best
            a, status = _radial_rhs(geom, n, k, l, q, r, u, du, coef)
            rs.append(r), us.append(u), dus.append(du), d2us.append(a)
            return _pack(rs, us, dus, d2us, status)
        r = r + h
        u, du = nxt
        a, status = _radial_rhs(geom, n, k, l, q, r, u, du, coef)
        rs.append(r), us.append(u), dus.append(du), d2us.append(a)
        if status:
            return _pack(rs, us, dus, d2us, status)


def _pack(rs, us, dus, d2us, status):
    return (
        np.array(rs),
        np.array(us),
        np.array(dus),
        np.array(d2us),
        int(status),
    )
