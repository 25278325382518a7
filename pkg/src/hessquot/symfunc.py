"""Elementary symmetric functions of spectra and matrices.

``S_k(A)`` is the sum of the k x k principal minors of ``A`` (equivalently the
k-th elementary symmetric polynomial of its eigenvalues when ``A`` is
symmetric). Conventions used throughout the package: ``S_0 = 1`` and
``S_{-1} = 0``, so quotient formulas stay uniform in ``l = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._backend import kernels

MINOR_LIMIT = 12

#: absolute/relative tolerance used for identity residuals (scaled by ||A||^k)
IDENTITY_TOL = 1e-10


def binom(n: int, k: int) -> float:
    """Binomial coefficient with the convention C(n, k) = 0 outside 0..n."""
    if k < 0 or k > n:
        return 0.0
    return float(math.comb(n, k))


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def _as_spectrum(values) -> np.ndarray:
    lam = np.asarray(values, dtype=np.float64).reshape(-1)
    if lam.size < 1:
        raise ValueError("a spectrum needs at least one value")
    if not np.all(np.isfinite(lam)):
        raise ValueError("spectrum values must be finite")
    return lam


def elem_sym_all(values) -> np.ndarray:
    """Return ``[S_0, ..., S_n]`` of the given eigenvalues."""
    lam = _as_spectrum(values)
    return kernels.elem_sym_batch(lam[None, :])[0]


def _faddeev_leverrier(A: np.ndarray) -> np.ndarray:
    # det(tI + A) coefficients without an eigen-solver; used above MINOR_LIMIT
    n = A.shape[0]
    S = np.zeros(n + 1)
    S[0] = 1.0
    M = np.zeros_like(A)
    c = 1.0
    eye = np.eye(n)
    for j in range(1, n + 1):
        M = A @ M + c * eye
        c = -np.trace(A @ M) / j
        S[j] = (-1) ** j * c
    return S


def sym_all_batch(A) -> np.ndarray:
    """``S_0..S_n`` for a stack of matrices of shape (m, n, n)."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError(f"expected shape (m, n, n), got {A.shape}")
    n = A.shape[1]
    if n <= MINOR_LIMIT:
        return kernels.minor_sums_batch(A)
    return np.array([_faddeev_leverrier(a) for a in A])


def sym_all_of_matrix(A) -> np.ndarray:
    """``[S_0(A), ..., S_n(A)]`` by principal-minor enumeration."""
    A = _as_matrix(A)
    return sym_all_batch(A[None])[0]


def sk_of_matrix(k: int, A) -> float:
    """Sum of all k x k principal minors of ``A``."""
    A = _as_matrix(A)
    n = A.shape[0]
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    if k == 0:
        return 1.0
    return float(sym_all_of_matrix(A)[k])


def sk_gradient(k: int, A) -> np.ndarray:
    """Matrix of partial derivatives dS_k/da_ij, valid for non-symmetric ``A``.

    Uses ``S_k^{ij} = S_{k-1} delta_ij - S_{k-1}^{il} a_jl`` from ``S_1^{ij} = delta_ij``.
    """
    A = _as_matrix(A)
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    S = sym_all_of_matrix(A)
    return kernels.sk_grad_batch(A[None], S[None], k)[0, k]


def sk_gradients_batch(A, kmax: int, S=None) -> np.ndarray:
    """Stacked gradients for j = 0..kmax, shape (m, kmax + 1, n, n)."""
    A = np.asarray(A, dtype=np.float64)
    if S is None:
        S = sym_all_batch(A)
    return kernels.sk_grad_batch(A, S, kmax)


def sk_gradient_minors(k: int, A) -> np.ndarray:
    """dS_k/da_ij summed from cofactors of the principal minors containing i, j.

    Independent of the trace recursion; kept as the check for it.
    """
    A = _as_matrix(A)
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    if k == 1:
        return np.eye(n)
    idx = np.array(list(combinations(range(n), k)))          # (m, k)
    sub = A[idx[:, :, None], idx[:, None, :]]                # (m, k, k)
    keep = np.array([[r for r in range(k) if r != p] for p in range(k)])
    minors = sub[:, keep[:, None, :, None], keep[None, :, None, :]]  # (m, k, k, k-1, k-1)
    sign = (-1.0) ** np.add.outer(np.arange(k), np.arange(k))
    cof = sign * np.linalg.det(minors)
    G = np.zeros((n, n))
    np.add.at(G, (idx[:, :, None], idx[:, None, :]), cof)
    return G


def cone_index(spec_or_matrix) -> int:
    """Largest k with S_1, ..., S_k all positive (0 if S_1 <= 0).

    A 1-D input is read as a spectrum, a 2-D input as a matrix.
    """
    x = np.asarray(spec_or_matrix, dtype=np.float64)
    S = elem_sym_all(x) if x.ndim == 1 else sym_all_of_matrix(x)
    k = 0
    for s in S[1:]:
        if s > 0:
            k += 1
        else:
            break
    return k


def _sym_values(spec_or_matrix) -> np.ndarray:
    x = np.asarray(spec_or_matrix, dtype=np.float64)
    return elem_sym_all(x) if x.ndim == 1 else sym_all_of_matrix(x)


@dataclass(frozen=True)
class InequalityRecord:
    name: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    applicable: bool = True
    note: str = ""


@dataclass(frozen=True)
class InequalityReport:
    n: int
    k: int
    l: int
    cone_index: int
    records: list[InequalityRecord] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.records if r.applicable)

    def by_name(self, prefix: str) -> list[InequalityRecord]:
        return [r for r in self.records if r.name.startswith(prefix)]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "l": self.l,
            "cone_index": self.cone_index,
            "all_hold": self.all_hold,
            "records": [r.__dict__.copy() for r in self.records],
        }


def _record(name, lhs, rhs, tol, applicable=True, note=""):
    if not applicable:
        return InequalityRecord(name, math.nan, math.nan, math.nan, False, False, note)
    slack = rhs - lhs
    return InequalityRecord(name, float(lhs), float(rhs), float(slack), bool(slack >= -tol))


def _root(x: float, p: int) -> float:
    if p == 1:
        return x
    return math.copysign(abs(x) ** (1.0 / p), x)


def inequality_report(spec_or_matrix, k: int, l: int, tol: float = 1e-12) -> InequalityReport:
    """Evaluate the Newton and MacLaurin-type inequalities with their slacks.

    Newton's inequality is checked for every index 1..n-1 (it holds for any
    real spectrum). The quotient chains need the input in the Garding cone of
    the relevant order; when it is not, the record is marked not applicable.
    ``tol`` is relative to the size of the two sides.
    """
    S = _sym_values(spec_or_matrix)
    n = len(S) - 1
    if not 0 <= l < k <= n:
        raise ValueError(f"need 0 <= l < k <= n, got l={l}, k={k}, n={n}")
    ci = 0
    for s in S[1:]:
        if s > 0:
            ci += 1
        else:
            break

    def scaled_tol(a, b):
        return tol * max(1.0, abs(a), abs(b))

    def mean(j):
        return S[j] / binom(n, j)

    recs: list[InequalityRecord] = []
    for j in range(1, n):
        lhs = (n - j + 1) * (j + 1) * S[j - 1] * S[j + 1]
        rhs = j * (n - j) * S[j] ** 2
        recs.append(_record(f"newton[{j}]", lhs, rhs, scaled_tol(lhs, rhs)))

    in_cone = ci >= k
    why = f"input not in Gamma_{k} (cone index {ci})"
    if in_cone:
        lhs = _root(mean(k) / mean(l), k - l)
    for r in range(1, k + 1):
        for s in range(0, min(l, r - 1) + 1):
            name = f"gen_maclaurin[{k},{l}|{r},{s}]"
            if not in_cone:
                recs.append(_record(name, 0, 0, 0, False, why))
                continue
            rhs = _root(mean(r) / mean(s), r - s)
            recs.append(_record(name, lhs, rhs, scaled_tol(lhs, rhs)))

    if l >= 1:
        name = f"maclaurin[{k},{l}]"
        if in_cone:
            a, b = _root(mean(k), k), _root(mean(l), l)
            recs.append(_record(name, a, b, scaled_tol(a, b)))
        else:
            recs.append(_record(name, 0, 0, 0, False, why))
        name = f"newton_maclaurin[{k},{l}]"
        if in_cone:
            a, b = mean(k) / mean(k - 1), mean(l) / mean(l - 1)
            recs.append(_record(name, a, b, scaled_tol(a, b)))
        else:
            recs.append(_record(name, 0, 0, 0, False, why))

    if k + 1 <= n:
        name = f"ratio_chain[{k},{l}]"
        if in_cone:
            a = mean(k + 1) / mean(k)
            b = _root(mean(k) / mean(l), k - l)
            recs.append(_record(name, a, b, scaled_tol(a, b)))
        else:
            recs.append(_record(name, 0, 0, 0, False, why))
    return InequalityReport(n=n, k=k, l=l, cone_index=ci, records=recs)


def identity_scale(A, k: int) -> float:
    """``max(1, ||A||_F)^k``, the scale identity residuals are measured against."""
    return max(1.0, float(np.linalg.norm(A))) ** k


def algebraic_identity_residuals(A, k: int) -> dict:
    """Max-abs residuals of the trace identities and the index-swap identities.

    Keys: ``contraction`` (sum S_k^{ij} a_ij - k S_k), ``trace``
    (sum S_k^{ii} - (n-k+1) S_{k-1}), ``swap`` (S_k^{il} a_jl - S_k^{lj} a_li),
    ``recursion`` (recursive gradient vs the cofactor gradient) and, for
    symmetric input, ``symmetric_swap`` (S_k^{ij} a_il - S_k^{il} a_ij).
    """
    A = _as_matrix(A)
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    S = sym_all_of_matrix(A)
    G = kernels.sk_grad_batch(A[None], S[None], k)[0, k]
    out = {
        "contraction": abs(float(np.sum(G * A)) - k * S[k]),
        "trace": abs(float(np.trace(G)) - (n - k + 1) * S[k - 1]),
        "swap": float(np.max(np.abs(G @ A.T - A.T @ G))),
        "recursion": float(np.max(np.abs(G - sk_gradient_minors(k, A)))),
    }
    if np.array_equal(A, A.T):
        M = G.T @ A
        out["symmetric_swap"] = float(np.max(np.abs(M - M.T)))
    out["scale"] = identity_scale(A, k)
    out["ok"] = all(v <= IDENTITY_TOL * out["scale"] for key, v in out.items() if key != "scale")
    return out


def random_cone_matrix(rng: np.random.Generator, n: int, k: int, max_tries: int = 100_000):
    """Random symmetric matrix in Gamma_k and its eigenvalues.

    Eigenvalues are drawn as mu + z with mu ~ U(0, 2), z ~ N(0, 1), rejected
    until S_1..S_k > 0, then conjugated by a Haar-random orthogonal matrix.
    """
    for _ in range(max_tries):
        lam = rng.uniform(0.0, 2.0) + rng.standard_normal(n)
        S = elem_sym_all(lam)
        if np.all(S[1 : k + 1] > 0):
            break
    else:
        raise RuntimeError(f"rejection sampling for Gamma_{k} failed")
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    A = (Q * lam) @ Q.T
    A = 0.5 * (A + A.T)
    return A, lam
