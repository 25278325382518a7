"""P-functions and the linearized quotient operator acting on them.

Each geometry comes with a scalar built from (u, Du) that is a subsolution of
the linearized equation and is constant exactly on the ball solutions:

* ``euclid``: |Du|^2 - 2u
* ``hyper``:  |Du|^2 - u^2 - 2u
* ``curv``:   1/w + u,  w = sqrt(1 + |Du|^2)

``elliptic_on_p`` evaluates F^{ij} P_{ij} with the second derivatives of P
taken by finite differences of the assembled P values, and
``extremum_scan`` checks where P attains its maximum.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, asdict
from itertools import product
from typing import Optional

import numpy as np

from . import symfunc
from .fields import AnalyticField, GeometryTag, ScalarField, as_geometry, operator_from_jet
from .radial import RadialProfile, quotient_constant, radial_spectrum

EQUATION_GATE = 1e-4


class PKind(str, enum.Enum):
    EUCLID = "euclid"
    HYPER = "hyper"
    CURV = "curv"


GEOMETRY_OF_KIND = {
    PKind.EUCLID: GeometryTag.EUCLIDEAN,
    PKind.HYPER: GeometryTag.HYPERBOLIC,
    PKind.CURV: GeometryTag.GRAPH,
}
KIND_OF_GEOMETRY = {g: k for k, g in GEOMETRY_OF_KIND.items()}


class SingularQuotientError(ZeroDivisionError):
    """S_l vanishes, so S_k / S_l has no derivative."""


class EquationGateError(ValueError):
    """The field does not satisfy the quotient equation at the point."""


class AdmissibilityError(ValueError):
    """The operator matrix is outside the cone Gamma_k."""


def evaluate_p(kind, u, Du):
    """P value from u and its gradient; ``Du`` has the coordinates on its last axis.

    For radial hyperbolic data pass u'(r) as a length-1 gradient: the metric
    norm of the gradient of a radial function is |u'|.
    """
    kind = PKind(kind)
    u = np.asarray(u, dtype=np.float64)
    Du = np.asarray(Du, dtype=np.float64)
    g2 = np.sum(Du * Du, axis=-1)
    if kind is PKind.EUCLID:
        out = g2 - 2 * u
    elif kind is PKind.HYPER:
        out = g2 - u * u - 2 * u
    else:
        out = 1.0 / np.sqrt(1.0 + g2) + u
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LinearizedOperator:
    """F^{ij} = d(S_k/S_l)/da_ij together with the values it was built from."""

    F: np.ndarray
    k: int
    l: int
    Sk: float
    Sl: float


def fij_matrix(k: int, l: int, A) -> LinearizedOperator:
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    if not 0 <= l < k <= n:
        raise ValueError(f"need 0 <= l < k <= n, got k={k}, l={l}, n={n}")
    S = symfunc.sym_all_of_matrix(A)
    Gk = symfunc.sk_gradient(k, A)
    if l == 0:
        return LinearizedOperator(Gk, k, l, float(S[k]), 1.0)
    Sl = float(S[l])
    if Sl == 0.0 or abs(Sl) < 1e-300:
        raise SingularQuotientError("S_l(A) = 0")
    Gl = symfunc.sk_gradient(l, A)
    F = (Gk * Sl - S[k] * Gl) / (Sl * Sl)
    return LinearizedOperator(F, k, l, float(S[k]), Sl)


def _spectral_f(lam: np.ndarray, k: int, l: int) -> np.ndarray:
    """Diagonal of F for a diagonal matrix: d(S_k/S_l)/d lambda_i."""
    n = lam.size
    S = symfunc.elem_sym_all(lam)
    out = np.empty(n)
    for i in range(n):
        rest = symfunc.elem_sym_all(np.delete(lam, i)) if n > 1 else np.array([1.0])
        dk = rest[k - 1] if k - 1 < rest.size else 0.0
        dl = (rest[l - 1] if 0 <= l - 1 < rest.size else 0.0) if l >= 1 else 0.0
        out[i] = (dk * S[l] - S[k] * dl) / S[l] ** 2
    return out


def _gate(S: np.ndarray, k: int, l: int, n: int, tol: float) -> None:
    if np.any(S[1 : k + 1] <= 0):
        raise AdmissibilityError("operator matrix is not in the admissible cone")
    q = quotient_constant(n, k, l)
    rel = abs(S[k] / S[l] - q) / q
    if rel > tol:
        raise EquationGateError(f"quotient equation violated: relative residual {rel:.3e} > {tol:.1e}")


# ---------------------------------------------------------------------------
# F^{ij} P_{ij}


def _radial_p_derivs(profile: RadialProfile, kind: PKind, r: float, delta: float):
    def P(rr):
        rr = np.abs(np.asarray(rr, dtype=np.float64))  # P is even in r
        u, du, _ = profile.eval(rr)
        return evaluate_p(kind, u, np.asarray(du)[..., None])

    R = profile.R
    if r + delta <= R:
        p = P(np.array([r - delta, r, r + delta]))
        return (p[2] - p[0]) / (2 * delta), (p[2] - 2 * p[1] + p[0]) / delta**2
    p = P(np.array([r, r - delta, r - 2 * delta, r - 3 * delta]))
    d1 = (3 * p[0] - 4 * p[1] + p[2]) / (2 * delta)
    d2 = (2 * p[0] - 5 * p[1] + 4 * p[2] - p[3]) / delta**2
    return d1, d2


def _elliptic_radial(profile: RadialProfile, k, l, r, gate_tol, delta):
    n = profile.n
    lam = radial_spectrum(profile, r)
    S = symfunc.elem_sym_all(lam)
    _gate(S, k, l, n, gate_tol)
    Fd = _spectral_f(lam, k, l)
    f_rad, f_tan = Fd[0], Fd[-1]
    kind = KIND_OF_GEOMETRY[profile.geometry]
    P1, P2 = _radial_p_derivs(profile, kind, float(r), delta)
    # tangential second derivative P'/r (euclid), P' coth r (hyper); r -> 0 limit is P''
    if profile.geometry is GeometryTag.HYPERBOLIC:
        tang = P2 if r == 0 else P1 / math.tanh(r)
        return f_rad * P2 + (n - 1) * f_tan * tang
    tang = P2 if r == 0 else P1 / r
    if profile.geometry is GeometryTag.EUCLIDEAN:
        return f_rad * P2 + (n - 1) * f_tan * tang
    u, du, d2u = (float(np.asarray(x)) for x in profile.eval(float(r)))
    w2 = 1.0 + du * du
    return f_rad * (P2 - du * d2u * P1 / w2) / w2 + (n - 1) * f_tan * tang / w2


def _p_hessian(jet, x: np.ndarray, kind: PKind, steps: np.ndarray) -> np.ndarray:
    """Central-difference Hessian of P(x) = P(u(x), Du(x)) on the 3^d cross stencil."""
    d = x.size
    offs = np.array(list(product((-1, 0, 1), repeat=d)), dtype=float)
    pts = x + offs * steps
    u, g, _ = jet(pts)
    P = np.asarray(evaluate_p(kind, u, g)).reshape((3,) * d)
    H = np.empty((d, d))
    c = (1,) * d
    for a in range(d):
        ip, im = list(c), list(c)
        ip[a], im[a] = 2, 0
        H[a, a] = (P[tuple(ip)] - 2 * P[c] + P[tuple(im)]) / steps[a] ** 2
        for b in range(a + 1, d):
            def at(sa, sb):
                i = list(c)
                i[a], i[b] = 1 + sa, 1 + sb
                return P[tuple(i)]

            H[a, b] = H[b, a] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * steps[a] * steps[b])
    return H


def _elliptic_grid(jet, dim, x, k, l, geom, gate_tol, steps):
    x = np.asarray(x, dtype=np.float64)
    u, g, H = jet(x[None])
    M = operator_from_jet(g, H, u, geom)[0]
    S = symfunc.sym_all_of_matrix(M)
    _gate(S, k, l, dim, gate_tol)
    F = fij_matrix(k, l, M).F
    kind = KIND_OF_GEOMETRY[geom]
    HP = _p_hessian(jet, x, kind, steps)
    if geom is GeometryTag.EUCLIDEAN:
        return float(np.sum(F * HP))
    # graph: covariant Hessian of P on the graph, raised with the inverse metric
    gv, Hu = g[0], H[0]
    w2 = 1.0 + gv @ gv
    dP = _p_gradient(jet, x, kind, steps)
    cov = HP - (gv @ dP / w2) * Hu
    ginv = np.eye(dim) - np.outer(gv, gv) / w2
    return float(np.sum(F * (ginv @ cov)))


def _p_gradient(jet, x, kind, steps):
    d = x.size
    out = np.empty(d)
    for a in range(d):
        e = np.zeros(d)
        e[a] = steps[a]
        u, g, _ = jet(np.stack([x + e, x - e]))
        P = evaluate_p(kind, u, g)
        out[a] = (P[0] - P[1]) / (2 * steps[a])
    return out


def elliptic_on_p(f, k: int, l: int, geom=None, point=None, *, gate_tol: float = EQUATION_GATE,
                  delta: Optional[float] = None) -> float:
    """F^{ij} P_{ij} at one point for the geometry's P-function.

    ``f`` may be a :class:`RadialProfile` (``point`` is a radius), a
    :class:`ScalarField` (``point`` is a grid node, P differenced on the grid)
    or an :class:`AnalyticField` (P differenced with step ``delta``).

    The default radial step is R/64: P is differenced twice, so a smaller step
    would amplify the integration error of a computed profile.
    """
    if isinstance(f, RadialProfile):
        if geom is not None and as_geometry(geom) is not f.geometry:
            raise ValueError("geometry tag does not match the profile")
        r = float(point)
        if not 0 <= r <= f.R:
            raise ValueError("radius outside [0, R]")
        return float(_elliptic_radial(f, k, l, r, gate_tol, delta or f.R / 64))
    geom = as_geometry(geom if geom is not None else GeometryTag.EUCLIDEAN)
    if geom is GeometryTag.HYPERBOLIC:
        raise ValueError("hyperbolic P-function is evaluated on radial profiles only")
    if isinstance(f, ScalarField):
        idx = f.node_index(point, margin=3)
        x = f.node_coordinates(idx)
        return _elliptic_grid(f.jet, f.dim, x, k, l, geom, gate_tol, np.asarray(f.spacing))
    if isinstance(f, AnalyticField):
        return _elliptic_grid(f.jet, f.dim, np.asarray(point, float), k, l, geom, gate_tol,
                              np.full(f.dim, delta or 1e-3))
    raise TypeError(f"unsupported field type {type(f).__name__}")


def elliptic_along_profile(profile: RadialProfile, k: int, l: int, samples: int = 200,
                           gate_tol: float = EQUATION_GATE) -> np.ndarray:
    rr = np.linspace(0.0, profile.R, samples)
    return np.array([elliptic_on_p(profile, k, l, point=r, gate_tol=gate_tol) for r in rr])


# ---------------------------------------------------------------------------
# maximum location scan


@dataclass(frozen=True)
class ExtremumReport:
    kind: str
    k: Optional[int]
    l: Optional[int]
    geometry: str
    interior_max: float
    boundary_max: float
    margin: float
    argmax: tuple
    argmax_on_boundary: bool
    min_FijPij: Optional[float]
    status: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmax"] = list(self.argmax)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _scan_values(P_int, P_bdy, X_int, X_bdy, tie_tol):
    imax, bmax = float(np.max(P_int)), float(np.max(P_bdy))
    on_bdy = bmax >= imax - tie_tol
    arg = X_bdy[int(np.argmax(P_bdy))] if on_bdy else X_int[int(np.argmax(P_int))]
    return imax, bmax, tuple(float(v) for v in arg), on_bdy


def extremum_scan(f, kind, domain=None, k: Optional[int] = None, l: Optional[int] = None,
                  resolution: int = 64, tie_tol: float = 1e-9) -> ExtremumReport:
    """Compare the maximum of P over interior samples with its boundary maximum.

    ``margin = boundary max - interior max``. When ``k, l`` are given the
    field is tested against the quotient equation at the interior samples;
    failures are reported with status ``"not-a-solution"`` (the scan still
    runs, but no maximum-principle claim attaches to it). Without ``k, l``
    the status is ``"unchecked"``.
    """
    kind = PKind(kind)
    geom = GEOMETRY_OF_KIND[kind]
    from .dirichlet import SolveResult

    if isinstance(f, SolveResult):
        from .dirichlet import p_samples, elliptic_on_p_grid

        if kind is not PKind.EUCLID:
            raise ValueError("Dirichlet solutions carry the euclidean P-function only")
        X_int, P_int, X_bdy, P_bdy = p_samples(f)
        imax, bmax, arg, on_bdy = _scan_values(P_int, P_bdy, X_int, X_bdy, tie_tol)
        vals = elliptic_on_p_grid(f)
        return ExtremumReport(kind.value, f.k, f.l, geom.value, imax, bmax, bmax - imax, arg, on_bdy,
                              float(np.min(vals)), "solution" if f.converged else "not-a-solution")

    if domain is None:
        raise ValueError("a StarDomain is required for grid or analytic fields")
    if geom is GeometryTag.HYPERBOLIC:
        raise ValueError("hyperbolic scans run on radial profiles")
    from .integral import build_quadrature

    rule = build_quadrature(domain, resolution)
    X_int, X_bdy = rule.nodes, rule.boundary_nodes
    u_i, g_i, H_i = f.jet(X_int)
    u_b, g_b, _ = f.jet(X_bdy)
    P_int = np.asarray(evaluate_p(kind, u_i, g_i))
    P_bdy = np.asarray(evaluate_p(kind, u_b, g_b))
    imax, bmax, arg, on_bdy = _scan_values(P_int, P_bdy, X_int, X_bdy, tie_tol)

    status, min_fp = "unchecked", None
    if k is not None and l is not None:
        M = operator_from_jet(g_i, H_i, u_i, geom)
        S = symfunc.sym_all_batch(M)
        q = quotient_constant(f.dim, k, l)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(S[:, k] / S[:, l] - q) / q
        ok = np.all(rel <= EQUATION_GATE) and np.all(S[:, 1 : k + 1] > 0)
        status = "solution" if ok else "not-a-solution"
        if ok:
            # interior subset away from the boundary keeps the P stencil inside the domain
            r_dom = domain.radius_at(X_int)
            r_pt = np.linalg.norm(X_int - domain.center, axis=1)
            inner = r_pt <= 0.9 * r_dom
            vals = [elliptic_on_p(f, k, l, geom, x) if not isinstance(f, ScalarField)
                    else _elliptic_grid(f.jet, f.dim, x, k, l, geom, EQUATION_GATE, np.asarray(f.spacing))
                    for x in X_int[inner]]
            min_fp = float(np.min(vals))
    return ExtremumReport(kind.value, k, l, geom.value, imax, bmax, bmax - imax, arg, on_bdy, min_fp, status)
