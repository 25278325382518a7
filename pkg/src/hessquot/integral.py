"""Quadrature on star-shaped domains and ledgers for integral identities.

A :class:`StarDomain` is described by its boundary radius ``rho(theta)``
around a center (2D) or by a ball radius (3D). :func:`build_quadrature`
maps a tensor rule (Gauss-Legendre in the radial variable, periodic
trapezoid in angle) onto the domain. Every identity verifier returns an
:class:`IdentityLedger` that lists each integral term separately, so a wrong
constant shows up as a specific term rather than as a bare failure.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import symfunc
from .fields import GeometryTag, operator_from_jet
from .radial import RadialProfile, quotient_constant, radial_spectrum

EQUATION_GATE = 1e-4
BOUNDARY_GATE = 1e-6


class DomainError(ValueError):
    """Degenerate or unsupported domain description."""


class IdentityGateError(ValueError):
    """A hypothesis of the identity (equation or boundary data) fails."""


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class StarDomain:
    """Domain bounded by r = rho(theta) about ``center`` (2D) or a ball (3D).

    ``drho`` and ``d2rho`` are the angular derivatives of ``rho``; for 3D
    domains only ``radius`` is used.
    """

    d: int
    center: tuple
    rho: Optional[Callable] = None
    drho: Optional[Callable] = None
    d2rho: Optional[Callable] = None
    radius: Optional[float] = None
    name: str = "star"

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DomainError("dimension must be 2 or 3")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != self.d:
            raise DomainError("center has the wrong dimension")
        if self.d == 3:
            if self.radius is None or not self.radius > 0:
                raise DomainError("3D domains are balls with a positive radius")
        else:
            if self.rho is None:
                raise DomainError("2D domains need a boundary radius function")
            th = np.linspace(0, 2 * np.pi, 721)
            r = np.asarray(self.rho(th), dtype=float)
            if not np.all(np.isfinite(r)) or np.min(r) <= 0:
                raise DomainError("boundary radius must be finite and positive")

    # -- constructors -------------------------------------------------------

    @classmethod
    def disk(cls, radius: float = 1.0, center=(0.0, 0.0)) -> "StarDomain":
        R = float(radius)
        return cls(
            2, center,
            lambda t: np.full_like(np.asarray(t, float), R),
            lambda t: np.zeros_like(np.asarray(t, float)),
            lambda t: np.zeros_like(np.asarray(t, float)),
            radius=R, name=f"disk(R={R})",
        )

    @classmethod
    def ellipse(cls, a: float, b: float, center=(0.0, 0.0)) -> "StarDomain":
        """Ellipse with semi-axes ``a`` (x) and ``b`` (y), polar about its center."""
        a, b = float(a), float(b)
        e = a * a - b * b

        def D(t):
            return b * b * np.cos(t) ** 2 + a * a * np.sin(t) ** 2

        def rho(t):
            return a * b / np.sqrt(D(t))

        def drho(t):
            return -0.5 * a * b * D(t) ** -1.5 * e * np.sin(2 * t)

        def d2rho(t):
            Dp = e * np.sin(2 * t)
            Dpp = 2 * e * np.cos(2 * t)
            return a * b * (0.75 * D(t) ** -2.5 * Dp * Dp - 0.5 * D(t) ** -1.5 * Dpp)

        return cls(2, center, rho, drho, d2rho, name=f"ellipse(a={a},b={b})")

    @classmethod
    def cos_perturbed(cls, eps: float, m: int, base: float = 1.0, center=(0.0, 0.0)) -> "StarDomain":
        """rho = base * (1 + eps cos(m theta))."""
        eps, base = float(eps), float(base)
        if abs(eps) >= 1:
            raise DomainError("|eps| must be < 1 for a star-shaped perturbation")
        return cls(
            2, center,
            lambda t: base * (1 + eps * np.cos(m * t)),
            lambda t: -base * eps * m * np.sin(m * t),
            lambda t: -base * eps * m * m * np.cos(m * t),
            name=f"cos(eps={eps},m={m})",
        )

    @classmethod
    def ball(cls, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> "StarDomain":
        return cls(3, center, radius=float(radius), name=f"ball(R={radius})")

    @classmethod
    def from_radius_function(cls, rho: Callable, center=(0.0, 0.0), step: float = 1e-3) -> "StarDomain":
        """2D domain from ``rho`` alone; derivatives by 4th-order central differences."""

        def drho(t):
            return (8 * (rho(t + step) - rho(t - step)) - (rho(t + 2 * step) - rho(t - 2 * step))) / (12 * step)

        def d2rho(t):
            return (
                16 * (rho(t + step) + rho(t - step)) - (rho(t + 2 * step) + rho(t - 2 * step)) - 30 * rho(t)
            ) / (12 * step * step)

        return cls(2, center, rho, drho, d2rho, name="custom")

    # -- geometry -----------------------------------------------------------

    def radius_at(self, X) -> np.ndarray:
        """Boundary radius in the direction of each point of ``X`` (m, d)."""
        Y = np.atleast_2d(X) - np.asarray(self.center)
        if self.d == 3:
            return np.full(len(Y), self.radius)
        return np.asarray(self.rho(np.arctan2(Y[:, 1], Y[:, 0])), dtype=float)

    def contains(self, X) -> np.ndarray:
        Y = np.atleast_2d(X) - np.asarray(self.center)
        return np.linalg.norm(Y, axis=1) < self.radius_at(X)

    def curvature(self, theta) -> np.ndarray:
        """Signed curvature of the boundary curve (positive for convex)."""
        if self.d != 2:
            raise DomainError("curve curvature is defined for 2D domains")
        r, r1, r2 = self.rho(theta), self.drho(theta), self.d2rho(theta)
        return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5


@dataclass(frozen=True)
class QuadratureRule:
    """Interior and boundary nodes with positive weights.

    ``order`` is the total polynomial degree integrated exactly on the disk.
    """

    nodes: np.ndarray
    weights: np.ndarray
    boundary_nodes: np.ndarray
    boundary_weights: np.ndarray
    normals: np.ndarray
    order: int
    resolution: int

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    @property
    def perimeter(self) -> float:
        return float(self.boundary_weights.sum())

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def integrate_boundary(self, values) -> float:
        return float(np.dot(self.boundary_weights, values))


def build_quadrature(dom: StarDomain, resolution: int, radial_nodes: Optional[int] = None) -> QuadratureRule:
    """Tensor rule in mapped polar (2D) or spherical (3D) coordinates.

    ``resolution`` is the number of azimuthal nodes; the radial Gauss rule
    uses ``max(8, resolution // 4)`` nodes unless given, and the 3D polar
    Gauss rule ``resolution // 2``.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16 angular nodes")
    nr = radial_nodes or max(8, resolution // 4)
    s, ws = np.polynomial.legendre.leggauss(nr)
    s, ws = 0.5 * (s + 1), 0.5 * ws
    c = np.asarray(dom.center)
    nth = int(resolution)
    th = 2 * np.pi * np.arange(nth) / nth
    dth = 2 * np.pi / nth
    if dom.d == 2:
        r, r1 = np.asarray(dom.rho(th), float), np.asarray(dom.drho(th), float)
        if np.min(r) <= 0 or not np.all(np.isfinite(r)):
            raise DomainError("degenerate boundary radius")
        e = np.stack([np.cos(th), np.sin(th)], axis=1)
        et = np.stack([-np.sin(th), np.cos(th)], axis=1)
        S, T = np.meshgrid(s, np.arange(nth), indexing="ij")
        X = c + (S * r[T])[..., None] * e[T]
        W = (ws[:, None] * S * r[T] ** 2) * dth
        speed = np.sqrt(r * r + r1 * r1)
        Xb = c + r[:, None] * e
        gam = (r[:, None] * e - r1[:, None] * et) / speed[:, None]
        Wb = speed * dth
        order = min(2 * nr - 2, nth - 1)
        return QuadratureRule(X.reshape(-1, 2), W.reshape(-1), Xb, Wb, gam, order, resolution)
    R = dom.radius
    npol = max(8, resolution // 2)
    mu, wmu = np.polynomial.legendre.leggauss(npol)
    sin_p = np.sqrt(1 - mu * mu)
    dirs = np.stack(
        [
            (sin_p[:, None] * np.cos(th)[None, :]),
            (sin_p[:, None] * np.sin(th)[None, :]),
            np.broadcast_to(mu[:, None], (npol, nth)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    wdir = (wmu[:, None] * np.full(nth, dth)[None, :]).reshape(-1)
    X = c + (R * s)[:, None, None] * dirs[None]
    W = (ws * (R * s) ** 2 * R)[:, None] * wdir[None, :]
    Xb = c + R * dirs
    Wb = R * R * wdir
    order = min(2 * nr - 3, 2 * npol - 1, nth - 1)
    return QuadratureRule(X.reshape(-1, 3), W.reshape(-1), Xb, Wb, dirs.copy(), order, resolution)


# ---------------------------------------------------------------------------
# ledgers


@dataclass(frozen=True)
class IdentityLedger:
    """Named terms of an identity whose signed sum should vanish."""

    identity: str
    params: dict
    terms: list
    resolution: Optional[int] = None
    variants: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return float(math.fsum(v for _, v in self.terms))

    @property
    def scale(self) -> float:
        return float(math.fsum(abs(v) for _, v in self.terms))

    @property
    def relative_residual(self) -> float:
        s = self.scale
        return abs(self.residual) / s if s > 0 else 0.0

    def term(self, name: str) -> float:
        for n, v in self.terms:
            if n == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = {
            "identity": self.identity,
            "params": dict(self.params),
            "terms": [{"name": n, "value": v} for n, v in self.terms],
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "resolution": self.resolution,
        }
        if self.variants:
            d["variants"] = self.variants
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _ledger(identity, params, terms, resolution=None, variants=None) -> IdentityLedger:
    return IdentityLedger(identity, params, [(n, float(v)) for n, v in terms], resolution, variants or {})


def _variant(terms) -> dict:
    total = math.fsum(terms)
    scale = math.fsum(abs(t) for t in terms)
    return {"residual": total, "relative_residual": abs(total) / scale if scale else 0.0}


# ---------------------------------------------------------------------------
# Minkowski formulas


def minkowski_residual(dom: StarDomain, k: int, resolution: int = 512) -> IdentityLedger:
    """Ledger for  int H_k/C(n-1,k) x.gamma  -  int H_{k-1}/C(n-1,k-1)  over the boundary."""
    n = dom.d
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..{n - 1}")
    rule = build_quadrature(dom, resolution)
    xg = np.einsum("md,md->m", rule.boundary_nodes, rule.normals)
    if n == 2:
        th = 2 * np.pi * np.arange(resolution) / resolution
        kappa = dom.curvature(th)
        H = [np.ones_like(kappa), kappa]
    else:
        kap = np.full((len(rule.boundary_weights), 2), 1.0 / dom.radius)
        S = symfunc.kernels.elem_sym_batch(kap)
        H = [S[:, j] for j in range(3)]
    lhs = rule.integrate_boundary(H[k] / symfunc.binom(n - 1, k) * xg)
    rhs = rule.integrate_boundary(H[k - 1] / symfunc.binom(n - 1, k - 1))
    return _ledger("minkowski", {"n": n, "k": k, "domain": dom.name},
                   [("H_k x.gamma", lhs), ("-H_{k-1}", -rhs)], resolution)


def minkowski_hyperbolic_sphere(R: float, n: int, k: int) -> IdentityLedger:
    """Hyperbolic Minkowski formula on a geodesic sphere of radius R (closed form).

    Principal curvatures are all coth R, V = cosh R, V_gamma = sinh R, and
    the common area factor cancels.
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..{n - 1}")
    lhs = (1.0 / math.tanh(R)) ** k * math.sinh(R)
    rhs = (1.0 / math.tanh(R)) ** (k - 1) * math.cosh(R)
    return _ledger("minkowski_hyperbolic_sphere", {"n": n, "k": k, "R": R},
                   [("H_k V_gamma", lhs), ("-H_{k-1} V", -rhs)])


# ---------------------------------------------------------------------------
# field evaluation at nodes


def _S(S: np.ndarray, j: int) -> np.ndarray:
    # S_{-1} = 0 convention
    if j < 0:
        return np.zeros(S.shape[0])
    return S[:, j]


def _G(G: np.ndarray, j: int) -> np.ndarray:
    if j <= 0:
        return np.zeros((G.shape[0],) + G.shape[2:])
    return G[:, j]


def _evaluate(f, X, geom, kmax):
    u, g, H = f.jet(X)
    M = operator_from_jet(g, H, u, geom)
    S = symfunc.sym_all_batch(M)
    G = symfunc.sk_gradients_batch(M, kmax, S)
    return u, g, H, M, S, G


def _equation_gate(S, n, k, l, tol=EQUATION_GATE):
    q = quotient_constant(n, k, l)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(S[:, k] / S[:, l] - q) / q
    worst = float(np.nanmax(rel)) if rel.size else 0.0
    if not np.all(np.isfinite(rel)) or worst > tol:
        raise IdentityGateError(f"quotient equation fails: relative residual {worst:.3e} > {tol:.1e}")


def _dirichlet_gate(ub, tol=BOUNDARY_GATE):
    worst = float(np.max(np.abs(ub)))
    if worst > tol:
        raise IdentityGateError(f"u does not vanish on the boundary: max |u| = {worst:.3e}")


def _neumann_gate(g_b, normals, target=None, tol=BOUNDARY_GATE):
    ug = np.einsum("md,md->m", g_b, normals)
    ref = float(np.mean(ug)) if target is None else target
    worst = float(np.max(np.abs(ug - ref)))
    if worst > tol * max(1.0, abs(ref)):
        raise IdentityGateError(f"normal derivative not constant on the boundary: spread {worst:.3e}")
    return ref


def _check_params(n, k, l):
    if not 0 <= l < k <= n:
        raise ValueError(f"need 0 <= l < k <= n, got (n,k,l)=({n},{k},{l})")


def pohozaev_euclid(f, dom: StarDomain, k: int, l: int, resolution: int = 512,
                    gate: bool = True) -> IdentityLedger:
    """Five-term Rellich-Pohozaev ledger for S_k = (C_n^k/C_n^l) S_l, u = 0 on the boundary."""
    n = dom.d
    _check_params(n, k, l)
    rule = build_quadrature(dom, resolution)
    u, g, _, _, S, _ = _evaluate(f, rule.nodes, GeometryTag.EUCLIDEAN, k)
    ub, gb, _, _, Sb, Gb = _evaluate(f, rule.boundary_nodes, GeometryTag.EUCLIDEAN, k)
    if gate:
        _equation_gate(S, n, k, l)
        _dirichlet_gate(ub)
    cnk, cnl = symfunc.binom(n, k), symfunc.binom(n, l)
    du2 = np.einsum("md,md->m", g, g)
    du2b = np.einsum("md,md->m", gb, gb)
    X, gam = rule.boundary_nodes, rule.normals

    def flux(Gj):
        return rule.integrate_boundary(np.einsum("mij,mi,mj->m", Gj, X, gam) * du2b)

    terms = [
        ("(n-k+1)C_n^l int S_{k-1}|Du|^2", (n - k + 1) * cnl * rule.integrate(_S(S, k - 1) * du2)),
        ("-(n-l+1)C_n^k int S_{l-1}|Du|^2", -(n - l + 1) * cnk * rule.integrate(_S(S, l - 1) * du2)),
        ("-C_n^l bdry S_k^{ij}|Du|^2 x_i gamma_j", -cnl * flux(_G(Gb, k))),
        ("+C_n^k bdry S_l^{ij}|Du|^2 x_i gamma_j", cnk * flux(_G(Gb, l))),
        ("-2(k-l)C_n^l int S_k u", -2 * (k - l) * cnl * rule.integrate(S[:, k] * u)),
    ]
    return _ledger("pohozaev_euclid", {"n": n, "k": k, "l": l}, terms, resolution)


def boundary_conversion_residuals(f, dom: StarDomain, k: int, resolution: int = 512,
                                  gate: bool = True) -> dict:
    """Pointwise boundary identity and its integrated form.

    * pointwise: S_k^{ij} x_j gamma_i |Du|^2 - S_k^{ij} u_i u_j x.gamma, max over
      boundary nodes;
    * integrated: int S_k^{ij} u_i u_j x.gamma = u_gamma^2 (n-k+1) int S_{k-1},
      where u_gamma is the (constant) normal derivative; the unit case is the
      familiar form. ``coefficient_measured`` is lhs / (u_gamma^2 int S_{k-1}),
      to be compared with ``coefficient_expected`` = n - k + 1.
    """
    n = dom.d
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    rule = build_quadrature(dom, resolution)
    ub, gb, _, _, Sb, Gb = _evaluate(f, rule.boundary_nodes, GeometryTag.EUCLIDEAN, k)
    X, gam = rule.boundary_nodes, rule.normals
    if gate:
        _dirichlet_gate(ub)
        ug = _neumann_gate(gb, gam)
    else:
        ug = float(np.mean(np.einsum("md,md->m", gb, gam)))
    Gk = Gb[:, k]
    xg = np.einsum("md,md->m", X, gam)
    du2 = np.einsum("md,md->m", gb, gb)
    left = np.einsum("mij,mj,mi->m", Gk, X, gam) * du2
    right = np.einsum("mij,mi,mj->m", Gk, gb, gb) * xg
    pointwise = float(np.max(np.abs(left - right)))
    _, _, _, _, S, _ = _evaluate(f, rule.nodes, GeometryTag.EUCLIDEAN, k)
    lhs = rule.integrate_boundary(right)
    rhs = ug * ug * (n - k + 1) * rule.integrate(_S(S, k - 1))
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    base = ug * ug * rule.integrate(_S(S, k - 1))
    return {
        "coefficient_measured": lhs / base if base else math.nan,
        "coefficient_expected": n - k + 1,
        "k": k,
        "n": n,
        "pointwise_residual": pointwise,
        "pointwise_scale": float(np.max(np.abs(left))),
        "integrated_lhs": lhs,
        "integrated_rhs": rhs,
        "integrated_relative_residual": rel,
        "normal_derivative": ug,
        "resolution": resolution,
    }


def pohozaev_hyper(profile: RadialProfile, R: Optional[float], k: int, l: int,
                   resolution: int = 256, gate: bool = True) -> IdentityLedger:
    """Hyperbolic ledger with weight V = cosh r on the geodesic ball of radius R.

    All integrands are radial, so each volume integral reduces to
    |S^{n-1}| int_0^R (.) sinh^{n-1} r dr and each boundary integral to the
    radial entry of S^{ij} times |S^{n-1}| sinh^{n-1} R. Besides the
    correctly signed identity the ledger lists, as a variant, the boundary
    coefficients -C_n^l, -C_n^k so the two can be compared.
    """
    if profile.geometry is not GeometryTag.HYPERBOLIC:
        raise ValueError("profile must carry the hyperbolic geometry tag")
    n = profile.n
    _check_params(n, k, l)
    R = profile.R if R is None else float(R)
    x, wx = np.polynomial.legendre.leggauss(resolution)
    r = 0.5 * R * (x + 1)
    wr = 0.5 * R * wx
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    u, du, _ = profile.eval(r)
    lam = radial_spectrum(profile, r)
    S = symfunc.kernels.elem_sym_batch(lam)
    if gate:
        _equation_gate(S, n, k, l)
        ub = profile.eval(np.array([R]))[0]
        _dirichlet_gate(ub)
    cnk, cnl = symfunc.binom(n, k), symfunc.binom(n, l)
    V = np.cosh(r)
    vol = area * wr * np.sinh(r) ** (n - 1)
    J = lambda j: float(np.dot(vol, _S(S, j) * (du * du - u * u) * V))  # noqa: E731

    uR, duR, _ = (float(np.asarray(a).reshape(-1)[0]) for a in profile.eval(np.array([R])))
    lamR = radial_spectrum(profile, np.array([R]))[0]
    tang = symfunc.elem_sym_all(lamR[1:]) if n > 1 else np.array([1.0])

    def B(j):
        # radial entry of S_j^{ij} is S_{j-1} of the tangential eigenvalues
        if j <= 0:
            return 0.0
        return tang[j - 1] * duR * duR * math.sinh(R) * area * math.sinh(R) ** (n - 1)

    Su = float(np.dot(vol, S[:, k] * u * V))
    interior = [
        ("(n-k+1)/2 C_n^l int S_{k-1}(|Du|^2-u^2)V", 0.5 * (n - k + 1) * cnl * J(k - 1)),
        ("-(n-l+1)/2 C_n^k int S_{l-1}(|Du|^2-u^2)V", -0.5 * (n - l + 1) * cnk * J(l - 1)),
        ("-(k-l)C_n^l int S_k u V", -(k - l) * cnl * Su),
    ]
    boundary = [
        ("-1/2 C_n^l bdry S_k^{ij}|Du|^2 V_i gamma_j", -0.5 * cnl * B(k)),
        ("+1/2 C_n^k bdry S_l^{ij}|Du|^2 V_i gamma_j", 0.5 * cnk * B(l)),
    ]
    printed = [v for _, v in interior] + [-cnl * B(k), -cnk * B(l)]
    terms = interior[:2] + boundary + interior[2:]
    return _ledger("pohozaev_hyper", {"n": n, "k": k, "l": l, "R": R}, terms, resolution,
                   {"boundary_coefficients_-C_n^l_-C_n^k": _variant(printed)})


def pohozaev_curv(f, dom: StarDomain, k: int, l: int, resolution: int = 512,
                  gate: bool = True) -> IdentityLedger:
    """Ledger for the graph-curvature quotient equation with u = 0 on the boundary.

    The ``variants`` entry evaluates the same terms with both boundary signs
    flipped, and ``boundary_flux_identity`` compares int S_k^{ij} x_j gamma_i / w with
    (n-k+1)/sqrt(2) int S_{k-1} (valid when u_gamma = 1).
    """
    n = dom.d
    _check_params(n, k, l)
    geom = GeometryTag.GRAPH
    rule = build_quadrature(dom, resolution)
    u, g, _, _, S, _ = _evaluate(f, rule.nodes, geom, k)
    ub, gb, _, _, Sb, Gb = _evaluate(f, rule.boundary_nodes, geom, k)
    X, gam = rule.boundary_nodes, rule.normals
    if gate:
        _equation_gate(S, n, k, l)
        _dirichlet_gate(ub, EQUATION_GATE)
    cnk, cnl = symfunc.binom(n, k), symfunc.binom(n, l)
    w = np.sqrt(1 + np.einsum("md,md->m", g, g))
    wb = np.sqrt(1 + np.einsum("md,md->m", gb, gb))

    def flux(Gj):
        return rule.integrate_boundary(np.einsum("msi,ms,mi->m", Gj, X, gam) / wb)

    b_k, b_l = flux(_G(Gb, k)), flux(_G(Gb, l))
    terms = [
        ("C_n^l bdry S_k^{si} x_s gamma_i / w", cnl * b_k),
        ("-C_n^k bdry S_l^{si} x_s gamma_i / w", -cnk * b_l),
        ("-(k-l)C_n^l int u S_k", -(k - l) * cnl * rule.integrate(u * S[:, k])),
        ("-(n-k+1)C_n^l int S_{k-1}/w", -(n - k + 1) * cnl * rule.integrate(_S(S, k - 1) / w)),
        ("+(n-l+1)C_n^k int S_{l-1}/w", (n - l + 1) * cnk * rule.integrate(_S(S, l - 1) / w)),
    ]
    flipped = [-terms[0][1], -terms[1][1]] + [v for _, v in terms[2:]]
    flux_lhs = flux(Gb[:, k])
    flux_rhs = (n - k + 1) / math.sqrt(2) * rule.integrate(_S(S, k - 1))
    variants = {
        "boundary_signs_flipped": _variant(flipped),
        "boundary_flux_identity": {
            "lhs": flux_lhs,
            "rhs": flux_rhs,
            "relative_residual": abs(flux_lhs - flux_rhs) / max(abs(flux_lhs), 1e-300),
            "max_abs_w_minus_sqrt2": float(np.max(np.abs(wb - math.sqrt(2)))),
        },
    }
    return _ledger("pohozaev_curv", {"n": n, "k": k, "l": l}, terms, resolution, variants)


def observed_orders(resolutions, residuals) -> list[float]:
    """log2 ratios of successive residuals (resolutions assumed to double)."""
    out = []
    for a, b in zip(residuals[:-1], residuals[1:]):
        out.append(math.log2(abs(a) / abs(b)) if a and b else math.inf)
    return out


def converges_at_order(residuals, order: float = 2.0, floor: float = 1e-12) -> bool:
    """Each doubling cuts the residual by 2**order, unless both sit below ``floor``."""
    for a, b in zip(residuals[:-1], residuals[1:]):
        if abs(b) <= floor:
            continue
        if abs(b) > abs(a) / 2**order:
            return False
    return True
