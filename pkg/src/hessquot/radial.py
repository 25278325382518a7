"""Radial reductions of the three quotient operators.

For u = u(r) every operator matrix has one radial eigenvalue and one
tangential eigenvalue of multiplicity n - 1:

========== ======================= =============================
geometry   radial                  tangential
========== ======================= =============================
euclid     u''                     u'/r
hyper      u'' - u                 u' coth r - u   (of D2u - u I)
graph      u''/w^3                 u'/(r w),  w = sqrt(1 + u'^2)
========== ======================= =============================

Given the tangential value t, S_k(a, t, ..., t) is affine in a, so the
quotient equation fixes the radial eigenvalue in closed form and the radial
problem becomes an explicit second-order ODE. ``solve_radial`` integrates it
outward from the center with the compiled RK4 kernel.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import BPoly
from scipy.optimize import brentq

from . import symfunc
from ._backend import kernels
from .fields import GeometryTag, as_geometry

STEP = 1e-4
R_MAX_LIMIT = 64.0
EXPLICIT_TOL = 1e-10

_GEOM_CODE = {
    GeometryTag.EUCLIDEAN: 0,
    GeometryTag.HYPERBOLIC: 1,
    GeometryTag.GRAPH: 2,
}

_STATUS_TEXT = {
    1: "no admissible root for the radial eigenvalue",
    2: "radial spectrum left the admissible cone",
    3: "Neumann target not reached before the radius cap",
    4: "integration blew up",
}


class RadialSolveError(RuntimeError):
    """The radial ODE could not reach the requested Neumann value."""


def quotient_constant(n: int, k: int, l: int) -> float:
    return symfunc.binom(n, k) / symfunc.binom(n, l)


def check_indices(n: int, k: int, l: int) -> None:
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not 0 <= l < k <= n:
        raise ValueError(f"need 0 <= l < k <= n, got (n, k, l) = ({n}, {k}, {l})")


@dataclass(frozen=True)
class RadialProfile:
    """A radial function u(r) on [0, R] with its first two derivatives.

    Samples are always stored; if ``exact`` holds closed-form callables
    ``(u, u', u'')`` evaluation uses them, otherwise a quintic Hermite
    interpolant through the samples.
    """

    geometry: GeometryTag
    n: int
    R: float
    c: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    k: Optional[int] = None
    l: Optional[int] = None
    exact: Optional[tuple[Callable, Callable, Callable]] = field(default=None, repr=False)

    @property
    def q(self) -> float:
        return quotient_constant(self.n, self.k, self.l)

    def _interp(self) -> BPoly:
        cache = self.__dict__.get("_bpoly")
        if cache is None:
            cache = _quintic_hermite(self.r, self.u, self.du, self.d2u)
            object.__setattr__(self, "_bpoly", cache)
        return cache

    def eval(self, r) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """u, u', u'' at radii ``r`` (array-like, inside [0, R])."""
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < -1e-14) or np.any(r > self.R * (1 + 1e-12) + 1e-14):
            raise ValueError("radius outside [0, R]")
        if self.exact is not None:
            f, df, d2f = self.exact
            return f(r), df(r), d2f(r)
        p = self._interp()
        return p(r), p(r, 1), p(r, 2)

    def spectrum(self, r) -> np.ndarray:
        return radial_spectrum(self, r)

    def in_cone(self, k: int, samples: int = 2001) -> bool:
        rr = np.linspace(0.0, self.R, samples)
        lam = radial_spectrum(self, rr)
        S = kernels.elem_sym_batch(lam)
        return bool(np.all(S[:, 1 : k + 1] > 0))

    def to_csv(self, path=None, samples: Optional[int] = None) -> str:
        """CSV with columns r, u, du, d2u, lambda_1..lambda_n."""
        rr = self.r if samples is None else np.linspace(0.0, self.R, samples)
        u, du, d2u = self.eval(rr)
        lam = radial_spectrum(self, rr)
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["r", "u", "du", "d2u"] + [f"lambda_{i + 1}" for i in range(self.n)])
        for row in zip(rr, u, du, d2u, lam):
            wr.writerow([repr(float(x)) for x in row[:4]] + [repr(float(x)) for x in row[4]])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _quintic_hermite(x, y, dy, d2y) -> BPoly:
    """Piecewise quintic matching value, slope and curvature at every node.

    Bernstein coefficients follow from p'(0) = 5(b1 - b0)/h and
    p''(0) = 20(b2 - 2 b1 + b0)/h^2 at each end of an interval.
    """
    h = np.diff(x)
    y0, y1 = y[:-1], y[1:]
    c = np.empty((6, h.size))
    c[0] = y0
    c[1] = y0 + h * dy[:-1] / 5
    c[2] = y0 + 2 * h * dy[:-1] / 5 + h * h * d2y[:-1] / 20
    c[3] = y1 - 2 * h * dy[1:] / 5 + h * h * d2y[1:] / 20
    c[4] = y1 - h * dy[1:] / 5
    c[5] = y1
    return BPoly(c, x)


def radial_spectrum(p: RadialProfile, r) -> np.ndarray:
    """Eigenvalues of the geometry's operator at radius ``r``; shape (n,) or (m, n).

    The radial eigenvalue comes first. At r = 0 the tangential ratio takes its
    limit u'/r -> u''(0).
    """
    scalar = np.ndim(r) == 0
    rr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    u, du, d2u = (np.atleast_1d(x) for x in p.eval(rr))
    zero = rr == 0
    safe = np.where(zero, 1.0, rr)
    geom = p.geometry
    if geom is GeometryTag.EUCLIDEAN:
        rad = d2u
        tan = np.where(zero, d2u, du / safe)
    elif geom is GeometryTag.HYPERBOLIC:
        rad = d2u - u
        tan = np.where(zero, d2u, du / np.tanh(safe)) - u
    else:
        w = np.sqrt(1.0 + du * du)
        rad = d2u / w**3
        tan = np.where(zero, d2u, du / (safe * w))
    lam = np.empty((rr.size, p.n))
    lam[:, 0] = rad
    lam[:, 1:] = tan[:, None]
    return lam[0] if scalar else lam


def _dedupe(r, u, du, d2u, h):
    # the bisection-shortened last step can land on top of the previous node
    if len(r) >= 3 and r[-1] - r[-2] < 1e-6 * h:
        keep = np.r_[np.arange(len(r) - 2), len(r) - 1]
        return r[keep], u[keep], du[keep], d2u[keep]
    return r, u, du, d2u


def _integrate(code, n, k, l, q, u0, target, h):
    r_max = 2.0
    while True:
        r, u, du, d2u, status = kernels.integrate_radial(code, n, k, l, q, u0, target, h, r_max)
        if status == 3 and r_max < R_MAX_LIMIT:
            r_max *= 2
            continue
        return r, u, du, d2u, status


def solve_radial(geom, n: int, k: int, l: int, c: float, h: float = STEP) -> RadialProfile:
    """Radial solution of S_k = (C_n^k / C_n^l) S_l with u(R) = 0, u'(R) = c.

    Euclidean and graph problems are translation invariant in u, so a single
    integration from u(0) = 0 to the slope target followed by a shift
    suffices. The hyperbolic problem is not: it is solved by shooting on
    u(0) in (-1, 0), integrating to the zero of u and matching u'(R) = c.
    """
    geom = as_geometry(geom)
    check_indices(n, k, l)
    c = float(c)
    if not c > 0:
        raise ValueError("Neumann constant c must be positive")
    if geom is GeometryTag.HYPERBOLIC and c >= 1:
        raise RadialSolveError("hyperbolic Neumann constant must satisfy c < 1 (u'(R) = tanh R < 1)")
    q = quotient_constant(n, k, l)
    code = _GEOM_CODE[geom]

    if geom is not GeometryTag.HYPERBOLIC:
        r, u, du, d2u, status = _integrate(code, n, k, l, q, 0.0, c, h)
        if status:
            raise RadialSolveError(_STATUS_TEXT.get(status, f"status {status}"))
        r, u, du, d2u = _dedupe(r, u, du, d2u, h)
        u = u - u[-1]
        return RadialProfile(geom, n, float(r[-1]), c, r, u, du, d2u, k=k, l=l)

    def mismatch(u0):
        r, u, du, d2u, status = _integrate(code, n, k, l, q, u0, 0.0, h)
        if status:
            raise RadialSolveError(_STATUS_TEXT.get(status, f"status {status}"))
        return du[-1] - c

    # u'(R) decreases from 1 to 0 as u(0) sweeps (-1, 0)
    lo, hi = -0.5, -0.5
    while mismatch(lo) < 0:
        lo = -1 + (lo + 1) / 8
        if lo + 1 < 1e-12:
            raise RadialSolveError("could not bracket the hyperbolic shooting parameter")
    while mismatch(hi) > 0:
        hi = hi / 8
        if -hi < 1e-12:
            raise RadialSolveError("could not bracket the hyperbolic shooting parameter")
    if lo == hi:
        u0 = lo
    else:
        u0 = brentq(mismatch, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    r, u, du, d2u, status = _integrate(code, n, k, l, q, u0, 0.0, h)
    r, u, du, d2u = _dedupe(r, u, du, d2u, h)
    u = u.copy()
    u[-1] = 0.0
    return RadialProfile(geom, n, float(r[-1]), c, r, u, du, d2u, k=k, l=l)


# ---------------------------------------------------------------------------
# closed-form solutions


def explicit_profile(geom, n: int, c: Optional[float] = None, k=None, l=None) -> RadialProfile:
    """Closed-form ball solution of each geometry.

    * euclid: u = (r^2 - 1)/2 on the unit ball (slope 1 at the boundary);
    * hyper: u = cosh r / cosh R - 1 on the geodesic ball R = artanh c;
    * graph: u = -sqrt(1 - r^2) + 1/sqrt(2) on the ball of radius 1/sqrt(2).
    """
    geom = as_geometry(geom)
    if geom is GeometryTag.EUCLIDEAN:
        R, cc = 1.0, 1.0
        f = (lambda r: 0.5 * (r * r - 1.0), lambda r: r * 1.0, lambda r: np.ones_like(r))
    elif geom is GeometryTag.HYPERBOLIC:
        cc = 0.5 if c is None else float(c)
        if not 0 < cc < 1:
            raise ValueError("hyperbolic Neumann constant must lie in (0, 1)")
        R = math.atanh(cc)
        A = 1.0 / math.cosh(R)
        f = (lambda r: A * np.cosh(r) - 1.0, lambda r: A * np.sinh(r), lambda r: A * np.cosh(r))
    else:
        R, cc = 1.0 / math.sqrt(2.0), 1.0
        f = (
            lambda r: -np.sqrt(1.0 - r * r) + 1.0 / math.sqrt(2.0),
            lambda r: r / np.sqrt(1.0 - r * r),
            lambda r: (1.0 - r * r) ** -1.5,
        )
    rr = np.linspace(0.0, R, 1025)
    with np.errstate(invalid="ignore"):
        samples = [np.asarray(g(rr), dtype=np.float64) for g in f]
    return RadialProfile(geom, n, R, cc, rr, *samples, k=k, l=l, exact=f)


@dataclass(frozen=True)
class ExplicitReport:
    geometry: str
    n: int
    k: int
    l: int
    c: float
    R: float
    equation_residual: float
    boundary_value: float
    boundary_slope_error: float
    p_value: float
    p_spread: float
    p_expected: float
    in_cone: bool
    tol: float
    alternate_p_spread: Optional[float] = None

    @property
    def passed(self) -> bool:
        errs = (
            self.equation_residual,
            abs(self.boundary_value),
            self.boundary_slope_error,
            self.p_spread,
            abs(self.p_value - self.p_expected),
        )
        return self.in_cone and max(errs) <= self.tol

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def p_along(profile: RadialProfile, r) -> np.ndarray:
    """Geometry-matched P-function along a radial profile."""
    from .pfunc import PKind, evaluate_p

    kind = {
        GeometryTag.EUCLIDEAN: PKind.EUCLID,
        GeometryTag.HYPERBOLIC: PKind.HYPER,
        GeometryTag.GRAPH: PKind.CURV,
    }[profile.geometry]
    u, du, _ = profile.eval(r)
    return evaluate_p(kind, u, np.asarray(du)[..., None])


def expected_p(geom, c: float) -> float:
    geom = as_geometry(geom)
    if geom is GeometryTag.EUCLIDEAN:
        return 1.0
    if geom is GeometryTag.HYPERBOLIC:
        return c * c  # tanh^2 R
    return 1.0 / math.sqrt(2.0)


def verify_explicit(geom, n: int, k: int, l: int, c: Optional[float] = None,
                    samples: int = 4001, tol: float = EXPLICIT_TOL) -> ExplicitReport:
    """Substitute the closed-form ball solution into the radial operator."""
    check_indices(n, k, l)
    prof = explicit_profile(geom, n, c, k, l)
    rr = np.linspace(0.0, prof.R, samples)
    lam = radial_spectrum(prof, rr)
    S = kernels.elem_sym_batch(lam)
    q = quotient_constant(n, k, l)
    eq = np.max(np.abs(S[:, k] / S[:, l] - q)) / q
    u, du, _ = prof.eval(np.array([prof.R]))
    P = p_along(prof, rr)
    pexp = expected_p(prof.geometry, prof.c)
    return ExplicitReport(
        geometry=prof.geometry.value,
        n=n,
        k=k,
        l=l,
        c=prof.c,
        R=prof.R,
        equation_residual=float(eq),
        boundary_value=float(u[0]),
        boundary_slope_error=float(abs(du[0] - prof.c)),
        p_value=float(np.mean(P)),
        p_spread=float(np.max(P) - np.min(P)),
        p_expected=pexp,
        in_cone=bool(np.all(S[:, 1 : k + 1] > 0)),
        tol=tol,
        alternate_p_spread=_half_plus_u_spread(prof, rr),
    )


def _half_plus_u_spread(prof: RadialProfile, rr) -> Optional[float]:
    """Spread of 1/2 + u on the graph solution, reported next to the 1/w + u value.

    Only the 1/w + u form is constant there; the spread of the other form is
    kept so any reader can see the two disagree.
    """
    if prof.geometry is not GeometryTag.GRAPH:
        return None
    u = prof.eval(rr)[0]
    return float(np.max(u) - np.min(u))


def report_json(obj) -> str:
    return json.dumps(obj.to_dict() if hasattr(obj, "to_dict") else obj, sort_keys=True, indent=2)
