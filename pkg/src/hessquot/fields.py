"""Finite-difference calculus on sampled scalar fields.

A :class:`ScalarField` is a function sampled on a uniform tensor grid over a
box in 2 or 3 dimensions. Derivatives use second-order central stencils; the
discrete Hessian is symmetric by construction. :class:`AnalyticField` offers
the same ``jet`` interface for closed-form functions so integral verifiers can
consume either.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Callable

import numpy as np

from . import symfunc

EPS_GRAD = 1e-8


class GeometryTag(str, enum.Enum):
    EUCLIDEAN = "euclidean_hessian"
    HYPERBOLIC = "hyperbolic_hessian"
    GRAPH = "graph_curvature"


def as_geometry(geom) -> GeometryTag:
    if isinstance(geom, GeometryTag):
        return geom
    aliases = {"euclid": "euclidean_hessian", "hyper": "hyperbolic_hessian", "graph": "graph_curvature",
               "curv": "graph_curvature"}
    return GeometryTag(aliases.get(geom, geom))


class StencilError(ValueError):
    """Point too close to the box edge for the requested stencil."""


class VanishingGradientError(ValueError):
    """Level-set quantity requested where |Du| is (numerically) zero."""


# ---------------------------------------------------------------------------
# pointwise algebra shared by grid and analytic fields


def operator_from_jet(grad: np.ndarray, hess: np.ndarray, u: np.ndarray | None, geom) -> np.ndarray:
    """Operator matrices for a batch of points; inputs shaped (m, d), (m, d, d)."""
    geom = as_geometry(geom)
    if geom is GeometryTag.EUCLIDEAN:
        return hess
    if geom is GeometryTag.HYPERBOLIC:
        # only meaningful in the hyperbolic metric; radial module owns that route
        raise ValueError("hyperbolic Hessian is evaluated through radial profiles only")
    w = np.sqrt(1.0 + np.einsum("mi,mi->m", grad, grad))
    Hg = np.einsum("mkj,mk->mj", hess, grad)
    return hess / w[:, None, None] - grad[:, :, None] * Hg[:, None, :] / w[:, None, None] ** 3


def _sym_and_grads(M: np.ndarray, kmax: int):
    S = symfunc.sym_all_batch(M)
    G = symfunc.sk_gradients_batch(M, kmax, S)
    return S, G


# ---------------------------------------------------------------------------
# grid field


@dataclass(frozen=True)
class ScalarField:
    """Samples of a function on a uniform grid.

    ``values[i1, ..., id]`` sits at ``origin + (i1*h1, ..., id*hd)``.
    """

    values: np.ndarray
    spacing: tuple[float, ...]
    origin: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if v.ndim not in (2, 3):
            raise ValueError("ScalarField supports dimension 2 or 3")
        if len(self.spacing) != v.ndim or len(self.origin) != v.ndim:
            raise ValueError("spacing/origin length must match the grid dimension")
        if min(v.shape) < 5:
            raise ValueError("need at least 5 grid points per axis")
        if min(self.spacing) <= 0:
            raise ValueError("grid spacing must be positive")

    @classmethod
    def from_function(cls, func: Callable, lower, upper, shape) -> "ScalarField":
        """Sample ``func(X1, ..., Xd)`` on the closed box [lower, upper]."""
        lower, upper = np.asarray(lower, float), np.asarray(upper, float)
        axes = [np.linspace(a, b, n) for a, b, n in zip(lower, upper, shape)]
        grids = np.meshgrid(*axes, indexing="ij")
        with np.errstate(invalid="ignore"):
            vals = np.asarray(func(*grids), dtype=np.float64)
        spacing = tuple((b - a) / (n - 1) for a, b, n in zip(lower, upper, shape))
        return cls(np.broadcast_to(vals, tuple(shape)).copy(), spacing, tuple(lower))

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def coordinates(self) -> np.ndarray:
        """Node coordinates, shape (d, *grid_shape)."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"))

    # -- derivative fields (NaN where the stencil leaves the grid) ---------

    @cached_property
    def gradient_field(self) -> np.ndarray:
        v, d = self.values, self.dim
        g = np.full((d,) + v.shape, np.nan)
        core = tuple(slice(1, -1) for _ in range(d))
        for a in range(d):
            hi = tuple(slice(2, None) if b == a else slice(1, -1) for b in range(d))
            lo = tuple(slice(None, -2) if b == a else slice(1, -1) for b in range(d))
            g[(a,) + core] = (v[hi] - v[lo]) / (2 * self.spacing[a])
        return g

    @cached_property
    def hessian_field(self) -> np.ndarray:
        v, d = self.values, self.dim
        H = np.full((d, d) + v.shape, np.nan)
        core = tuple(slice(1, -1) for _ in range(d))

        def shifted(offsets):
            return v[tuple(slice(1 + o, v.shape[b] - 1 + o) for b, o in enumerate(offsets))]

        for a in range(d):
            e = [0] * d
            e[a] = 1
            m = [-x for x in e]
            H[(a, a) + core] = (shifted(e) - 2 * v[core] + shifted(m)) / self.spacing[a] ** 2
            for b in range(a + 1, d):
                def off(sa, sb):
                    o = [0] * d
                    o[a], o[b] = sa, sb
                    return shifted(o)

                # d_a d_b and d_b d_a coincide on the 4-point cross; average anyway
                dab = (off(1, 1) - off(1, -1) - off(-1, 1) + off(-1, -1)) / (
                    4 * self.spacing[a] * self.spacing[b]
                )
                dba = (off(1, 1) - off(-1, 1) - off(1, -1) + off(-1, -1)) / (
                    4 * self.spacing[a] * self.spacing[b]
                )
                H[(a, b) + core] = 0.5 * (dab + dba)
                H[(b, a) + core] = H[(a, b) + core]
        return H

    # -- point access -------------------------------------------------------

    def node_index(self, point, margin: int = 1) -> tuple[int, ...]:
        """Grid index of a node given by coordinates; enforces an edge margin."""
        p = np.asarray(point, dtype=np.float64)
        if p.shape != (self.dim,):
            raise ValueError(f"point must have {self.dim} coordinates")
        xi = (p - np.asarray(self.origin)) / np.asarray(self.spacing)
        idx = np.rint(xi).astype(int)
        if np.max(np.abs(xi - idx)) > 1e-6:
            raise ValueError(f"point {tuple(p)} is not a grid node")
        for i, n in zip(idx, self.shape):
            if i < margin or i > n - 1 - margin:
                raise StencilError(f"point {tuple(p)} is within {margin} cells of the box edge")
        return tuple(int(i) for i in idx)

    def node_coordinates(self, idx) -> np.ndarray:
        return np.asarray(self.origin) + np.asarray(idx) * np.asarray(self.spacing)

    def patch(self, idx, radius: int) -> tuple["ScalarField", tuple[int, ...]]:
        """Sub-field of ``radius`` nodes around ``idx`` and the index of ``idx`` in it."""
        lo = [i - radius for i in idx]
        for i, n in zip(idx, self.shape):
            if i - radius < 0 or i + radius > n - 1:
                raise StencilError("patch leaves the grid")
        sl = tuple(slice(a, a + 2 * radius + 1) for a in lo)
        origin = self.node_coordinates(lo)
        return ScalarField(self.values[sl], self.spacing, tuple(origin)), (radius,) * self.dim

    def jet(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(u, Du, D2u)`` at arbitrary points by local cubic interpolation.

        The derivative fields are interpolated with 4-point Lagrange weights
        per axis (exact on cubics); points must stay two cells inside.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        d = self.dim
        xi = (pts - np.asarray(self.origin)) / np.asarray(self.spacing)
        base = np.floor(xi).astype(int) - 1
        for a in range(d):
            if np.any(base[:, a] < 1) or np.any(base[:, a] + 3 > self.shape[a] - 2):
                raise StencilError("interpolation point too close to the box edge")
        t = xi - (base + 1)
        # Lagrange weights at nodes -1, 0, 1, 2 relative to floor(xi)
        w = np.stack(
            [
                -t * (t - 1) * (t - 2) / 6,
                (t + 1) * (t - 1) * (t - 2) / 2,
                -(t + 1) * t * (t - 2) / 2,
                (t + 1) * t * (t - 1) / 6,
            ],
            axis=-1,
        )  # (m, d, 4)
        m = pts.shape[0]
        u = np.zeros(m)
        g = np.zeros((m, d))
        H = np.zeros((m, d, d))
        gf = np.moveaxis(self.gradient_field, 0, -1)
        Hf = np.moveaxis(self.hessian_field, (0, 1), (-2, -1))
        for offs in product(range(4), repeat=d):
            wt = np.ones(m)
            for a, o in enumerate(offs):
                wt = wt * w[:, a, o]
            ind = tuple(base[:, a] + offs[a] for a in range(d))
            u += wt * self.values[ind]
            g += wt[:, None] * gf[ind]
            H += wt[:, None, None] * Hf[ind]
        return u, g, H

    # -- CSV ----------------------------------------------------------------

    def to_csv(self, path=None) -> str:
        """Write ``dims``/``spacing``/``origin`` header rows, then row-major values."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["dims", *self.shape])
        wr.writerow(["spacing", *[repr(h) for h in self.spacing]])
        wr.writerow(["origin", *[repr(o) for o in self.origin]])
        rows = self.values.reshape(-1, self.shape[-1])
        for row in rows:
            wr.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "ScalarField":
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        rows = list(csv.reader(io.StringIO(text)))
        head = {r[0]: r[1:] for r in rows[:3]}
        for key in ("dims", "spacing", "origin"):
            if key not in head:
                raise ValueError(f"missing '{key}' header row")
        dims = tuple(int(x) for x in head["dims"])
        vals = np.array([[float(x) for x in r] for r in rows[3:] if r], dtype=np.float64)
        return cls(
            vals.reshape(dims),
            tuple(float(x) for x in head["spacing"]),
            tuple(float(x) for x in head["origin"]),
        )


# ---------------------------------------------------------------------------
# closed-form fields


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form field: callables mapping points (m, d) to u, Du, D2u."""

    dim: int
    u: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def jet(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return self.u(pts), self.grad(pts), self.hess(pts)

    def scaled(self, c: float) -> "AnalyticField":
        return AnalyticField(
            self.dim,
            lambda p: c * self.u(p),
            lambda p: c * self.grad(p),
            lambda p: c * self.hess(p),
            name=f"{c}*{self.name}",
        )

    @classmethod
    def radial(cls, dim: int, f, df, d2f, name: str = "") -> "AnalyticField":
        """Field u(x) = f(|x|); ``df``/``d2f`` are the radial derivatives."""

        def u(p):
            return f(np.linalg.norm(p, axis=1))

        def grad(p):
            r = np.linalg.norm(p, axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                g = (df(r) / r)[:, None] * p
            g[r == 0] = 0.0
            return g

        def hess(p):
            r = np.linalg.norm(p, axis=1)
            eye = np.eye(dim)
            out = np.empty((len(p), dim, dim))
            zero = r == 0
            with np.errstate(invalid="ignore", divide="ignore"):
                e = p / r[:, None]
                t = df(r) / r
                rr = d2f(r)
                out[:] = t[:, None, None] * eye + (rr - t)[:, None, None] * e[:, :, None] * e[:, None, :]
            if np.any(zero):
                out[zero] = d2f(np.zeros(int(zero.sum())))[:, None, None] * eye
            return out

        return cls(dim, u, grad, hess, name=name)

    def sample(self, lower, upper, shape) -> ScalarField:
        """Sample onto a grid (NaN outside the function's domain)."""
        lower, upper = np.asarray(lower, float), np.asarray(upper, float)
        axes = [np.linspace(a, b, n) for a, b, n in zip(lower, upper, shape)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        with np.errstate(invalid="ignore"):
            vals = self.u(pts).reshape(tuple(shape))
        spacing = tuple((b - a) / (n - 1) for a, b, n in zip(lower, upper, shape))
        return ScalarField(vals, spacing, tuple(lower))


def explicit_euclid_field(dim: int, radius: float = 1.0) -> AnalyticField:
    """u = (|x|^2 - radius^2)/2, all Hessian eigenvalues equal to 1."""
    return AnalyticField.radial(
        dim,
        lambda r: 0.5 * (r * r - radius * radius),
        lambda r: r,
        lambda r: np.ones_like(r),
        name="euclid_paraboloid",
    )


def explicit_graph_field(dim: int) -> AnalyticField:
    """u = -sqrt(1 - |x|^2) + 1/sqrt(2): lower unit hemisphere, zero at |x| = 1/sqrt(2)."""
    return AnalyticField.radial(
        dim,
        lambda r: -np.sqrt(1 - r * r) + 1 / math.sqrt(2),
        lambda r: r / np.sqrt(1 - r * r),
        lambda r: (1 - r * r) ** -1.5,
        name="graph_hemisphere",
    )


# ---------------------------------------------------------------------------
# operations


def gradient_hessian(f: ScalarField, point) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient and symmetric Hessian at a grid node."""
    idx = f.node_index(point, margin=2)
    g = f.gradient_field[(slice(None),) + idx].copy()
    H = f.hessian_field[(slice(None), slice(None)) + idx].copy()
    return g, H


def operator_matrix(f: ScalarField, point, geom) -> np.ndarray:
    """D2u (euclidean) or (u_i / w)_j (graph) at a node. Graph output is non-symmetric."""
    geom = as_geometry(geom)
    if geom is GeometryTag.HYPERBOLIC:
        raise ValueError("hyperbolic Hessian is evaluated through radial profiles only")
    g, H = gradient_hessian(f, point)
    return operator_from_jet(g[None], H[None], None, geom)[0]


def _flat_jet(f: ScalarField):
    d = f.dim
    g = np.moveaxis(f.gradient_field, 0, -1).reshape(-1, d)
    H = np.moveaxis(f.hessian_field, (0, 1), (-2, -1)).reshape(-1, d, d)
    return g, H


def operator_field(f: ScalarField, geom) -> np.ndarray:
    """Operator matrix at every node, shape (*grid, d, d); NaN at the outer layer."""
    g, H = _flat_jet(f)
    M = operator_from_jet(g, H, None, geom)
    return M.reshape(f.shape + (f.dim, f.dim))


def _sym_fields(f: ScalarField, geom, kmax: int):
    """S_0..S_d and their gradients at every node; NaN where undefined."""
    M = operator_field(f, geom).reshape(-1, f.dim, f.dim)
    ok = np.all(np.isfinite(M), axis=(1, 2))
    S = np.full((M.shape[0], f.dim + 1), np.nan)
    G = np.full((M.shape[0], kmax + 1, f.dim, f.dim), np.nan)
    if np.any(ok):
        S[ok], G[ok] = _sym_and_grads(M[ok], kmax)
    return S.reshape(f.shape + (f.dim + 1,)), G.reshape(f.shape + (kmax + 1, f.dim, f.dim))


def _central(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.full(arr.shape, np.nan)
    n = arr.shape[axis]
    sl_c = [slice(None)] * arr.ndim
    sl_p = [slice(None)] * arr.ndim
    sl_m = [slice(None)] * arr.ndim
    sl_c[axis], sl_p[axis], sl_m[axis] = slice(1, n - 1), slice(2, n), slice(0, n - 2)
    out[tuple(sl_c)] = (arr[tuple(sl_p)] - arr[tuple(sl_m)]) / (2 * h)
    return out


def divergence_residual(f: ScalarField, k: int, geom, subregion=None) -> float:
    """sup |sum_j d_j S_k^{ij}| over nodes of ``subregion``.

    ``subregion`` is a pair ``(lower, upper)`` of coordinate corners; by
    default every node at least two cells from the edge.
    """
    geom = as_geometry(geom)
    if geom is GeometryTag.HYPERBOLIC:
        raise ValueError("divergence check supports euclidean and graph geometries")
    d = f.dim
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range 1..{d}")
    _, G = _sym_fields(f, geom, k)
    Gk = G[..., k, :, :]
    div = np.zeros(f.shape + (d,))
    for j in range(d):
        div += _central(Gk[..., :, j], j, f.spacing[j])
    mask = _region_mask(f, subregion, margin=2)
    vals = np.abs(div[mask])
    if vals.size == 0:
        raise ValueError("subregion contains no admissible nodes")
    return float(np.nanmax(vals))


def _region_mask(f: ScalarField, subregion, margin: int) -> np.ndarray:
    mask = np.zeros(f.shape, dtype=bool)
    mask[tuple(slice(margin, n - margin) for n in f.shape)] = True
    if subregion is not None:
        lo, hi = (np.asarray(c, float) for c in subregion)
        X = f.coordinates()
        for a in range(f.dim):
            mask &= (X[a] >= lo[a] - 1e-12) & (X[a] <= hi[a] + 1e-12)
    return mask


def levelset_curvature(f: ScalarField, point, k: int, eps_grad: float = EPS_GRAD) -> float:
    """(k-1)-th curvature of the level set through a node: S_k^{ij} u_i u_j / |Du|^(k+1)."""
    g, H = gradient_hessian(f, point)
    if not 1 <= k <= f.dim:
        raise ValueError(f"k={k} out of range 1..{f.dim}")
    norm = float(np.linalg.norm(g))
    if norm <= eps_grad:
        raise VanishingGradientError(f"|Du| = {norm:.3e} <= {eps_grad:.1e}")
    G = symfunc.sk_gradient(k, H)
    return float(g @ G @ g / norm ** (k + 1))


def pointwise_rellich_residual(f: ScalarField, k: int, point) -> float:
    """LHS minus RHS of the pointwise Rellich identity at a node.

    Checks ``2 x.D(S_k) u = div_j(S_k^{ij} u_is u 2x_s) - div_i(S_k^{ij}|Du|^2 x_j)
    + (d-k+1) S_{k-1}|Du|^2 - 2k S_k u`` with every derivative of an assembled
    field (S_k, the two fluxes) taken by central differences.
    """
    d = f.dim
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range 1..{d}")
    idx = f.node_index(point, margin=2)
    pf, c = f.patch(idx, 2) if all(2 <= i <= n - 3 for i, n in zip(idx, f.shape)) else (f, idx)
    S, G = _sym_fields(pf, GeometryTag.EUCLIDEAN, k)
    X = np.moveaxis(pf.coordinates(), 0, -1)
    u = pf.values
    Du = np.moveaxis(pf.gradient_field, 0, -1)
    H = np.moveaxis(pf.hessian_field, (0, 1), (-2, -1))
    Gk = G[..., k, :, :]
    du2 = np.einsum("...i,...i->...", Du, Du)
    V = 2 * u[..., None] * np.einsum("...ij,...is,...s->...j", Gk, H, X)
    W = du2[..., None] * np.einsum("...ij,...j->...i", Gk, X)
    Sk = S[..., k]
    lhs = 0.0
    divV = 0.0
    divW = 0.0
    for a in range(d):
        h = pf.spacing[a]
        lhs += X[c][a] * _central(Sk, a, h)[c]
        divV += _central(V[..., a], a, h)[c]
        divW += _central(W[..., a], a, h)[c]
    lhs *= 2 * u[c]
    rhs = divV - divW + (d - k + 1) * S[c][k - 1] * du2[c] - 2 * k * Sk[c] * u[c]
    return float(lhs - rhs)
