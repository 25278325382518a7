"""Newton solver for S_k(D2u) = (C_2^k/C_2^l) S_l(D2u), u = 0 on a 2D star domain.

Discretization
--------------
Nodes live on a polar-type mapped grid ``X(s, theta) = s * b(s, theta) * e(theta)``
with ``b = rho_mean + phi(s) * (rho(theta) - rho_mean)``. ``phi`` is a smooth
step that vanishes for ``s <= S_INNER`` and equals 1 at ``s = 1``, so the
boundary ``s = 1`` is the domain boundary and the inner zone is an exact
dilation of polar coordinates.

Radial nodes are staggered, ``s_i = (i - 1/2) ds`` with ``s_N = 1``, which
keeps the center off the grid: the ghost row ``i = 0`` is the reflection
``U[0, j] = U[1, j + N_theta/2]`` through the origin. Derivatives in (s, theta)
are second-order central differences; the physical Hessian follows from the
chain rule ``D2u = J^-T (U_qq - u_c X_c,qq) J^-1``.

Near the center the angular coefficients are of order 1/(s ds)^2, so the
residual is evaluated and U is accumulated in extended precision
(``np.longdouble``); Newton corrections are solved in double precision.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import splu

from . import symfunc
from .fields import ScalarField
from .integral import DomainError, StarDomain

S_INNER = 0.4
MAX_ITER = 50
TOL = 1e-9
MIN_DAMPING = 2.0**-30
ALLOWED = {(1, 0), (2, 0), (2, 1)}

LD = np.longdouble


class SolverError(RuntimeError):
    """Newton iteration failed (non-convergence or unrecoverable admissibility loss)."""


# ---------------------------------------------------------------------------
# smooth step (degree-9 polynomial, C^4 at both ends)

_STEP = np.polynomial.Polynomial([0, 0, 0, 0, 0, 126, -420, 540, -315, 70])


def _phi(s, order=0):
    t = (np.asarray(s, dtype=float) - S_INNER) / (1 - S_INNER)
    p = _STEP.deriv(order) if order else _STEP
    val = p(np.clip(t, 0.0, 1.0)) / (1 - S_INNER) ** order
    if order == 0:
        return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, val))
    return np.where((t <= 0) | (t >= 1), 0.0, val)


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class MappedGrid:
    """Geometry of the mapped polar grid. Row index 0 is the ghost row."""

    dom: StarDomain
    N: int
    Ntheta: int
    ds: float
    dth: float
    s: np.ndarray
    theta: np.ndarray
    X: np.ndarray          # (N+1, Nth, 2) physical node positions
    Jinv: np.ndarray       # (N+1, Nth, 2, 2): Jinv[p, a] = d q_p / d x_a
    C2: np.ndarray         # (N+1, Nth, 3, 2, 2) Hessian weights of U_ss, U_st, U_tt
    C1: np.ndarray         # (N+1, Nth, 2, 2, 2) Hessian weights of U_s, U_t
    rho_mean: float

    @classmethod
    def build(cls, dom: StarDomain, N: int) -> "MappedGrid":
        if dom.d != 2:
            raise DomainError("the Dirichlet solver works on 2D domains")
        if N < 64:
            raise ValueError("resolution must be at least 64")
        Nth = 2 * (N // 2)
        ds = 1.0 / (N - 0.5)
        dth = 2 * math.pi / Nth
        s = (np.arange(N + 1) - 0.5) * ds
        s[N] = 1.0
        th = dth * np.arange(Nth)
        rho = np.asarray(dom.rho(th), float)
        r1 = np.asarray(dom.drho(th), float)
        r2 = np.asarray(dom.d2rho(th), float)
        rbar = float(np.mean(rho))
        S = s[:, None]
        f0, f1, f2 = (_phi(S, o) for o in (0, 1, 2))
        dev = rho - rbar
        b = rbar + f0 * dev
        R = S * b
        R_s = b + S * f1 * dev
        R_ss = 2 * f1 * dev + S * f2 * dev
        R_t = S * f0 * r1
        R_tt = S * f0 * r2
        R_st = f0 * r1 + S * f1 * r1
        e = np.stack([np.cos(th), np.sin(th)], -1)[None]
        t = np.stack([-np.sin(th), np.cos(th)], -1)[None]
        X = R[..., None] * e
        X_s = R_s[..., None] * e
        X_t = R_t[..., None] * e + R[..., None] * t
        X_ss = R_ss[..., None] * e
        X_st = R_st[..., None] * e + R_s[..., None] * t
        X_tt = R_tt[..., None] * e + 2 * R_t[..., None] * t - R[..., None] * e
        J = np.stack([X_s, X_t], axis=-1)  # J[a, p] = dX_a/dq_p
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        if np.any(det[1:] <= 0):
            raise DomainError("grid mapping degenerates; the deformation is too strong")
        with np.errstate(divide="ignore", invalid="ignore"):
            Jinv = np.linalg.inv(np.where(np.abs(det)[..., None, None] > 0, J, np.eye(2)))
        # Hessian = sum_pq Jinv[p,a] Jinv[q,b] (U_pq - sum_c u_c X_c,pq)
        P = np.einsum("...pa,...qb->...pqab", Jinv, Jinv)
        C2 = np.stack([P[..., 0, 0, :, :], P[..., 0, 1, :, :] + P[..., 1, 0, :, :], P[..., 1, 1, :, :]], axis=-3)
        Xqq = np.stack([np.stack([X_ss, X_st], -1), np.stack([X_st, X_tt], -1)], -1)  # [..., c, p, q]
        # u_c = sum_r Jinv[r, c] U_r
        C1 = -np.einsum("...pqab,...cpq,...rc->...rab", P, Xqq, Jinv)
        return cls(dom, N, Nth, ds, dth, s, th, X, Jinv, C2, C1, rbar)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N - 1, self.Ntheta)

    def pad(self, U_int) -> np.ndarray:
        """Interior unknowns (N-1, Nth) -> rows 0..N with ghost and zero boundary."""
        out = np.zeros((self.N + 1, self.Ntheta), dtype=U_int.dtype)
        out[1 : self.N] = U_int
        out[0] = np.roll(U_int[0], -self.Ntheta // 2)
        return out

    def derivatives(self, Up) -> list:
        """[U_ss, U_st, U_tt], [U_s, U_t] on rows 1..N-1 from padded values."""
        ds, dt = self.ds, self.dth
        Ujp = np.roll(Up, -1, axis=1)
        Ujm = np.roll(Up, 1, axis=1)
        U_s = (Up[2:] - Up[:-2]) / (2 * ds)
        U_t = (Ujp[1:-1] - Ujm[1:-1]) / (2 * dt)
        U_ss = (Up[2:] - 2 * Up[1:-1] + Up[:-2]) / (ds * ds)
        U_tt = (Ujp[1:-1] - 2 * Up[1:-1] + Ujm[1:-1]) / (dt * dt)
        U_st = (Ujp[2:] - Ujm[2:] - Ujp[:-2] + Ujm[:-2]) / (4 * ds * dt)
        return [U_ss, U_st, U_tt], [U_s, U_t]

    def hessian(self, Up, dtype=np.float64) -> np.ndarray:
        """Physical Hessian at interior nodes, shape (N-1, Nth, 2, 2)."""
        second, first = self.derivatives(Up)
        C2 = self.C2[1 : self.N].astype(dtype)
        C1 = self.C1[1 : self.N].astype(dtype)
        H = np.zeros(self.shape + (2, 2), dtype=dtype)
        for p in range(3):
            H += C2[:, :, p] * second[p][..., None, None]
        for p in range(2):
            H += C1[:, :, p] * first[p][..., None, None]
        return H

    def gradient(self, Up) -> np.ndarray:
        _, (U_s, U_t) = self.derivatives(Up)
        Ji = self.Jinv[1 : self.N]
        return Ji[..., 0, :] * U_s[..., None] + Ji[..., 1, :] * U_t[..., None]

    def boundary_gradient(self, Up) -> np.ndarray:
        """Gradient at boundary nodes from the one-sided 3-point radial difference."""
        N = self.N
        U_s = (3 * Up[N] - 4 * Up[N - 1] + Up[N - 2]) / (2 * self.ds)
        Ji = self.Jinv[N]
        return Ji[:, 0, :] * np.asarray(U_s, float)[:, None]

    # -- sparse stencil operators ------------------------------------------

    def _operator(self, stencil) -> sp.csr_matrix:
        N, Nth = self.N, self.Ntheta
        I, Jj = np.meshgrid(np.arange(1, N), np.arange(Nth), indexing="ij")
        row = ((I - 1) * Nth + Jj).ravel()
        rows, cols, vals = [], [], []
        for di, dj, wgt in stencil:
            ti = (I + di).ravel()
            tj = ((Jj + dj) % Nth).ravel()
            ghost = ti == 0
            tj = np.where(ghost, (tj + Nth // 2) % Nth, tj)
            ti = np.where(ghost, 1, ti)
            keep = ti < N  # boundary row carries U = 0
            rows.append(row[keep])
            cols.append(((ti - 1) * Nth + tj)[keep])
            vals.append(np.full(keep.sum(), wgt))
        n = (N - 1) * Nth
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))

    def operators(self):
        cache = self.__dict__.get("_ops")
        if cache is None:
            ds, dt = self.ds, self.dth
            second = [
                self._operator([(1, 0, 1 / ds**2), (0, 0, -2 / ds**2), (-1, 0, 1 / ds**2)]),
                self._operator([(1, 1, 1 / (4 * ds * dt)), (1, -1, -1 / (4 * ds * dt)),
                                (-1, 1, -1 / (4 * ds * dt)), (-1, -1, 1 / (4 * ds * dt))]),
                self._operator([(0, 1, 1 / dt**2), (0, 0, -2 / dt**2), (0, -1, 1 / dt**2)]),
            ]
            first = [
                self._operator([(1, 0, 1 / (2 * ds)), (-1, 0, -1 / (2 * ds))]),
                self._operator([(0, 1, 1 / (2 * dt)), (0, -1, -1 / (2 * dt))]),
            ]
            cache = (second, first)
            object.__setattr__(self, "_ops", cache)
        return cache


# ---------------------------------------------------------------------------
# residual and Jacobian


def _sym2(H):
    s1 = H[..., 0, 0] + H[..., 1, 1]
    s2 = H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0]
    return s1, s2


def _residual(H, k, l, q):
    s1, s2 = _sym2(H)
    S = [np.ones_like(s1), s1, s2]
    return S[k] - q * S[l], s1, s2


def _admissible(s1, s2, k) -> bool:
    if not np.all(s1 > 0):
        return False
    return bool(k < 2 or np.all(s2 > 0))


def _dF_dH(H, k, l, q):
    """d(S_k - q S_l)/dH for 2x2 matrices, shape (..., 2, 2)."""
    eye = np.broadcast_to(np.eye(2), H.shape)
    cof = np.empty_like(H)
    cof[..., 0, 0], cof[..., 1, 1] = H[..., 1, 1], H[..., 0, 0]
    cof[..., 0, 1], cof[..., 1, 0] = -H[..., 1, 0], -H[..., 0, 1]
    grads = [np.zeros_like(H), eye, cof]
    return grads[k] - q * grads[l]


def _jacobian(grid: MappedGrid, H, k, l, q) -> sp.csc_matrix:
    M = _dF_dH(np.asarray(H, dtype=np.float64), k, l, q)
    second, first = grid.operators()
    C2 = grid.C2[1 : grid.N]
    C1 = grid.C1[1 : grid.N]
    Jac = None
    for p in range(3):
        coef = np.einsum("...ab,...ab->...", M, C2[:, :, p]).ravel()
        term = sp.diags(coef) @ second[p]
        Jac = term if Jac is None else Jac + term
    for p in range(2):
        coef = np.einsum("...ab,...ab->...", M, C1[:, :, p]).ravel()
        Jac = Jac + sp.diags(coef) @ first[p]
    return Jac.tocsc()


# ---------------------------------------------------------------------------
# solver


@dataclass
class SolveResult:
    """Converged (or last) iterate of the Dirichlet solve."""

    grid: MappedGrid
    k: int
    l: int
    U: np.ndarray              # rows 0..N (ghost, interior, boundary), float64
    iterations: int
    residual: float
    converged: bool
    admissible: bool
    boundary_grad: np.ndarray  # |Du| at the N_theta boundary nodes
    history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def resolution(self) -> int:
        return self.grid.N

    @property
    def interior_points(self) -> np.ndarray:
        return self.grid.X[1 : self.grid.N].reshape(-1, 2)

    @property
    def interior_values(self) -> np.ndarray:
        return self.U[1 : self.grid.N].reshape(-1)

    @property
    def boundary_points(self) -> np.ndarray:
        return self.grid.X[self.grid.N]

    def hessian(self) -> np.ndarray:
        return self.grid.hessian(self.U)

    def sym_values(self) -> tuple[np.ndarray, np.ndarray]:
        return _sym2(self.hessian())

    def is_k_convex(self) -> bool:
        s1, s2 = self.sym_values()
        return _admissible(s1, s2, self.k)

    def max_error(self, exact) -> float:
        X = self.interior_points
        return float(np.max(np.abs(self.interior_values - exact(X[:, 0], X[:, 1]))))

    def to_scalar_field(self, lower=(-1.5, -1.5), upper=(1.5, 1.5), shape=(129, 129)) -> ScalarField:
        return resample_to_box(self, lower, upper, shape)


def _initial_guess(grid: MappedGrid) -> np.ndarray:
    """Scaled paraboloid 1/2 b^2 (s^2 - 1); exact for every allowed (k, l) on a disk."""
    S = grid.s[1 : grid.N, None]
    rho = np.asarray(grid.dom.rho(grid.theta), float)
    b = grid.rho_mean + _phi(S) * (rho - grid.rho_mean)
    return 0.5 * b**2 * (S**2 - 1)


def _blend(dom: StarDomain, rbar: float, tau: float) -> StarDomain:
    """Domain with boundary radius rbar + tau * (rho - rbar)."""
    return StarDomain(
        2, dom.center,
        lambda t: rbar + tau * (np.asarray(dom.rho(t), float) - rbar),
        lambda t: tau * np.asarray(dom.drho(t), float),
        lambda t: tau * np.asarray(dom.d2rho(t), float),
        name=f"{dom.name}@{tau:.4g}",
    )


def _newton(grid, k, l, q, U0, max_iter, tol):
    U = np.asarray(U0).astype(LD)
    H = grid.hessian(grid.pad(U), LD)
    F, s1, s2 = _residual(H, k, l, q)
    norm = float(np.max(np.abs(F)))
    history = [norm]
    if not _admissible(s1, s2, k):
        raise SolverError("initial guess is not admissible")
    it = 0
    while norm > tol and it < max_iter:
        it += 1
        Jac = _jacobian(grid, H, k, l, q)
        delta = splu(Jac).solve(-np.asarray(F, dtype=np.float64).ravel()).reshape(grid.shape)
        alpha = 1.0
        while True:
            Ut = U + LD(alpha) * delta.astype(LD)
            Ht = grid.hessian(grid.pad(Ut), LD)
            Ft, s1t, s2t = _residual(Ht, k, l, q)
            nt = float(np.max(np.abs(Ft)))
            if np.isfinite(nt) and nt < norm and _admissible(s1t, s2t, k):
                break
            alpha *= 0.5
            if alpha < MIN_DAMPING:
                return U, H, norm, it, history, False
        U, H, F, norm = Ut, Ht, Ft, nt
        history.append(norm)
    return U, H, norm, it, history, norm <= tol


def _continuation(dom, k, l, q, N, max_iter, tol):
    """Deform the mean-radius disk into ``dom``, re-solving along the way."""
    grid = MappedGrid.build(dom, N)
    rbar = grid.rho_mean
    S = grid.s[1:N, None]
    U = np.broadcast_to(0.5 * rbar**2 * (S**2 - 1), grid.shape).astype(LD)
    tau, step, total = 0.0, 0.25, 0
    while tau < 1.0:
        trial = min(1.0, tau + step)
        g = grid if trial == 1.0 else MappedGrid.build(_blend(dom, rbar, trial), N)
        try:
            Ut, H, norm, it, hist, ok = _newton(g, k, l, q, U, max_iter, tol if trial == 1.0 else 1e-6)
        except SolverError:
            ok, it = False, 0
        total += it
        if ok:
            tau, U = trial, Ut
            step *= 1.5
        else:
            step *= 0.5
            if step < 1e-3:
                raise SolverError(f"continuation stalled at deformation {tau:.3f}")
    return U, H, norm, total, hist, True


def _solve_once(grid, dom, k, l, q, N, max_iter, tol, direct=True):
    if direct:
        try:
            out = _newton(grid, k, l, q, _initial_guess(grid), max_iter, tol)
            if out[-1]:
                return out, "paraboloid"
        except SolverError:
            pass
    return _continuation(dom, k, l, q, N, max_iter, tol), "continuation"


def solve_dirichlet(dom: StarDomain, k: int, l: int, resolution: int = 129, *,
                    tol: float = TOL, max_iter: int = MAX_ITER, check_start: bool = False,
                    raise_on_failure: bool = True) -> SolveResult:
    """Solve the 2D quotient equation with zero boundary data by damped Newton.

    Steps are halved until the sup-norm residual decreases and the iterate
    stays k-convex. The first start is a scaled paraboloid vanishing on the
    boundary; if that is not admissible or Newton stalls, the solver deforms
    the mean-radius disk (where the paraboloid is exact) into the domain in
    adaptive steps. With ``check_start`` the continuation path is always run
    as well and any difference between the two solutions is reported as a
    warning, never resolved.
    """
    if (k, l) not in ALLOWED:
        raise ValueError(f"(k, l) must be one of {sorted(ALLOWED)}")
    N = int(resolution)
    grid = MappedGrid.build(dom, N)
    q = symfunc.binom(2, k) / symfunc.binom(2, l)
    notes = []
    try:
        (U, H, norm, it, hist, ok), start = _solve_once(grid, dom, k, l, q, N, max_iter, tol)
    except SolverError as exc:
        if raise_on_failure:
            raise
        notes.append(str(exc))
        U = _initial_guess(grid).astype(LD)
        H = grid.hessian(grid.pad(U), LD)
        norm, it, hist, ok, start = math.inf, 0, [], False, "none"
    notes.append(f"start: {start}")
    if check_start and ok:
        try:
            (U2, *_r, ok2), _ = _solve_once(grid, dom, k, l, q, N, max_iter, tol, direct=False)
            diff = float(np.max(np.abs(np.asarray(U2, float) - np.asarray(U, float))))
            if not ok2 or diff > 1e-6:
                msg = f"solution depends on the initial guess (max difference {diff:.3e})"
                notes.append(msg)
                warnings.warn(msg, RuntimeWarning, stacklevel=2)
        except SolverError as exc:
            notes.append(f"alternate start failed: {exc}")
    s1, s2 = _sym2(np.asarray(H, dtype=np.float64))
    Up = grid.pad(np.asarray(U, dtype=np.float64))
    gb = np.linalg.norm(grid.boundary_gradient(Up), axis=1)
    res = SolveResult(grid, k, l, Up, it, norm, ok, _admissible(s1, s2, k), gb, hist, notes)
    if not ok and raise_on_failure:
        raise SolverError(f"Newton stalled after {it} iterations at residual {norm:.3e}")
    return res


@dataclass(frozen=True)
class GradientStats:
    mean: float
    std: float
    min: float
    max: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def boundary_gradient_stats(res: SolveResult) -> GradientStats:
    g = res.boundary_grad
    return GradientStats(float(g.mean()), float(g.std()), float(g.min()), float(g.max()))


# ---------------------------------------------------------------------------
# rigidity scan

SCAN_COLUMNS = ["epsilon", "mode", "k", "l", "resolution", "newton_iters", "residual",
                "mean_grad", "std_grad", "status"]


def family_domain(family: str, eps: float, mode: int = 2) -> StarDomain:
    if family == "cos":
        return StarDomain.cos_perturbed(eps, mode)
    if family == "ellipse":
        return StarDomain.ellipse(1.0 + eps, 1.0)
    raise ValueError(f"unknown family {family!r}; expected 'cos' or 'ellipse'")


def rigidity_scan(family: str, eps_values, k: int = 2, l: int = 1, resolution: int = 129,
                  mode: int = 2, max_iter: int = MAX_ITER) -> list[dict]:
    """Solve on each family member and tabulate boundary-gradient statistics.

    A failed row is recorded with its error message and the scan continues.
    """
    rows = []
    for eps in eps_values:
        row = {"epsilon": float(eps), "mode": int(mode) if family == "cos" else 0, "k": k, "l": l,
               "resolution": resolution}
        try:
            res = solve_dirichlet(family_domain(family, eps, mode), k, l, resolution, max_iter=max_iter)
            st = boundary_gradient_stats(res)
            row.update(newton_iters=res.iterations, residual=res.residual, mean_grad=st.mean,
                       std_grad=st.std, status="ok")
        except (SolverError, DomainError) as exc:
            row.update(newton_iters=-1, residual=math.nan, mean_grad=math.nan, std_grad=math.nan,
                       status=f"failed: {exc}")
        rows.append(row)
    return rows


def scan_to_csv(rows, path=None) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({c: (repr(r[c]) if isinstance(r[c], float) else r[c]) for c in SCAN_COLUMNS})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# post-processing used by the P-function scan


def p_samples(res: SolveResult):
    """Node positions and P = |Du|^2 - 2u on interior and boundary nodes."""
    g = res.grid
    Du = g.gradient(res.U).reshape(-1, 2)
    P_int = np.einsum("md,md->m", Du, Du) - 2 * res.interior_values
    P_bdy = res.boundary_grad**2
    return res.interior_points, P_int, res.boundary_points, P_bdy


def elliptic_on_p_grid(res: SolveResult, skip_rows: int = 3) -> np.ndarray:
    """F^{ij} P_ij at interior nodes, P differenced with the mapped stencils.

    The last ``skip_rows`` rows next to the boundary are left out: there P's
    boundary values come from one-sided gradients whose O(h^2) error is
    amplified by the second difference.
    """
    g = res.grid
    _, P_int, _, P_bdy = p_samples(res)
    Pp = np.zeros_like(res.U)
    Pp[1 : g.N] = P_int.reshape(g.shape)
    Pp[g.N] = P_bdy
    Pp[0] = np.roll(Pp[1], -g.Ntheta // 2)
    HP = g.hessian(Pp)
    H = res.hessian()
    s1, s2 = _sym2(H)
    S = [np.ones_like(s1), s1, s2]
    k, l = res.k, res.l
    eye = np.broadcast_to(np.eye(2), H.shape)
    cof = np.stack([np.stack([H[..., 1, 1], -H[..., 1, 0]], -1), np.stack([-H[..., 0, 1], H[..., 0, 0]], -1)], -2)
    grads = [np.zeros_like(H), eye, cof]
    F = (grads[k] * S[l][..., None, None] - S[k][..., None, None] * grads[l]) / (S[l] ** 2)[..., None, None]
    vals = np.einsum("...ab,...ab->...", F, HP)
    return vals[: g.N - 1 - skip_rows].ravel()


def resample_to_box(res: SolveResult, lower, upper, shape) -> ScalarField:
    """Interpolate the solution onto a box grid; nodes outside the domain get NaN."""
    g = res.grid
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    axes = [np.linspace(a, b, n) for a, b, n in zip(lower, upper, shape)]
    XX = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 2)
    c = np.asarray(g.dom.center)
    Y = XX - c
    r = np.linalg.norm(Y, axis=1)
    th = np.mod(np.arctan2(Y[:, 1], Y[:, 0]), 2 * np.pi)
    rho = np.asarray(g.dom.rho(th), float)
    inside = r < rho
    # invert r = s * b(s, theta) by bisection (monotone in s)
    lo, hi = np.zeros_like(r), np.ones_like(r)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = mid * (g.rho_mean + _phi(mid) * (rho - g.rho_mean))
        big = val > r
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    s = 0.5 * (lo + hi)
    pad = 3
    Ue = np.concatenate([res.U[:, -pad:], res.U, res.U[:, :pad]], axis=1)
    th_e = np.concatenate([g.theta[-pad:] - 2 * np.pi, g.theta, g.theta[:pad] + 2 * np.pi])
    s_axis = g.s.copy()
    interp = RegularGridInterpolator((s_axis, th_e), Ue, method="cubic")
    vals = np.full(len(r), np.nan)
    vals[inside] = interp(np.stack([s[inside], th[inside]], -1))
    spacing = tuple((b - a) / (n - 1) for a, b, n in zip(lower, upper, shape))
    return ScalarField(vals.reshape(tuple(shape)), spacing, tuple(lower))
