"""Command-line entry point: ``hessquot <subcommand> [options]``.

Every subcommand writes a JSON report ``{tool_version, config, results, pass}``
(sorted keys, so identical configurations give identical bytes) and, where a
table makes sense, a CSV file. Exit codes: 0 all checks pass, 1 a tolerance
check failed, 2 invalid configuration, 3 solver did not converge.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_TOL, EXIT_CONFIG, EXIT_NONCONV = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _finite(obj):
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    return obj


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        a, b, h = (float(p) for p in parts)
        if h <= 0 or b < a:
            raise ConfigError(f"invalid range {text!r}")
        count = int(math.floor((b - a) / h + 1e-9)) + 1
        return [round(a + i * h, 12) for i in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def _check_nkl(n, k, l):
    if not 0 <= l < k <= n:
        raise ConfigError(f"need 0 <= l < k <= n, got n={n}, k={k}, l={l}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_identities(a):
    from . import symfunc
    from .fields import ScalarField, divergence_residual, pointwise_rellich_residual

    if a.n < 1 or a.n > symfunc.MINOR_LIMIT:
        raise ConfigError(f"n must lie in 1..{symfunc.MINOR_LIMIT}")
    if not 1 <= a.k <= a.n:
        raise ConfigError("need 1 <= k <= n")
    rng = np.random.default_rng(a.seed)
    worst = {"contraction": 0.0, "trace": 0.0, "swap": 0.0, "recursion": 0.0}
    grad_fd = 0.0
    ineq_fail = 0
    for _ in range(a.samples):
        A = rng.normal(size=(a.n, a.n))
        r = symfunc.algebraic_identity_residuals(A, a.k)
        for key in worst:
            worst[key] = max(worst[key], r[key] / r["scale"])
        grad_fd = max(grad_fd, _fd_gradient_error(A, a.k))
        l = a.l if a.l is not None else a.k - 1
        M, _ = symfunc.random_cone_matrix(rng, a.n, a.k)
        if not symfunc.inequality_report(M, a.k, l, tol=1e-9).all_hold:
            ineq_fail += 1
    results = {
        "symmetric_functions": {"max_scaled_residual": worst, "gradient_fd_relative_error": grad_fd},
        "inequalities": {"samples": a.samples, "failures": ineq_fail},
    }
    ok = max(worst.values()) <= a.tol and grad_fd <= 1e-6 and ineq_fail == 0
    if a.n in (2, 3) and a.k <= a.n:
        f = ScalarField.from_function(lambda *x: 0.5 * sum(c * c for c in x) - 0.5,
                                      [-1] * a.n, [1] * a.n, [33] * a.n)
        div = divergence_residual(f, a.k, "euclidean_hessian")
        rel = pointwise_rellich_residual(f, a.k, [0.25] * a.n)
        results["fields"] = {"divergence_residual": div, "rellich_residual": rel}
        ok = ok and div <= 1e-9 and abs(rel) <= 1e-8
    return results, ok, None


def _fd_gradient_error(A, k, h=1e-5):
    from . import symfunc

    G = symfunc.sk_gradient(k, A)
    n = A.shape[0]
    fd = np.empty_like(G)
    for i in range(n):
        for j in range(n):
            E = np.zeros_like(A)
            E[i, j] = h
            fd[i, j] = (symfunc.sk_of_matrix(k, A + E) - symfunc.sk_of_matrix(k, A - E)) / (2 * h)
    return float(np.max(np.abs(fd - G)) / max(1.0, np.max(np.abs(G))))


def _domain(a):
    from .integral import StarDomain

    if a.domain == "disk":
        return StarDomain.disk(a.radius)
    if a.domain == "ellipse":
        return StarDomain.ellipse(a.a, a.b)
    if a.domain == "cos":
        return StarDomain.cos_perturbed(a.eps_value, a.mode)
    if a.domain == "ball":
        return StarDomain.ball(a.radius)
    raise ConfigError(f"unknown domain {a.domain!r}")


def cmd_pfunction(a):
    from . import pfunc, radial

    _check_nkl(a.n, a.k, a.l)
    geom = {"euclid": "euclidean_hessian", "hyper": "hyperbolic_hessian", "graph": "graph_curvature"}[a.geom]
    c = a.c if a.c is not None else (0.5 if a.geom == "hyper" else 1.0)
    prof = radial.solve_radial(geom, a.n, a.k, a.l, c)
    rr = np.linspace(0.0, prof.R, a.samples)
    P = radial.p_along(prof, rr)
    vals = pfunc.elliptic_along_profile(prof, a.k, a.l, a.samples)
    results = {
        "R": prof.R,
        "p_min": float(P.min()),
        "p_max": float(P.max()),
        "p_spread": float(P.max() - P.min()),
        "min_FijPij": float(vals.min()),
        "max_FijPij": float(vals.max()),
    }
    # the curvature P-function is a supersolution, the other two subsolutions
    sign_ok = vals.max() <= a.tol if a.geom == "graph" else vals.min() >= -a.tol
    return results, bool(sign_ok), None


def cmd_integrals(a):
    from . import integral, radial
    from .fields import explicit_euclid_field, explicit_graph_field

    _check_nkl(a.n, a.k, a.l)
    ledgers = []
    if a.n == 2:
        dom_e, dom_g = integral.StarDomain.disk(1.0), integral.StarDomain.disk(1 / math.sqrt(2))
    elif a.n == 3:
        dom_e, dom_g = integral.StarDomain.ball(1.0), integral.StarDomain.ball(1 / math.sqrt(2))
    else:
        dom_e = dom_g = None
    res = a.resolution if a.n == 2 else min(a.resolution, 64)
    if dom_e is not None:
        for kk in range(1, a.n):
            ledgers.append(integral.minkowski_residual(dom_e, kk, res))
        ledgers.append(integral.pohozaev_euclid(explicit_euclid_field(a.n), dom_e, a.k, a.l, res))
        ledgers.append(integral.pohozaev_curv(explicit_graph_field(a.n), dom_g, a.k, a.l, res))
    prof = radial.explicit_profile("hyper", a.n, a.c if a.c is not None else 0.5, a.k, a.l)
    ledgers.append(integral.pohozaev_hyper(prof, None, a.k, a.l, max(64, a.resolution // 2)))
    out = [L.to_dict() for L in ledgers]
    ok = all(L.relative_residual <= a.tol for L in ledgers)
    return {"ledgers": out}, ok, None


def cmd_radial(a):
    from . import radial

    _check_nkl(a.n, a.k, a.l)
    geom = {"euclid": "euclidean_hessian", "hyper": "hyperbolic_hessian", "graph": "graph_curvature"}[a.geom]
    c = a.c if a.c is not None else (0.5 if a.geom == "hyper" else 1.0)
    if a.geom == "hyper" and not 0 < c < 1:
        raise ConfigError("hyperbolic Neumann constant must lie in (0, 1)")
    try:
        prof = radial.solve_radial(geom, a.n, a.k, a.l, c)
    except radial.RadialSolveError as exc:
        return {"error": str(exc)}, False, EXIT_NONCONV
    exp = radial.verify_explicit(geom, a.n, a.k, a.l, c=c if a.geom == "hyper" else None, tol=a.tol)
    lam = radial.radial_spectrum(prof, prof.r)
    results = {
        "R": prof.R,
        "c": c,
        "u_center": float(prof.u[0]),
        "samples": int(prof.r.size),
        "in_cone": prof.in_cone(a.k),
        "max_spectrum_spread": float(np.max(lam.max(axis=1) - lam.min(axis=1))),
        "explicit": exp.to_dict(),
    }
    csv_text = prof.to_csv(samples=a.csv_samples)
    return results, bool(exp.passed and results["in_cone"]), csv_text


def cmd_solve(a):
    from . import dirichlet, pfunc

    dom = _domain(a)
    try:
        res = dirichlet.solve_dirichlet(dom, a.k, a.l, a.resolution, max_iter=a.max_iter)
    except dirichlet.SolverError as exc:
        return {"error": str(exc)}, False, EXIT_NONCONV
    st = dirichlet.boundary_gradient_stats(res)
    scan = pfunc.extremum_scan(res, "euclid")
    interior_max = float(np.max(res.interior_values))
    results = {
        "domain": dom.name,
        "newton_iters": res.iterations,
        "residual": res.residual,
        "converged": res.converged,
        "k_convex": res.is_k_convex(),
        "max_u_interior": interior_max,
        "boundary_gradient": st.to_dict(),
        "p_scan": scan.to_dict(),
        "notes": res.warnings,
    }
    ok = res.converged and res.is_k_convex() and interior_max < 0
    return results, ok, None


def cmd_scan(a):
    from . import dirichlet

    eps = parse_range(a.eps)
    rows = dirichlet.rigidity_scan(a.family, eps, a.k, a.l, a.resolution, a.mode, max_iter=a.max_iter)
    failed = [r for r in rows if r["status"] != "ok"]
    results = {"rows": rows, "failed_rows": len(failed)}
    return results, not failed, dirichlet.scan_to_csv(rows)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hessquot", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=Path, default=None, help="JSON report path (stdout if omitted)")
        sp.add_argument("--csv", type=Path, default=None, help="CSV output path, where applicable")
        sp.add_argument("--format", choices=["json", "csv"], default="json",
                        help="what to print on stdout when --out is not given")
        sp.add_argument("--tol", type=float, default=tol)

    s = sub.add_parser("identities", help="symmetric-function identities and inequalities")
    common(s, 1e-10)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--l", type=int, default=None)
    s.add_argument("--samples", type=int, default=200)

    for name, helptext, tol in [("pfunction", "P-function checks on radial solutions", 1e-6),
                                ("radial", "radial solve and explicit-solution check", 1e-10)]:
        s = sub.add_parser(name, help=helptext)
        common(s, tol)
        s.add_argument("--geom", choices=["euclid", "hyper", "graph"], default="euclid")
        s.add_argument("--n", type=int, default=3)
        s.add_argument("--k", type=int, default=2)
        s.add_argument("--l", type=int, default=1)
        s.add_argument("--c", type=float, default=None)
        s.add_argument("--samples", type=int, default=200)
        s.add_argument("--csv-samples", type=int, default=None)

    s = sub.add_parser("integrals", help="Minkowski and Rellich-Pohozaev ledgers on explicit solutions")
    common(s, 1e-6)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--l", type=int, default=1)
    s.add_argument("--c", type=float, default=None)
    s.add_argument("--resolution", type=int, default=512)

    s = sub.add_parser("solve", help="2D Dirichlet solve on a star domain")
    common(s, 1e-9)
    s.add_argument("--domain", choices=["disk", "ellipse", "cos"], default="disk")
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--a", type=float, default=1.2)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--eps-value", type=float, default=0.05)
    s.add_argument("--mode", type=int, default=2)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--l", type=int, default=1)
    s.add_argument("--resolution", type=int, default=129)
    s.add_argument("--max-iter", type=int, default=50)

    s = sub.add_parser("scan", help="boundary-gradient rigidity scan over a domain family")
    common(s, 1e-9)
    s.add_argument("--family", choices=["cos", "ellipse"], default="cos")
    s.add_argument("--eps", default="0:0.1:0.05", help="start:stop:step (inclusive) or a,b,c")
    s.add_argument("--mode", type=int, default=2)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--l", type=int, default=1)
    s.add_argument("--resolution", type=int, default=129)
    s.add_argument("--max-iter", type=int, default=50)
    return p


COMMANDS = {
    "identities": cmd_identities,
    "pfunction": cmd_pfunction,
    "integrals": cmd_integrals,
    "radial": cmd_radial,
    "solve": cmd_solve,
    "scan": cmd_scan,
}


def _config(a) -> dict:
    cfg = {}
    for k, v in sorted(vars(a).items()):
        if k in ("out", "csv"):
            continue
        cfg[k] = str(v) if isinstance(v, Path) else v
    return cfg


def run(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports its own message
        return EXIT_CONFIG if exc.code else EXIT_OK
    if getattr(a, "resolution", 64) < 16 or getattr(a, "max_iter", 1) < 1:
        print("error: resolution or iteration limit too small", file=sys.stderr)
        return EXIT_CONFIG
    try:
        results, ok, extra = COMMANDS[a.command](a)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code_override = extra if isinstance(extra, int) else None
    csv_text = extra if isinstance(extra, str) else None
    if a.command == "scan" and not ok:
        code_override = EXIT_NONCONV
    report = {"tool_version": __version__, "config": _config(a), "results": _finite(results), "pass": bool(ok)}
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if a.out is not None:
        a.out.write_text(text)
    if csv_text is not None and a.csv is not None:
        a.csv.write_text(csv_text)
    if a.out is None:
        sys.stdout.write(csv_text if (a.format == "csv" and csv_text is not None) else text)
    if code_override is not None:
        return code_override
    return EXIT_OK if ok else EXIT_TOL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
