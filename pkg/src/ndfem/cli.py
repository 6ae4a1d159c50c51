"""Command-line harness: single solves, convergence studies, adaptive runs
and Cordes-condition checks.

Configuration precedence is flags > config file (plain ``key = value``
lines) > built-in defaults (mu = 10, theta = 0.4, alpha = 1.2).
"""

import argparse
import logging
import os
import sys
import time

import numpy as np

from .adapt import AdaptConfig, adapt_loop, estimate
from .assembly import SolverConfig, error_norms, functional_p, solve_two_stage
from .errors import NdfemError
from .mesh import build_rect_mesh
from .problems import case as get_case
from .problems import cordes_check
from .quadrature import triangle_rule
from .report import ErrorReport, ErrorRow
from .spaces import _physical_points
from .vtkio import write_vtk

logger = logging.getLogger("ndfem")

DEFAULTS = {
    "case": None,
    "degree": "1",
    "nx": 10,
    "levels": 4,
    "mu": 10.0,
    "theta": 0.4,
    "alpha": 1.2,
    "max_dofs": 200000,
    "tol": None,
    "samples": 100,
    "out": None,
    "csv": None,
    "serial": False,
}


def _rect_mesh_for(problem, nx):
    xmin, ymin, xmax, ymax = problem.domain
    ny = max(1, round(nx * (ymax - ymin) / (xmax - xmin)))
    return build_rect_mesh(xmin, ymin, xmax, ymax, nx, ny)


def _solver_config(degree, mu, tol):
    cfg = SolverConfig(mu=mu, degree=degree)
    if tol is not None:
        cfg.cg_tol = tol
    return cfg


def _cell_average_p(p_h):
    mesh = p_h.mesh
    rule = triangle_rule(2)
    elements = np.arange(mesh.n_triangles)
    pts, w = _physical_points(mesh, elements, rule)
    vals = p_h.values(elements, pts)
    return np.einsum("eqc,eq->ec", vals, w) / mesh.areas[:, None]


def run_solve(problem, cfg: SolverConfig, nx: int, out_dir=None):
    """One two-stage solve on a uniform mesh; returns (mesh, sol, errs, est)."""
    mesh = _rect_mesh_for(problem, nx)
    sol = solve_two_stage(mesh, problem, cfg)
    errs = error_norms(sol.p, sol.u, problem, cfg)
    est = estimate(mesh, sol.p, problem, cfg)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_vtk(
            os.path.join(out_dir, "solution.vtk"),
            mesh,
            point_data={"u_h": sol.u.coeffs[: mesh.n_vertices]},
            cell_data={"p_h": _cell_average_p(sol.p), "eta": est.per_element},
            title=f"{problem.name} m={cfg.degree} nx={nx}",
        )
    return mesh, sol, errs, est


def run_convergence(problem, degree, levels, base_nx, cfg_base: SolverConfig) -> ErrorReport:
    """Uniform-refinement study on meshes nx = base_nx * 2^k."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    report = ErrorReport(uniform=True)
    prev_iters = None
    for k in range(levels):
        cfg = _solver_config(degree, cfg_base.mu, cfg_base.cg_tol)
        cfg.quad_degree_volume = cfg_base.quad_degree_volume
        cfg.quad_degree_edge = cfg_base.quad_degree_edge
        t0 = time.perf_counter()
        mesh = _rect_mesh_for(problem, base_nx * 2**k)
        sol = solve_two_stage(mesh, problem, cfg)
        errs = error_norms(sol.p, sol.u, problem, cfg)
        est = estimate(mesh, sol.p, problem, cfg)
        report.add(
            ErrorRow(
                level=k,
                h_max=mesh.h_max,
                dofs_p=sol.p.coeffs.size,
                dofs_u=sol.u.coeffs.size,
                err_p_L2=errs.p_l2,
                err_p_energy=errs.p_energy,
                err_u_L2=errs.u_l2,
                err_u_energy=errs.u_energy,
                eta_total=est.total,
                cg_iters_p=sol.stats_p.iterations,
                cg_iters_u=sol.stats_u.iterations,
                wall_time=time.perf_counter() - t0,
            )
        )
        if prev_iters and sol.stats_p.iterations > 2.5 * prev_iters:
            logger.warning(
                "stage-1 CG iterations grew faster than O(1/h): %d -> %d",
                prev_iters,
                sol.stats_p.iterations,
            )
        prev_iters = sol.stats_p.iterations
    return report


def adapt_report(rounds) -> ErrorReport:
    report = ErrorReport(uniform=False)
    for r in rounds:
        report.add(
            ErrorRow(
                level=r.level,
                h_max=r.mesh.h_max,
                dofs_p=r.p.coeffs.size,
                dofs_u=r.u.coeffs.size,
                err_p_L2=r.errors.p_l2,
                err_p_energy=r.errors.p_energy,
                err_u_L2=r.errors.u_l2,
                err_u_energy=r.errors.u_energy,
                eta_total=r.estimator.total,
                cg_iters_p=r.cg_iters_p,
                cg_iters_u=r.cg_iters_u,
                wall_time=r.wall_time,
            )
        )
    return report


def _write_csv(report, path):
    with open(path, "w") as fh:
        report.to_csv(fh)


def _cmd_solve(args):
    problem = get_case(args.case, alpha=args.alpha)
    cfg = _solver_config(args.degree_list[0], args.mu, args.tol)
    mesh, sol, errs, est = run_solve(problem, cfg, args.nx, out_dir=args.out)
    jp = functional_p(sol.p, problem, cfg)
    print(
        f"case={problem.name} m={cfg.degree} nx={args.nx} dofs_p={sol.p.coeffs.size} "
        f"dofs_u={sol.u.coeffs.size} err_p_L2={errs.p_l2:.6e} "
        f"err_p_energy={errs.p_energy:.6e} err_u_L2={errs.u_l2:.6e} "
        f"err_u_energy={errs.u_energy:.6e} J_p={jp:.6e} eta={est.total:.6e} "
        f"cg_p={sol.stats_p.iterations} cg_u={sol.stats_u.iterations}"
    )
    return 0


def _cmd_convergence(args):
    problem = get_case(args.case, alpha=args.alpha)
    for degree in args.degree_list:
        cfg = _solver_config(degree, args.mu, args.tol)
        report = run_convergence(problem, degree, args.levels, args.nx, cfg)
        print(f"# case={problem.name} degree={degree}")
        print(report.format_table())
        if args.csv:
            path = args.csv
            if len(args.degree_list) > 1:
                root, ext = os.path.splitext(path)
                path = f"{root}_m{degree}{ext or '.csv'}"
            _write_csv(report, path)
    return 0


def _cmd_adapt(args):
    problem = get_case(args.case, alpha=args.alpha)
    acfg = AdaptConfig(
        theta=args.theta,
        max_dofs=args.max_dofs,
        initial_nx=args.nx,
        solver=_solver_config(args.degree_list[0], args.mu, args.tol),
    )
    rounds = adapt_loop(problem, acfg)
    report = adapt_report(rounds)
    print(f"# case={problem.name} degree={acfg.solver.degree} theta={acfg.theta}")
    print(report.format_table())
    if args.csv:
        _write_csv(report, args.csv)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for r in rounds:
            write_vtk(
                os.path.join(args.out, f"adapt_{r.level:03d}.vtk"),
                r.mesh,
                cell_data={"eta": r.estimator.per_element},
                title=f"{problem.name} adaptive round {r.level}",
            )
    return 0


def _cmd_check_cordes(args):
    problem = get_case(args.case, alpha=args.alpha)
    rep = cordes_check(
        problem.coef_sym, problem.domain, samples=args.samples, defined=problem.a_defined
    )
    print(f"case={problem.name} samples={rep.n_samples}")
    print(f"max |A|^2/(tr A)^2 = {rep.max_ratio:.12g}")
    print(f"Cordes epsilon     = {rep.epsilon:.12g}")
    print(f"gamma range        = [{rep.gamma_min:.12g}, {rep.gamma_max:.12g}]")
    print(f"gamma-inequality max slack = {rep.lemma_max_slack:.6g} (<= 0 means it holds)")
    return 0


def _add_common(p):
    p.add_argument("--case", help="problem case name")
    p.add_argument("--degree", help="polynomial degree, or comma list for convergence")
    p.add_argument("--nx", type=int, help="cells per side of the (base) mesh")
    p.add_argument("--levels", type=int, help="number of uniform refinement levels")
    p.add_argument("--mu", type=float, help="stage-1 penalty parameter")
    p.add_argument("--theta", type=float, help="bulk marking fraction")
    p.add_argument("--alpha", type=float, help="corner-singularity exponent of ex4")
    p.add_argument("--max-dofs", type=int, dest="max_dofs", help="adaptive DOF budget")
    p.add_argument("--tol", type=float, help="CG relative tolerance")
    p.add_argument("--samples", type=int, help="grid resolution of check-cordes")
    p.add_argument("--out", help="output directory for VTK files")
    p.add_argument("--csv", help="output CSV path")
    p.add_argument("--config", help="config file with key = value lines")
    p.add_argument(
        "--serial",
        action="store_const",
        const=True,
        help="force deterministic single-threaded execution (the default mode)",
    )


def _read_config(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _resolve(args):
    file_vals = _read_config(args.config) if args.config else {}
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            if key in file_vals:
                raw = file_vals[key]
                cast = type(default) if default is not None else str
                if cast is bool:
                    raw = raw.lower() in ("1", "true", "yes")
                    setattr(args, key, raw)
                elif key in ("tol",):
                    setattr(args, key, float(raw))
                else:
                    setattr(args, key, cast(raw))
            else:
                setattr(args, key, default)
    if args.case is None:
        raise ValueError("--case is required")
    args.degree_list = [int(d) for d in str(args.degree).split(",")]
    return args


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ndfem",
        description="Two-stage least-squares FEM for elliptic equations in "
        "non-divergence form",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "solve": _cmd_solve,
        "convergence": _cmd_convergence,
        "adapt": _cmd_adapt,
        "check-cordes": _cmd_check_cordes,
    }
    for name in handlers:
        _add_common(sub.add_parser(name))
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        args = _resolve(args)
        return handlers[args.command](args)
    except (NdfemError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
