"""A-posteriori estimation, bulk marking and the adaptive refinement loop.

The element estimator squares are the three residual integrals of the
stage-1 functional at unit penalty,

    eta_K^2 = || A : grad p_h - f ||^2_K
            + sum over interior edges of K of (1/h_e) || [[ p_h (x) n ]] ||^2
            + sum over boundary edges of K of (1/h_e) || p_h x n - grad g x n ||^2,

with every interior edge charged to both incident elements.  The boundary
term keeps the data part so the estimator vanishes on exactly reproduced
solutions; summed over elements it equals the unit-penalty functional with
interior edges counted twice.
"""

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import (
    ErrorNorms,
    SolverConfig,
    error_norms,
    p_boundary_residual_sq,
    p_interior_jump_sq,
    p_volume_residual_sq,
    solve_two_stage,
)
from .mesh import Mesh, bisect, build_rect_mesh
from .problems import ProblemCase


@dataclass(frozen=True)
class EstimatorField:
    """Per-element estimator values eta_K >= 0 and their l2 total."""

    per_element: np.ndarray  # (T,) eta_K
    total: float  # sqrt(sum eta_K^2)
    volume_sq: np.ndarray  # the three parts of eta_K^2, for bookkeeping
    interior_sq: np.ndarray
    boundary_sq: np.ndarray


def estimate(mesh: Mesh, p_h, case: ProblemCase, cfg: SolverConfig) -> EstimatorField:
    """Evaluate the element estimator for a solved stage-1 field."""
    if p_h.mesh is not mesh:
        raise ValueError("p_h was computed on a different mesh")
    vol = p_volume_residual_sq(p_h, case, cfg)
    jump = p_interior_jump_sq(p_h, cfg)
    bnd = p_boundary_residual_sq(p_h, case, cfg)

    T = mesh.n_triangles
    interior_sq = np.zeros(T)
    int_ids = mesh.interior_edge_ids
    np.add.at(interior_sq, mesh.edge_tris[int_ids, 0], jump)
    np.add.at(interior_sq, mesh.edge_tris[int_ids, 1], jump)
    boundary_sq = np.zeros(T)
    np.add.at(boundary_sq, mesh.edge_tris[mesh.boundary_edge_ids, 0], bnd)

    eta_sq = vol + interior_sq + boundary_sq
    return EstimatorField(
        per_element=np.sqrt(eta_sq),
        total=float(np.sqrt(eta_sq.sum())),
        volume_sq=vol,
        interior_sq=interior_sq,
        boundary_sq=boundary_sq,
    )


def dorfler_mark(est: EstimatorField, theta: float):
    """Minimal bulk-marked set: smallest M with sum_M eta_K^2 >= theta * total.

    Built greedily from the largest eta_K down, ties broken by the lower
    element id.  An all-zero estimator yields the empty set.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie strictly between 0 and 1")
    eta_sq = est.per_element**2
    total = eta_sq.sum()
    if total == 0.0:
        return set()
    order = np.lexsort((np.arange(eta_sq.size), -eta_sq))
    csum = np.cumsum(eta_sq[order])
    count = int(np.searchsorted(csum, theta * total - 1e-15 * total) + 1)
    return set(int(i) for i in order[:count])


@dataclass
class AdaptConfig:
    """Adaptive loop parameters."""

    theta: float = 0.4
    max_dofs: int = 200000
    max_rounds: Optional[int] = None
    initial_nx: int = 10
    eta_tol: float = 1e-10  # estimator total below this counts as converged
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie strictly between 0 and 1")
        if self.max_dofs < 1:
            raise ValueError("max_dofs must be positive")


@dataclass
class AdaptRound:
    """One solve-estimate-mark round of the adaptive loop."""

    level: int
    mesh: Mesh
    p: object
    u: object
    estimator: EstimatorField
    errors: ErrorNorms
    marked: set
    cg_iters_p: int
    cg_iters_u: int
    wall_time: float


def adapt_loop(case: ProblemCase, cfg: AdaptConfig, mesh: Optional[Mesh] = None):
    """Run solve -> estimate -> mark -> refine until the stopping rule.

    Stops when the mark set is empty, the stage-1 DOF count reaches
    cfg.max_dofs, or cfg.max_rounds rounds have run.  Returns the list of
    AdaptRound records (every recorded mesh was solved).
    """
    if mesh is None:
        xmin, ymin, xmax, ymax = case.domain
        ar = (ymax - ymin) / (xmax - xmin)
        mesh = build_rect_mesh(
            xmin, ymin, xmax, ymax, cfg.initial_nx, max(1, round(cfg.initial_nx * ar))
        )
    rounds = []
    level = 0
    while True:
        t0 = time.perf_counter()
        sol = solve_two_stage(mesh, case, cfg.solver)
        est = estimate(mesh, sol.p, case, cfg.solver)
        errs = error_norms(sol.p, sol.u, case, cfg.solver)
        dofs_p = sol.p.coeffs.size
        # an estimator at solver-noise level means the solution is exact
        marked = dorfler_mark(est, cfg.theta) if est.total > cfg.eta_tol else set()
        rounds.append(
            AdaptRound(
                level=level,
                mesh=mesh,
                p=sol.p,
                u=sol.u,
                estimator=est,
                errors=errs,
                marked=marked,
                cg_iters_p=sol.stats_p.iterations,
                cg_iters_u=sol.stats_u.iterations,
                wall_time=time.perf_counter() - t0,
            )
        )
        if not marked or dofs_p >= cfg.max_dofs:
            break
        if cfg.max_rounds is not None and level + 1 >= cfg.max_rounds:
            break
        mesh = bisect(mesh, marked)
        level += 1
    return rounds
