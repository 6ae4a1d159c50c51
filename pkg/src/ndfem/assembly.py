"""Assembly of the two least-squares stages, functionals and error norms.

Stage 1 minimizes, over the piecewise-irrotational space of order m,

    sum_K || A : grad(q) - f ||^2_K
  + sum_{interior e} (mu / h_e) || [[ q x n ]] ||^2_e
  + sum_{boundary e} (mu / h_e) || q x n - grad(g) x n ||^2_e,

where the interior jump of q (x) n is contracted with the Frobenius
product; with unit normals this reduces to the plain dot product of the
side difference, which is how the edge terms are computed here.  Stage 2
minimizes || grad(v) - p_h ||^2 + (1 / h) || v - g ||^2_boundary over the
continuous Lagrange space, with the global mesh size h in the boundary
weight.

The stage-1 system is element-blocked (n_b unknowns per element) and is
stored in block-CSR form; the stage-2 system is plain CSR.
"""

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ._kernels import weighted_gram, weighted_vec
from .mesh import Mesh
from .problems import ProblemCase
from .quadrature import edge_rule, triangle_rule
from .spaces import (
    DiscreteGradientField,
    DiscreteScalarField,
    LagrangeSpace,
    _physical_points,
    basis_dimension,
    irrotational_basis,
    lagrange_space,
    tabulate,
)

_CHUNK = 4096


@dataclass
class SolverConfig:
    """Parameters of the two-stage solve."""

    mu: float = 10.0
    degree: int = 1
    quad_degree_volume: Optional[int] = None  # default 2m + 4
    quad_degree_edge: Optional[int] = None  # default 2m + 2
    cg_tol: float = 1e-12  # tight enough that patch tests are exact to 1e-18
    cg_max_iter: Optional[int] = None  # default 20 * dimension
    u_boundary_weight: str = "global"  # "global" (1/h_max) or "per_edge" (1/h_e)

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("penalty mu must be positive")
        if not 1 <= self.degree <= 3:
            raise ValueError("polynomial degree must be 1, 2 or 3")
        if self.u_boundary_weight not in ("global", "per_edge"):
            raise ValueError("u_boundary_weight must be 'global' or 'per_edge'")

    @property
    def volume_degree(self):
        return self.quad_degree_volume or 2 * self.degree + 4

    @property
    def edge_degree(self):
        return self.quad_degree_edge or 2 * self.degree + 2


@dataclass
class SparseSpdSystem:
    """Symmetric positive-definite sparse system M x = b."""

    dim: int
    matrix: sp.spmatrix
    rhs: np.ndarray
    block_size: int = 1
    space: Optional[object] = None  # LagrangeSpace for the stage-2 system

    def symmetry_defect(self):
        d = self.matrix - self.matrix.T
        scale = abs(self.matrix).max() or 1.0
        return abs(d).max() / scale


def _chunks(n, size=_CHUNK):
    for lo in range(0, n, size):
        yield np.arange(lo, min(lo + size, n))


def _edge_points(mesh, eids, rule):
    a = mesh.points[mesh.edges[eids, 0]]
    b = mesh.points[mesh.edges[eids, 1]]
    t = rule.points
    return a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]


def _a_dot_hess(case, pts, hess):
    a11, a12, a22 = case.coef_sym(pts[..., 0], pts[..., 1])
    return (
        a11[..., None] * hess[..., 0]
        + 2.0 * a12[..., None] * hess[..., 1]
        + a22[..., None] * hess[..., 2]
    )


def _symmetrize(mats):
    return 0.5 * (mats + mats.transpose(0, 2, 1))


def assemble_p(mesh: Mesh, case: ProblemCase, cfg: SolverConfig) -> SparseSpdSystem:
    """Assemble the stage-1 system for the gradient unknown.

    Unknowns are element-blocked: element e owns rows [e*n_b, (e+1)*n_b).
    The matrix combines the volume term (A:grad phi_i)(A:grad phi_j), the
    interior-edge jump penalty and the boundary tangential-trace penalty,
    both weighted by mu/h_e.
    """
    m = cfg.degree
    nb = basis_dimension(m)
    basis = irrotational_basis(mesh, m)
    vol_rule = triangle_rule(cfg.volume_degree)
    ed_rule = edge_rule(cfg.edge_degree)
    T = mesh.n_triangles
    mu = cfg.mu

    diag = np.zeros((T, nb, nb))
    rhs = np.zeros((T, nb))

    for chunk in _chunks(T):
        pts, w = _physical_points(mesh, chunk, vol_rule)
        _, hess = tabulate(basis, chunk, pts)
        AH = _a_dot_hess(case, pts, hess)  # (ce, nq, nb)
        fv = case.f(pts[..., 0], pts[..., 1])
        diag[chunk] += _symmetrize(weighted_gram(AH[..., None], AH[..., None], w))
        rhs[chunk] += weighted_vec(AH[..., None], fv[..., None], w)

    # interior edges: the mu/h_e weight cancels against the edge Jacobian
    int_ids = mesh.interior_edge_ids
    n_int = int_ids.size
    off = np.empty((n_int, nb, nb))
    w_edge = mu * ed_rule.weights
    for pos in _chunks(n_int):
        eids = int_ids[pos]
        kp = mesh.edge_tris[eids, 0]
        km = mesh.edge_tris[eids, 1]
        pts = _edge_points(mesh, eids, ed_rule)
        vp, _ = tabulate(basis, kp, pts, want_hess=False)
        vm, _ = tabulate(basis, km, pts, want_hess=False)
        w = np.broadcast_to(w_edge, (eids.size, w_edge.size))
        spp = _symmetrize(weighted_gram(vp, vp, w))
        smm = _symmetrize(weighted_gram(vm, vm, w))
        spm = weighted_gram(vp, vm, w)
        np.add.at(diag, kp, spp)
        np.add.at(diag, km, smm)
        off[pos] = -spm

    bnd_ids = mesh.boundary_edge_ids
    for pos in _chunks(bnd_ids.size):
        eids = bnd_ids[pos]
        kp = mesh.edge_tris[eids, 0]
        pts = _edge_points(mesh, eids, ed_rule)
        n = mesh.edge_normals[eids]
        vp, _ = tabulate(basis, kp, pts, want_hess=False)
        cross = vp[..., 0] * n[:, None, None, 1] - vp[..., 1] * n[:, None, None, 0]
        gt = case.grad_u(pts[..., 0], pts[..., 1])
        gcross = gt[..., 0] * n[:, None, 1] - gt[..., 1] * n[:, None, 0]
        w = np.broadcast_to(w_edge, (eids.size, w_edge.size))
        np.add.at(diag, kp, _symmetrize(weighted_gram(cross[..., None], cross[..., None], w)))
        np.add.at(rhs, kp, weighted_vec(cross[..., None], gcross[..., None], w))

    kp_all = mesh.edge_tris[int_ids, 0]
    km_all = mesh.edge_tris[int_ids, 1]
    rows = np.concatenate([np.arange(T), kp_all, km_all])
    cols = np.concatenate([np.arange(T), km_all, kp_all])
    data = np.concatenate([diag, off, off.transpose(0, 2, 1)])
    order = np.lexsort((cols, rows))
    indptr = np.zeros(T + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=T), out=indptr[1:])
    matrix = sp.bsr_matrix(
        (data[order], cols[order], indptr), shape=(T * nb, T * nb)
    )
    return SparseSpdSystem(dim=T * nb, matrix=matrix, rhs=rhs.ravel(), block_size=nb)


def _lagrange_volume_tabs(space: LagrangeSpace, rule):
    ref_vals = space.ref.values(rule.points)  # (nq, nl)
    ref_grads = space.ref.gradients(rule.points)  # (nq, nl, 2)
    return ref_vals, ref_grads


def _physical_gradients(mesh, elements, ref_grads):
    p = mesh.points[mesh.tris[elements]]
    j11 = p[:, 1, 0] - p[:, 0, 0]
    j12 = p[:, 2, 0] - p[:, 0, 0]
    j21 = p[:, 1, 1] - p[:, 0, 1]
    j22 = p[:, 2, 1] - p[:, 0, 1]
    det = j11 * j22 - j12 * j21
    # grad_x phi = inv(J)^T grad_ref phi; g1, g2 multiply d_xi, d_eta
    g1 = np.stack([j22, -j12], axis=-1) / det[:, None]
    g2 = np.stack([-j21, j11], axis=-1) / det[:, None]
    return (
        ref_grads[None, :, :, 0, None] * g1[:, None, None, :]
        + ref_grads[None, :, :, 1, None] * g2[:, None, None, :]
    )  # (ne, nq, nl, 2)


def assemble_u(
    mesh: Mesh, case: ProblemCase, cfg: SolverConfig, p_h: DiscreteGradientField
) -> SparseSpdSystem:
    """Assemble the stage-2 system for the scalar unknown.

    Matrix: grad(phi_i) . grad(phi_j) plus the boundary mass term weighted
    by 1/h (global h_max by default); right-hand side couples to the
    stage-1 gradient p_h and the boundary data g.
    """
    if p_h.mesh is not mesh:
        raise ValueError("p_h was computed on a different mesh")
    m = cfg.degree
    space = lagrange_space(mesh, m)
    nl = space.element_dofs.shape[1]
    # all integrands are polynomial of degree <= 2m here
    vol_rule = triangle_rule(2 * m)
    ed_rule = edge_rule(cfg.edge_degree)
    T = mesh.n_triangles

    _, ref_grads = _lagrange_volume_tabs(space, vol_rule)
    rows, cols, vals = [], [], []
    b = np.zeros(space.n_dofs)

    for chunk in _chunks(T):
        pts, w = _physical_points(mesh, chunk, vol_rule)
        grads = _physical_gradients(mesh, chunk, ref_grads)
        mats = _symmetrize(weighted_gram(grads, grads, w))
        pv = p_h.values(chunk, pts)
        loc = weighted_vec(grads, pv, w)
        ed = space.element_dofs[chunk]
        rows.append(np.repeat(ed, nl, axis=1).ravel())
        cols.append(np.tile(ed, (1, nl)).ravel())
        vals.append(mats.ravel())
        np.add.at(b, ed, loc)

    bnd_ids = mesh.boundary_edge_ids
    inv_h = (
        1.0 / mesh.h_max
        if cfg.u_boundary_weight == "global"
        else 1.0 / mesh.edge_lengths[bnd_ids]
    )
    for pos in _chunks(bnd_ids.size):
        eids = bnd_ids[pos]
        kp = mesh.edge_tris[eids, 0]
        pts = _edge_points(mesh, eids, ed_rule)
        ref_pts = space.local_to_reference(kp, pts)
        phi = space.ref.values(ref_pts)  # (ce, nq, nl)
        wfac = inv_h if np.isscalar(inv_h) else inv_h[pos, None]
        w = ed_rule.weights[None, :] * mesh.edge_lengths[eids][:, None] * wfac
        mats = _symmetrize(weighted_gram(phi[..., None], phi[..., None], w))
        gv = case.g(pts[..., 0], pts[..., 1])
        loc = weighted_vec(phi[..., None], gv[..., None], w)
        ed = space.element_dofs[kp]
        rows.append(np.repeat(ed, nl, axis=1).ravel())
        cols.append(np.tile(ed, (1, nl)).ravel())
        vals.append(mats.ravel())
        np.add.at(b, ed, loc)

    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.n_dofs, space.n_dofs),
    ).tocsr()
    return SparseSpdSystem(
        dim=space.n_dofs, matrix=matrix, rhs=b, block_size=1, space=space
    )


# ---------------------------------------------------------------------------
# residual integrals shared by the functionals, the error norms and the
# a-posteriori estimator


def p_volume_residual_sq(p_h, case, cfg):
    """Per-element integral of (A : grad p_h - f)^2."""
    mesh = p_h.mesh
    rule = triangle_rule(cfg.volume_degree)
    out = np.empty(mesh.n_triangles)
    for chunk in _chunks(mesh.n_triangles):
        pts, w = _physical_points(mesh, chunk, rule)
        jac = p_h.jacobians(chunk, pts)
        a11, a12, a22 = case.coef_sym(pts[..., 0], pts[..., 1])
        res = (
            a11 * jac[..., 0] + 2.0 * a12 * jac[..., 1] + a22 * jac[..., 2]
        ) - case.f(pts[..., 0], pts[..., 1])
        out[chunk] = np.sum(res * res * w, axis=1)
    return out


def p_interior_jump_sq(p_h, cfg):
    """Per-interior-edge integral of (1/h_e) |[[p_h (x) n]]|^2."""
    mesh = p_h.mesh
    rule = edge_rule(cfg.edge_degree)
    int_ids = mesh.interior_edge_ids
    out = np.empty(int_ids.size)
    for pos in _chunks(int_ids.size):
        eids = int_ids[pos]
        pts = _edge_points(mesh, eids, rule)
        jump = p_h.values(mesh.edge_tris[eids, 0], pts) - p_h.values(
            mesh.edge_tris[eids, 1], pts
        )
        out[pos] = np.sum(np.sum(jump * jump, axis=-1) * rule.weights, axis=1)
    return out


def p_boundary_residual_sq(p_h, case, cfg):
    """Per-boundary-edge integral of (1/h_e) (p_h x n - grad g x n)^2."""
    mesh = p_h.mesh
    rule = edge_rule(cfg.edge_degree)
    bnd_ids = mesh.boundary_edge_ids
    out = np.empty(bnd_ids.size)
    for pos in _chunks(bnd_ids.size):
        eids = bnd_ids[pos]
        pts = _edge_points(mesh, eids, rule)
        n = mesh.edge_normals[eids]
        pv = p_h.values(mesh.edge_tris[eids, 0], pts)
        gt = case.grad_u(pts[..., 0], pts[..., 1])
        res = (pv[..., 0] - gt[..., 0]) * n[:, None, 1] - (
            pv[..., 1] - gt[..., 1]
        ) * n[:, None, 0]
        out[pos] = np.sum(res * res * rule.weights, axis=1)
    return out


def functional_p_parts(p_h, case, cfg):
    """(volume, interior, boundary) parts of the stage-1 functional at mu = 1."""
    return (
        float(p_volume_residual_sq(p_h, case, cfg).sum()),
        float(p_interior_jump_sq(p_h, cfg).sum()),
        float(p_boundary_residual_sq(p_h, case, cfg).sum()),
    )


def functional_p(p_h, case, cfg) -> float:
    """Value of the stage-1 least-squares functional."""
    vol, intr, bnd = functional_p_parts(p_h, case, cfg)
    return vol + cfg.mu * (intr + bnd)


def functional_u(u_h: DiscreteScalarField, p_h, case, cfg) -> float:
    """Value of the stage-2 functional || grad v - p_h ||^2 + (1/h) || v - g ||^2."""
    mesh = u_h.mesh
    space = u_h.space
    rule = triangle_rule(cfg.volume_degree)
    _, ref_grads = _lagrange_volume_tabs(space, rule)
    total = 0.0
    for chunk in _chunks(mesh.n_triangles):
        pts, w = _physical_points(mesh, chunk, rule)
        grads = _physical_gradients(mesh, chunk, ref_grads)
        gu = np.einsum(
            "eqlc,el->eqc", grads, u_h.coeffs[space.element_dofs[chunk]], optimize=True
        )
        diff = gu - p_h.values(chunk, pts)
        total += float(np.sum(np.sum(diff * diff, axis=-1) * w))

    ed_rule_ = edge_rule(cfg.edge_degree)
    bnd_ids = mesh.boundary_edge_ids
    inv_h = (
        1.0 / mesh.h_max
        if cfg.u_boundary_weight == "global"
        else 1.0 / mesh.edge_lengths[bnd_ids]
    )
    for pos in _chunks(bnd_ids.size):
        eids = bnd_ids[pos]
        kp = mesh.edge_tris[eids, 0]
        pts = _edge_points(mesh, eids, ed_rule_)
        phi = space.ref.values(space.local_to_reference(kp, pts))
        uv = np.einsum("eql,el->eq", phi, u_h.coeffs[space.element_dofs[kp]], optimize=True)
        res = uv - case.g(pts[..., 0], pts[..., 1])
        wfac = inv_h if np.isscalar(inv_h) else inv_h[pos, None]
        w = ed_rule_.weights[None, :] * mesh.edge_lengths[eids][:, None] * wfac
        total += float(np.sum(res * res * w))
    return total


@dataclass(frozen=True)
class ErrorNorms:
    p_l2: float
    p_energy: float
    u_l2: float
    u_energy: float


def error_norms(p_h, u_h, case, cfg) -> ErrorNorms:
    """L2 and energy errors of both stages against the exact solution.

    The stage-1 energy norm combines the broken H1 seminorm, the
    h_e-weighted interior jumps of p_h (the exact gradient is continuous)
    and the boundary tangential-trace error; the stage-2 energy norm is
    the H1 seminorm plus the 1/h-weighted boundary L2 error.
    """
    mesh = p_h.mesh
    vol_rule = triangle_rule(cfg.volume_degree)

    p_l2_sq = 0.0
    p_h1_sq = 0.0
    u_l2_sq = 0.0
    u_h1_sq = 0.0
    space = u_h.space
    _, ref_grads = _lagrange_volume_tabs(space, vol_rule)
    vals_ref = space.ref.values(vol_rule.points)
    for chunk in _chunks(mesh.n_triangles):
        pts, w = _physical_points(mesh, chunk, vol_rule)
        x, y = pts[..., 0], pts[..., 1]
        dp = p_h.values(chunk, pts) - case.grad_u(x, y)
        p_l2_sq += float(np.sum(np.sum(dp * dp, axis=-1) * w))
        dj = p_h.jacobians(chunk, pts) - case.hess_u(x, y)
        frob = dj[..., 0] ** 2 + 2.0 * dj[..., 1] ** 2 + dj[..., 2] ** 2
        p_h1_sq += float(np.sum(frob * w))
        ed = space.element_dofs[chunk]
        du = u_h.coeffs[ed] @ vals_ref.T - case.u(x, y)
        u_l2_sq += float(np.sum(du * du * w))
        grads = _physical_gradients(mesh, chunk, ref_grads)
        dg = np.einsum("eqlc,el->eqc", grads, u_h.coeffs[ed], optimize=True) - case.grad_u(x, y)
        u_h1_sq += float(np.sum(np.sum(dg * dg, axis=-1) * w))

    jump_sq = float(p_interior_jump_sq(p_h, cfg).sum())
    bnd_sq = float(p_boundary_residual_sq(p_h, case, cfg).sum())

    ed_rule_ = edge_rule(cfg.edge_degree)
    bnd_ids = mesh.boundary_edge_ids
    u_bnd_sq = 0.0
    for pos in _chunks(bnd_ids.size):
        eids = bnd_ids[pos]
        kp = mesh.edge_tris[eids, 0]
        pts = _edge_points(mesh, eids, ed_rule_)
        phi = space.ref.values(space.local_to_reference(kp, pts))
        uv = np.einsum("eql,el->eq", phi, u_h.coeffs[space.element_dofs[kp]], optimize=True)
        res = uv - case.u(pts[..., 0], pts[..., 1])
        w = ed_rule_.weights[None, :] * mesh.edge_lengths[eids][:, None] / mesh.h_max
        u_bnd_sq += float(np.sum(res * res * w))

    return ErrorNorms(
        p_l2=np.sqrt(p_l2_sq),
        p_energy=np.sqrt(p_h1_sq + jump_sq + bnd_sq),
        u_l2=np.sqrt(u_l2_sq),
        u_energy=np.sqrt(u_h1_sq + u_bnd_sq),
    )


@dataclass
class TwoStageSolution:
    p: DiscreteGradientField
    u: DiscreteScalarField
    stats_p: "SolveStats"
    stats_u: "SolveStats"
    wall_time: float


def solve_two_stage(mesh: Mesh, case: ProblemCase, cfg: SolverConfig) -> TwoStageSolution:
    """Run both stages: solve for the gradient, then for the scalar."""
    from .linsolve import cg_solve

    t0 = time.perf_counter()
    sys_p = assemble_p(mesh, case, cfg)
    xp, stats_p = cg_solve(
        sys_p, tol=cfg.cg_tol, max_iter=cfg.cg_max_iter, preconditioner="block_jacobi"
    )
    basis = irrotational_basis(mesh, cfg.degree)
    p_h = DiscreteGradientField(
        mesh=mesh, basis=basis, coeffs=xp.reshape(mesh.n_triangles, -1)
    )
    sys_u = assemble_u(mesh, case, cfg, p_h)
    xu, stats_u = cg_solve(
        sys_u, tol=cfg.cg_tol, max_iter=cfg.cg_max_iter, preconditioner="diagonal"
    )
    u_h = DiscreteScalarField(mesh=mesh, space=sys_u.space, coeffs=xu)
    return TwoStageSolution(
        p=p_h,
        u=u_h,
        stats_p=stats_p,
        stats_u=stats_u,
        wall_time=time.perf_counter() - t0,
    )
