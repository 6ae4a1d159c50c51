"""Discrete spaces: the piecewise-irrotational vector space and C0 Lagrange.

The irrotational space of order m on a triangle K is spanned by gradients
of the scaled monomials X^a Y^b, 1 <= a + b <= m + 1, where
X = (x - x_c)/sqrt(T), Y = (y - y_c)/sqrt(T) with (x_c, y_c) the barycenter
and T the area of K.  The scaling keeps the element Gram matrices
uniformly conditioned under refinement.  Each basis function is evaluated
together with its (symmetric) Jacobian, which is the Hessian of the
monomial potential, so the curl vanishes identically.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import basis_tab
from .errors import IllConditionedBasisError
from .mesh import Mesh
from .quadrature import triangle_rule


def basis_dimension(m: int) -> int:
    """Dimension of the order-m irrotational space on one element."""
    if m < 0:
        raise ValueError("degree must be >= 0")
    return (m + 2) * (m + 3) // 2 - 1


def monomial_exponents(m: int) -> np.ndarray:
    """Potential exponents (a, b), total degree 1..m+1, a descending within degree."""
    exps = [
        (a, d - a)
        for d in range(1, m + 2)
        for a in range(d, -1, -1)
    ]
    return np.array(exps, dtype=np.int64)


@dataclass(frozen=True)
class IrrotationalBasis:
    """Per-element basis data for the order-m irrotational space."""

    degree: int
    exponents: np.ndarray  # (n_b, 2)
    centers: np.ndarray  # (T, 2) element barycenters
    areas: np.ndarray  # (T,)

    @property
    def n_local(self):
        return self.exponents.shape[0]


def irrotational_basis(mesh: Mesh, m: int) -> IrrotationalBasis:
    if not 0 <= m:
        raise ValueError("degree must be >= 0")
    centers = mesh.points[mesh.tris].mean(axis=1)
    return IrrotationalBasis(
        degree=m,
        exponents=monomial_exponents(m),
        centers=centers,
        areas=mesh.areas.copy(),
    )


def scaled_coords(basis: IrrotationalBasis, elements, points):
    """Scaled local coordinates X, Y of physical `points` (ne, nq, 2)."""
    c = basis.centers[elements]  # (ne, 2)
    inv = 1.0 / np.sqrt(basis.areas[elements])  # (ne,)
    X = (points[..., 0] - c[:, None, 0]) * inv[:, None]
    Y = (points[..., 1] - c[:, None, 1]) * inv[:, None]
    return X, Y, inv


def tabulate(basis: IrrotationalBasis, elements, points, want_hess=True):
    """Basis values (ne, nq, n_b, 2) and Hessians (ne, nq, n_b, 3) at points.

    `points` has shape (ne, nq, 2) in physical coordinates; Hessians are
    stored as (hxx, hxy, hyy) of the potential, i.e. the symmetric Jacobian
    of the vector basis function.
    """
    X, Y, inv = scaled_coords(basis, elements, points)
    return basis_tab(basis.exponents, X, Y, inv, want_hess)


def irrot_eval(basis: IrrotationalBasis, element: int, point):
    """Values and symmetric 2x2 Jacobians of all basis functions at one point."""
    pt = np.asarray(point, dtype=float).reshape(1, 1, 2)
    vals, hess = tabulate(basis, np.array([element]), pt)
    n = basis.n_local
    out = []
    for i in range(n):
        hxx, hxy, hyy = hess[0, 0, i]
        out.append((vals[0, 0, i].copy(), np.array([[hxx, hxy], [hxy, hyy]])))
    return out


def l2_project(q, basis: IrrotationalBasis, mesh: Mesh, quad_degree=None):
    """Elementwise L2 projection of a vector field onto the irrotational space.

    q maps (x, y) arrays to an (..., 2) array.  Returns coefficients of
    shape (T, n_b).
    """
    m = basis.degree
    rule = triangle_rule(quad_degree if quad_degree is not None else 2 * m + 4)
    T = mesh.n_triangles
    elements = np.arange(T)
    pts, w = _physical_points(mesh, elements, rule)
    vals, _ = tabulate(basis, elements, pts, want_hess=False)
    qv = q(pts[..., 0], pts[..., 1])  # (ne, nq, 2)
    gram = np.einsum("eqic,eqjc,eq->eij", vals, vals, w, optimize=True)
    rhs = np.einsum("eqic,eqc,eq->ei", vals, qv, w, optimize=True)
    try:
        return np.linalg.solve(gram, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise IllConditionedBasisError(f"singular element Gram matrix: {exc}") from exc


def _physical_points(mesh: Mesh, elements, rule):
    """Map a reference rule to each element: points (ne, nq, 2), weights (ne, nq)."""
    p = mesh.points[mesh.tris[elements]]  # (ne, 3, 2)
    xi, eta = rule.points[:, 0], rule.points[:, 1]
    pts = (
        p[:, None, 0, :]
        + xi[None, :, None] * (p[:, None, 1, :] - p[:, None, 0, :])
        + eta[None, :, None] * (p[:, None, 2, :] - p[:, None, 0, :])
    )
    w = rule.weights[None, :] * (2.0 * mesh.areas[elements])[:, None]
    return pts, w


@dataclass(frozen=True)
class DiscreteGradientField:
    """Piecewise-irrotational vector field: n_b coefficients per element."""

    mesh: Mesh
    basis: IrrotationalBasis
    coeffs: np.ndarray  # (T, n_b)

    @property
    def degree(self):
        return self.basis.degree

    def values(self, elements, points):
        vals, _ = tabulate(self.basis, elements, points, want_hess=False)
        return np.einsum("eqic,ei->eqc", vals, self.coeffs[elements], optimize=True)

    def jacobians(self, elements, points):
        """Symmetric Jacobians (hxx, hxy, hyy) of the field, (ne, nq, 3)."""
        _, hess = tabulate(self.basis, elements, points)
        return np.einsum("eqib,ei->eqb", hess, self.coeffs[elements], optimize=True)


# ---------------------------------------------------------------------------
# Continuous Lagrange space of degree 1..3


def _ref_nodes(m):
    # lattice points by barycentric index; vertices first, then edges in the
    # local order (0,1), (1,2), (2,0) traversed from the first vertex, then
    # the interior
    verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    nodes = list(verts)
    for (p, q) in ((0, 1), (1, 2), (2, 0)):
        for s in range(1, m):
            t = s / m
            nodes.append(
                (
                    verts[p][0] + t * (verts[q][0] - verts[p][0]),
                    verts[p][1] + t * (verts[q][1] - verts[p][1]),
                )
            )
    if m == 3:
        nodes.append((1.0 / 3.0, 1.0 / 3.0))
    return np.array(nodes)


def _mono_exps(m):
    return np.array([(a, d - a) for d in range(m + 1) for a in range(d, -1, -1)])


class ReferenceLagrange:
    """Nodal basis on the reference triangle, built from a Vandermonde solve."""

    def __init__(self, m):
        if not 1 <= m <= 3:
            raise ValueError("Lagrange degree must be 1, 2 or 3")
        self.degree = m
        self.nodes = _ref_nodes(m)
        self.exps = _mono_exps(m)
        V = self._mono(self.nodes)
        self.coef = np.linalg.solve(V, np.eye(len(self.nodes)))  # (n_mono, n_node)

    def _mono(self, pts):
        a = self.exps[:, 0]
        b = self.exps[:, 1]
        return pts[..., 0, None] ** a * pts[..., 1, None] ** b

    def values(self, pts):
        return self._mono(np.asarray(pts)) @ self.coef

    def gradients(self, pts):
        pts = np.asarray(pts)
        a = self.exps[:, 0]
        b = self.exps[:, 1]
        ax = np.where(a > 0, a - 1, 0)
        by = np.where(b > 0, b - 1, 0)
        dx = a * pts[..., 0, None] ** ax * pts[..., 1, None] ** b
        dy = b * pts[..., 0, None] ** a * pts[..., 1, None] ** by
        return np.stack([dx @ self.coef, dy @ self.coef], axis=-1)


class LagrangeSpace:
    """Global C0 Lagrange space of degree m on a mesh.

    Global node numbering: mesh vertices, then (m - 1) nodes per edge
    ordered along the stored edge direction, then interior nodes per
    triangle.  element_dofs maps local reference nodes to global numbers.
    """

    def __init__(self, mesh: Mesh, m: int):
        self.mesh = mesh
        self.degree = m
        self.ref = ReferenceLagrange(m)
        V, E, T = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
        per_edge = m - 1
        n_int = {1: 0, 2: 0, 3: 1}[m]
        self.n_dofs = V + E * per_edge + T * n_int

        dofs = np.empty((T, len(self.ref.nodes)), dtype=np.int64)
        dofs[:, :3] = mesh.tris
        if per_edge:
            for k, (p, q) in enumerate(((0, 1), (1, 2), (2, 0))):
                eids = mesh.tri_edges[:, k]
                base = V + eids * per_edge
                forward = mesh.edges[eids, 0] == mesh.tris[:, p]
                for s in range(per_edge):
                    col = 3 + k * per_edge + s
                    dofs[:, col] = np.where(forward, base + s, base + per_edge - 1 - s)
        if n_int:
            dofs[:, 3 + 3 * per_edge:] = (
                V + E * per_edge + np.arange(T)[:, None] * n_int + np.arange(n_int)
            )
        self.element_dofs = dofs

        # node coordinates and boundary flags
        coords = np.zeros((self.n_dofs, 2))
        coords[:V] = mesh.points
        boundary = np.zeros(self.n_dofs, dtype=bool)
        bverts = mesh.edges[mesh.boundary_edge_ids]
        boundary[np.unique(bverts)] = True
        if per_edge:
            a = mesh.points[mesh.edges[:, 0]]
            b = mesh.points[mesh.edges[:, 1]]
            for s in range(per_edge):
                t = (s + 1) / m
                coords[V + np.arange(E) * per_edge + s] = a + t * (b - a)
            for e in mesh.boundary_edge_ids:
                boundary[V + e * per_edge + np.arange(per_edge)] = True
        if n_int:
            coords[V + E * per_edge:] = mesh.points[mesh.tris].mean(axis=1)
        self.node_coords = coords
        self.is_boundary_node = boundary

    def local_to_reference(self, elements, points):
        """Invert the affine map of each element at the given physical points."""
        p = self.mesh.points[self.mesh.tris[elements]]
        d = points - p[:, None, 0, :]
        j11 = p[:, 1, 0] - p[:, 0, 0]
        j12 = p[:, 2, 0] - p[:, 0, 0]
        j21 = p[:, 1, 1] - p[:, 0, 1]
        j22 = p[:, 2, 1] - p[:, 0, 1]
        det = (j11 * j22 - j12 * j21)[:, None]
        xi = (j22[:, None] * d[..., 0] - j12[:, None] * d[..., 1]) / det
        eta = (-j21[:, None] * d[..., 0] + j11[:, None] * d[..., 1]) / det
        return np.stack([xi, eta], axis=-1)


def lagrange_space(mesh: Mesh, m: int) -> LagrangeSpace:
    return LagrangeSpace(mesh, m)


def lagrange_eval(space: LagrangeSpace, element: int, point):
    """Values and physical gradients of the element shape functions at a point."""
    pts = np.asarray(point, dtype=float).reshape(1, 1, 2)
    ref_pts = space.local_to_reference(np.array([element]), pts)[0]
    vals = space.ref.values(ref_pts)[0]
    grads_ref = space.ref.gradients(ref_pts)[0]  # (n, 2)
    p = space.mesh.points[space.mesh.tris[element]]
    J = np.array([p[1] - p[0], p[2] - p[0]]).T
    grads = grads_ref @ np.linalg.inv(J)
    return vals, grads


@dataclass(frozen=True)
class DiscreteScalarField:
    """Continuous scalar field given by Lagrange coefficients."""

    mesh: Mesh
    space: LagrangeSpace
    coeffs: np.ndarray  # (n_dofs,)

    @property
    def degree(self):
        return self.space.degree

    def values(self, elements, ref_values):
        """Field values given tabulated reference basis values (nq, n_loc)."""
        return self.coeffs[self.space.element_dofs[elements]] @ ref_values.T

    def eval_at(self, element: int, point):
        vals, _ = lagrange_eval(self.space, element, point)
        return float(self.coeffs[self.space.element_dofs[element]] @ vals)
