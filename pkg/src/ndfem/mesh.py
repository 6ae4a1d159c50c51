"""Conforming triangulations of rectangles and longest-edge bisection.

A Mesh stores flat numpy entity tables and is immutable after
construction: refinement returns a new Mesh.  Edge normals follow one
fixed convention, outward from the first incident triangle (for boundary
edges that is the outward normal of the domain), which pins the sign of
all jump quantities used by the assembly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RefinementError

_BISECT_DEPTH_CAP = 64


@dataclass(frozen=True)
class Vertex:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Triangle:
    id: int
    vertex_ids: tuple
    edge_ids: tuple
    diameter: float
    area: float


@dataclass(frozen=True)
class Edge:
    id: int
    vertex_ids: tuple
    length: float
    unit_normal: np.ndarray
    incident_triangles: tuple
    is_boundary: bool


class Mesh:
    """Conforming triangular mesh.

    Attributes
    ----------
    points : (V, 2) float array of vertex coordinates.
    tris : (T, 3) int array of vertex ids, counter-clockwise.
    tri_edges : (T, 3) int array; local edge k joins local vertices k and
        (k + 1) % 3.
    edges : (E, 2) int array of vertex ids in storage order.
    edge_tris : (E, 2) int array of incident triangle ids; second entry is
        -1 for boundary edges.
    edge_normals : (E, 2) unit normals, outward from edge_tris[:, 0].
    """

    def __init__(self, points, tris):
        points = np.asarray(points, dtype=float)
        tris = np.asarray(tris, dtype=np.int64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("points must have shape (V, 2)")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise ValueError("tris must have shape (T, 3)")
        self.points = points
        self.tris = tris
        self._build_geometry()
        self._build_edges()
        self.points.setflags(write=False)
        self.tris.setflags(write=False)

    def _build_geometry(self):
        p = self.points[self.tris]  # (T, 3, 2)
        d01 = p[:, 1] - p[:, 0]
        d02 = p[:, 2] - p[:, 0]
        signed = 0.5 * (d01[:, 0] * d02[:, 1] - d01[:, 1] * d02[:, 0])
        if np.any(signed <= 0.0):
            raise ValueError("all triangles must be counter-clockwise with positive area")
        self.areas = signed
        sides = np.stack(
            [
                np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
                np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
                np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
            ],
            axis=1,
        )
        self._side_lengths = sides
        self.diameters = sides.max(axis=1)
        self.h_max = float(self.diameters.max())

    def _build_edges(self):
        T = self.n_triangles
        # local edge k = (v_k, v_{k+1}); first encounter fixes storage order
        va = self.tris
        vb = self.tris[:, [1, 2, 0]]
        lo = np.minimum(va, vb).ravel()
        hi = np.maximum(va, vb).ravel()
        keys = lo * self.n_vertices + hi
        uniq, first_pos, inverse = np.unique(keys, return_index=True, return_inverse=True)
        # renumber edges by first appearance (row-major over (tri, local))
        order = np.argsort(first_pos, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        edge_of_slot = rank[inverse].reshape(T, 3)
        self.tri_edges = edge_of_slot
        E = uniq.size
        first_slot = np.sort(first_pos)
        self.edges = np.column_stack([va.ravel()[first_slot], vb.ravel()[first_slot]])

        eids = edge_of_slot.ravel()
        counts = np.bincount(eids, minlength=E)
        if counts.max() > 2:
            raise ValueError("edge shared by more than two triangles")
        slot_tri = np.repeat(np.arange(T), 3)
        tri_sum = np.bincount(eids, weights=slot_tri, minlength=E).astype(np.int64)
        edge_tris = np.full((E, 2), -1, dtype=np.int64)
        edge_tris[:, 0] = first_slot // 3  # first incident = first appearance
        two = counts == 2
        edge_tris[two, 1] = tri_sum[two] - edge_tris[two, 0]
        self.edge_tris = edge_tris
        self.is_boundary_edge = edge_tris[:, 1] == -1

        dv = self.points[self.edges[:, 1]] - self.points[self.edges[:, 0]]
        self.edge_lengths = np.linalg.norm(dv, axis=1)
        # storage order runs counter-clockwise around the first incident
        # triangle, so (dy, -dx) points out of it
        self.edge_normals = np.column_stack([dv[:, 1], -dv[:, 0]]) / self.edge_lengths[:, None]

        self.interior_edge_ids = np.flatnonzero(~self.is_boundary_edge)
        self.boundary_edge_ids = np.flatnonzero(self.is_boundary_edge)

    @property
    def n_vertices(self):
        return self.points.shape[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def n_triangles(self):
        return self.tris.shape[0]

    def vertex(self, i: int) -> Vertex:
        return Vertex(id=i, x=float(self.points[i, 0]), y=float(self.points[i, 1]))

    def triangle(self, i: int) -> Triangle:
        return Triangle(
            id=i,
            vertex_ids=tuple(int(v) for v in self.tris[i]),
            edge_ids=tuple(int(e) for e in self.tri_edges[i]),
            diameter=float(self.diameters[i]),
            area=float(self.areas[i]),
        )

    def edge(self, i: int) -> Edge:
        inc = tuple(int(t) for t in self.edge_tris[i] if t >= 0)
        return Edge(
            id=i,
            vertex_ids=tuple(int(v) for v in self.edges[i]),
            length=float(self.edge_lengths[i]),
            unit_normal=self.edge_normals[i].copy(),
            incident_triangles=inc,
            is_boundary=bool(self.is_boundary_edge[i]),
        )

    def longest_edge_of(self, t: int) -> int:
        # ties resolved by local slot order; never ambiguous on meshes
        # descended from right-isosceles grids
        k = int(np.argmax(self._side_lengths[t]))
        return int(self.tri_edges[t, k])

    def validate(self):
        """Assert the structural invariants; intended for tests."""
        assert np.all(np.isfinite(self.points))
        assert self.n_vertices - self.n_edges + self.n_triangles == 1
        assert np.all(self.areas > 0.0)
        norms = np.linalg.norm(self.edge_normals, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-14
        counts = np.bincount(self.tri_edges.ravel(), minlength=self.n_edges)
        assert np.all(counts[self.interior_edge_ids] == 2)
        assert np.all(counts[self.boundary_edge_ids] == 1)


def interior_edges(mesh: Mesh):
    """Edges shared by two triangles."""
    return [mesh.edge(int(i)) for i in mesh.interior_edge_ids]


def boundary_edges(mesh: Mesh):
    """Edges on the domain boundary."""
    return [mesh.edge(int(i)) for i in mesh.boundary_edge_ids]


def build_rect_mesh(xmin, ymin, xmax, ymax, nx: int, ny: int) -> Mesh:
    """Uniform triangulation of a rectangle.

    Each of the nx x ny cells is split along its lower-left to upper-right
    diagonal into two counter-clockwise triangles.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("domain rectangle is degenerate")
    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    points = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    tris = np.empty((2 * nx * ny, 3), dtype=np.int64)
    k = 0
    for j in range(ny):
        for i in range(nx):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            tris[k] = (v00, v10, v11)
            tris[k + 1] = (v00, v11, v01)
            k += 2
    return Mesh(points, tris)


def bisect(mesh: Mesh, marked) -> Mesh:
    """Longest-edge bisection of the marked triangles, with conforming closure.

    Every marked triangle is bisected at its longest edge; neighbours are
    bisected recursively until no hanging nodes remain.  Returns a new Mesh;
    an empty mark set returns the input unchanged.
    """
    marked = sorted({int(t) for t in marked})
    if marked and (marked[0] < 0 or marked[-1] >= mesh.n_triangles):
        raise ValueError("marked triangle id out of range")
    if not marked:
        return mesh

    split = np.zeros(mesh.n_edges, dtype=bool)

    def ensure_split(eid, depth):
        if split[eid]:
            return
        if depth > _BISECT_DEPTH_CAP:
            raise RefinementError(
                f"bisection closure exceeded depth {_BISECT_DEPTH_CAP}"
            )
        split[eid] = True
        for t in mesh.edge_tris[eid]:
            if t < 0:
                continue
            le = mesh.longest_edge_of(int(t))
            if le != eid:
                ensure_split(le, depth + 1)

    for t in marked:
        ensure_split(mesh.longest_edge_of(t), 0)

    split_ids = np.flatnonzero(split)
    midpoint_of = {}
    new_points = [mesh.points]
    next_vid = mesh.n_vertices
    mids = 0.5 * (mesh.points[mesh.edges[split_ids, 0]] + mesh.points[mesh.edges[split_ids, 1]])
    for eid, mid in zip(split_ids, mids):
        midpoint_of[int(eid)] = next_vid
        next_vid += 1
    new_points.append(mids)
    points = np.vstack(new_points)

    split_pairs = {
        (int(mesh.edges[e, 0]), int(mesh.edges[e, 1])): m
        for e, m in midpoint_of.items()
    }

    def midpoint(a, b):
        m = split_pairs.get((a, b))
        return m if m is not None else split_pairs.get((b, a))

    def side_len(a, b):
        return np.linalg.norm(points[a] - points[b])

    out = []

    def subdivide(a, b, c):
        # split at the longest edge that carries a midpoint; children of a
        # split never introduce new midpoints, so this recursion is <= 2 deep
        cand = []
        for (u, v, w) in ((a, b, c), (b, c, a), (c, a, b)):
            m = midpoint(u, v)
            if m is not None:
                cand.append((side_len(u, v), u, v, w, m))
        if not cand:
            out.append((a, b, c))
            return
        _, u, v, w, m = max(cand, key=lambda it: (it[0], -it[1], -it[2]))
        subdivide(u, m, w)
        subdivide(m, v, w)

    for a, b, c in mesh.tris:
        subdivide(int(a), int(b), int(c))

    return Mesh(points, np.array(out, dtype=np.int64))
