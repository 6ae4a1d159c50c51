import numpy as np
import pytest

from ndfem.errors import RefinementError
from ndfem.mesh import bisect, boundary_edges, build_rect_mesh, interior_edges


def min_angle_deg(mesh):
    p = mesh.points[mesh.tris]
    worst = 180.0
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.sum(a * b, axis=1) / (
            np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
        )
        worst = min(worst, np.degrees(np.arccos(np.clip(cosang, -1, 1))).min())
    return worst


def test_unit_square_single_cell():
    mesh = build_rect_mesh(0, 0, 1, 1, 1, 1)
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_triangles) == (4, 5, 2)
    assert mesh.n_vertices - mesh.n_edges + mesh.n_triangles == 1
    mesh.validate()


def test_counts_20x20():
    mesh = build_rect_mesh(-1, -1, 1, 1, 20, 20)
    assert mesh.n_vertices == 441
    assert mesh.n_edges == 1240
    assert mesh.n_triangles == 800
    mesh.validate()


def test_count_formula_matches():
    for nx, ny in [(1, 1), (3, 2), (5, 7)]:
        mesh = build_rect_mesh(0, 0, 2, 1, nx, ny)
        V = (nx + 1) * (ny + 1)
        T = 2 * nx * ny
        assert mesh.n_vertices == V
        assert mesh.n_triangles == T
        assert mesh.n_edges == V + T - 1


def test_h_max_is_cell_diagonal():
    mesh = build_rect_mesh(0, 0, 1, 1, 10, 10)
    assert mesh.h_max == pytest.approx(np.sqrt(2.0) / 10.0, rel=1e-14)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_rect_mesh(0, 0, 1, 1, 0, 3)
    with pytest.raises(ValueError):
        build_rect_mesh(0, 0, 0, 1, 2, 2)
    with pytest.raises(ValueError):
        build_rect_mesh(1, 0, 0, 1, 2, 2)


def test_area_sums_to_domain():
    mesh = build_rect_mesh(-1, -0.5, 2, 1.5, 7, 5)
    assert mesh.areas.sum() == pytest.approx(3.0 * 2.0, rel=1e-10)


def test_edge_partition_and_normals():
    mesh = build_rect_mesh(0, 0, 1, 1, 2, 2)
    inner = interior_edges(mesh)
    outer = boundary_edges(mesh)
    assert len(inner) + len(outer) == mesh.n_edges
    assert len(outer) == 8
    assert mesh.n_triangles == 8
    for e in inner:
        assert len(e.incident_triangles) == 2
        assert e.incident_triangles[0] != e.incident_triangles[1]
    center = np.array([0.5, 0.5])
    for e in outer:
        assert len(e.incident_triangles) == 1
        mid = mesh.points[list(e.vertex_ids)].mean(axis=0)
        # outward normal points away from the domain center
        assert np.dot(e.unit_normal, mid - center) > 0
        assert abs(np.linalg.norm(e.unit_normal) - 1.0) < 1e-14


def test_interior_normal_is_outward_for_first_triangle():
    mesh = build_rect_mesh(0, 0, 1, 1, 2, 2)
    for e in interior_edges(mesh):
        t = e.incident_triangles[0]
        centroid = mesh.points[mesh.tris[t]].mean(axis=0)
        mid = mesh.points[list(e.vertex_ids)].mean(axis=0)
        assert np.dot(e.unit_normal, mid - centroid) > 0


def test_single_interior_edge_two_triangles():
    mesh = build_rect_mesh(0, 0, 1, 1, 1, 1)
    assert len(interior_edges(mesh)) == 1
    assert len(boundary_edges(mesh)) == 4


def test_bisect_empty_marks_returns_same_mesh():
    mesh = build_rect_mesh(0, 0, 1, 1, 2, 2)
    assert bisect(mesh, set()) is mesh


def test_bisect_both_triangles():
    mesh = build_rect_mesh(0, 0, 1, 1, 1, 1)
    fine = bisect(mesh, {0, 1})
    fine.validate()
    assert fine.n_triangles == 4
    # all children congruent halves of the parents
    assert np.allclose(np.sort(fine.areas), 0.25)
    assert fine.areas.sum() == pytest.approx(1.0, rel=1e-12)


def test_bisect_one_marks_forces_neighbour():
    mesh = build_rect_mesh(0, 0, 1, 1, 1, 1)
    fine = bisect(mesh, {0})
    fine.validate()
    assert fine.n_triangles == 4


def test_bisect_bad_mark():
    mesh = build_rect_mesh(0, 0, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        bisect(mesh, {5})


def test_bisect_monotone_diameters_and_conforming():
    rng = np.random.default_rng(3)
    mesh = build_rect_mesh(0, 0, 1, 1, 2, 2)
    for _ in range(6):
        marked = set(
            rng.choice(mesh.n_triangles, size=max(1, mesh.n_triangles // 4), replace=False).tolist()
        )
        fine = bisect(mesh, marked)
        fine.validate()
        assert fine.diameters.max() <= mesh.diameters.max() + 1e-14
        assert fine.areas.sum() == pytest.approx(mesh.areas.sum(), rel=1e-10)
        # no hanging nodes: no vertex strictly inside any edge
        for a, b in fine.edges:
            pa, pb = fine.points[a], fine.points[b]
            d = pb - pa
            L2 = d @ d
            t = ((fine.points - pa) @ d) / L2
            inside = (t > 1e-12) & (t < 1 - 1e-12)
            proj = pa + np.outer(t, d)
            dist = np.linalg.norm(fine.points - proj, axis=1)
            assert not np.any(inside & (dist < 1e-12 * np.sqrt(L2)))
        mesh = fine


def test_shape_regularity_eight_rounds():
    rng = np.random.default_rng(11)
    mesh = build_rect_mesh(0, 0, 1, 1, 2, 2)
    a0 = min_angle_deg(mesh)
    for _ in range(8):
        marked = set(
            rng.choice(mesh.n_triangles, size=max(1, mesh.n_triangles // 5), replace=False).tolist()
        )
        mesh = bisect(mesh, marked)
    assert min_angle_deg(mesh) >= a0 / 2.0 - 1e-9


def test_marked_triangle_is_halved():
    mesh = build_rect_mesh(0, 0, 1, 1, 2, 2)
    parent_area = mesh.areas[3]
    fine = bisect(mesh, {3})
    # the two largest pieces inside the parent have half its area
    assert np.isclose(fine.areas, parent_area / 2).sum() >= 2


def test_refinement_depth_cap():
    # a needle chain cannot occur on right-isosceles meshes; exercise the
    # error path by shrinking the cap
    import ndfem.mesh as mesh_mod

    mesh = build_rect_mesh(0, 0, 1, 1, 4, 4)
    old = mesh_mod._BISECT_DEPTH_CAP
    try:
        mesh_mod._BISECT_DEPTH_CAP = -1
        with pytest.raises(RefinementError):
            bisect(mesh, {0})
    finally:
        mesh_mod._BISECT_DEPTH_CAP = old


def test_triangle_views():
    mesh = build_rect_mesh(0, 0, 1, 1, 1, 1)
    t = mesh.triangle(0)
    assert t.area == pytest.approx(0.5)
    assert t.diameter == pytest.approx(np.sqrt(2.0))
    v = mesh.vertex(3)
    assert (v.x, v.y) == (1.0, 1.0)
