import numpy as np
import pytest

from dwrflow.errors import IoError
from dwrflow.geometry import Circle, Naca4, Polyline
from dwrflow.leafmesh import LeafMesh
from dwrflow.meshgen import builtin_airfoil_omesh, builtin_channel_bump
from dwrflow.meshio import read_meshfile, write_meshfile


class TestChannelBump:
    def test_flat_bump_is_rectangle(self):
        mesh = LeafMesh(builtin_channel_bump(8, 4, 0.0))
        assert mesh.total_area == pytest.approx(4.0, abs=1e-12)

    def test_cell_count(self):
        mesh = LeafMesh(builtin_channel_bump(10, 5, 0.05))
        assert mesh.n_cells == 2 * 10 * 5

    def test_wall_is_connected_open_polyline(self):
        mesh = LeafMesh(builtin_channel_bump(8, 4, 0.05))
        w = mesh.boundary_faces("wall")
        ends = {}
        for a, b in mesh.b_verts[w]:
            for v in (int(a), int(b)):
                ends[v] = ends.get(v, 0) + 1
        degree_one = [v for v, c in ends.items() if c == 1]
        assert len(degree_one) == 2  # one inlet end, one outlet end
        assert all(c <= 2 for c in ends.values())
        xs = mesh.vertices[degree_one, 0]
        assert set(np.sign(xs)) == {-1.0, 1.0}

    def test_refined_wall_midpoints_on_bump(self):
        tree = builtin_channel_bump(8, 4, 0.1)
        mesh = LeafMesh(tree)
        w = mesh.boundary_faces("wall")
        wall_cells = sorted(set(mesh.b_cell[w].tolist()))
        fine = LeafMesh(tree.refine_cells([mesh.cell_nodes[c] for c in wall_cells]))
        wf = fine.boundary_faces("wall")
        for a, b in fine.b_verts[wf]:
            for v in (int(a), int(b)):
                x, y = fine.vertices[v]
                assert y == pytest.approx(0.1 * np.exp(-4.0 * x * x), abs=1e-14)


class TestAirfoilOmesh:
    def test_wall_loop_closed(self):
        mesh = LeafMesh(builtin_airfoil_omesh("0012", 32, 8))
        w = mesh.boundary_faces("wall")
        s = (mesh.b_normal[w] * mesh.b_length[w][:, None]).sum(axis=0)
        assert np.abs(s).max() < 1e-12

    def test_outer_vertices_on_circle(self):
        mesh = LeafMesh(builtin_airfoil_omesh("0012", 32, 8, outer_radius=35.0))
        ff = mesh.boundary_faces("farfield")
        vids = sorted(set(mesh.b_verts[ff].ravel().tolist()))
        r = np.hypot(mesh.vertices[vids, 0] - 0.5, mesh.vertices[vids, 1])
        assert np.abs(r - 35.0).max() < 1e-12

    def test_naca0012_thickness(self):
        naca = Naca4("0012")
        th = np.linspace(0, np.pi, 4000)
        pts = naca.point(th)
        k = int(np.argmax(pts[:, 1]))
        assert pts[k, 1] == pytest.approx(0.06, abs=2e-3)
        assert pts[k, 0] == pytest.approx(0.30, abs=0.02)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            builtin_airfoil_omesh("0012", 31, 8)
        with pytest.raises(ValueError):
            builtin_airfoil_omesh("0012", 32, 4)


class TestGeometryCurves:
    def test_circle_projection(self):
        c = Circle(1.0, 2.0, 3.0)
        p = c.project((5.0, 2.0))
        assert p == pytest.approx((4.0, 2.0))

    def test_polyline_projection(self):
        pl = Polyline([(0, 0), (1, 0), (1, 1)])
        assert pl.project((0.5, 0.4)) == pytest.approx((0.5, 0.0))
        assert pl.project((2.0, 0.5)) == pytest.approx((1.0, 0.5))
        assert pl.project((5.0, 5.0)) == pytest.approx((1.0, 1.0))

    def test_naca_projection_is_near_fixed_point_on_curve(self):
        naca = Naca4("2412", chord=2.0, x0=1.0, y0=-0.5)
        pts = naca.point(np.linspace(0.3, 5.9, 17))
        for q in pts:
            p = np.array(naca.project(q))
            assert np.hypot(*(p - q)) < 1e-8


class TestMeshFile:
    def test_round_trip_exact(self, tmp_path):
        tree = builtin_airfoil_omesh("0012", 32, 8)
        mesh = LeafMesh(tree)
        path = tmp_path / "omesh.msh"
        write_meshfile(path, mesh, tree.geometry)
        back = read_meshfile(path)
        m2 = LeafMesh(back)
        assert m2.n_cells == mesh.n_cells
        assert np.array_equal(m2.cell_verts, mesh.cell_verts)
        assert np.array_equal(m2.vertices, mesh.vertices)
        assert sorted(m2.markers) == sorted(mesh.markers)
        assert set(back.geometry) == {"wall", "farfield"}

    def test_polyline_geometry(self, tmp_path):
        tree = builtin_channel_bump(8, 4, 0.05)
        mesh = LeafMesh(tree)
        xs = np.linspace(-2, 2, 200)
        np.savetxt(tmp_path / "bump.xy", np.column_stack([xs, 0.05 * np.exp(-4 * xs**2)]))
        path = tmp_path / "bump.msh"
        write_meshfile(path, mesh, {"wall": Polyline(np.zeros((2, 2)), source="bump.xy")})
        back = read_meshfile(path)
        assert isinstance(back.geometry["wall"], Polyline)
        p = back.geometry["wall"].project((0.0, 0.2))
        assert p[1] == pytest.approx(0.05, abs=1e-3)

    def test_clockwise_triangle_rejected(self, tmp_path):
        path = tmp_path / "bad.msh"
        path.write_text("VERTICES 3\n0 0 0\n1 1 0\n2 0 1\n"
                        "TRIANGLES 1\n0 0 2 1\n"
                        "BOUNDARY 3\n0 0 1 w\n1 1 2 w\n2 2 0 w\n")
        with pytest.raises(IoError, match="counterclockwise"):
            read_meshfile(path)

    def test_unmarked_boundary_edge_rejected(self, tmp_path):
        path = tmp_path / "bad2.msh"
        path.write_text("VERTICES 3\n0 0 0\n1 1 0\n2 0 1\n"
                        "TRIANGLES 1\n0 0 1 2\n"
                        "BOUNDARY 2\n0 0 1 w\n1 1 2 w\n")
        with pytest.raises(IoError, match="no marker"):
            read_meshfile(path)
