import itertools

import numpy as np
import pytest
import scipy.spatial

from oracles import in_hull_lp, subspace_gap
from orbitope_lab.errors import ConstructionError, UnsupportedDimensionError
from orbitope_lab.faces import (
    convex_hull,
    exposed_face,
    face_classes_containing,
    face_correspondence,
    face_lattice,
    hausdorff,
    moment_polytope,
    orbitope_membership,
    orbitope_slack,
    weyl_orbit,
)
from orbitope_lab.gradient import flow_limit, gradient_coords, max_locus, sample_closed_orbit
from orbitope_lab.groups import build_model
from orbitope_lab.io import polytope_to_dict, polytope_vertices_csv
from orbitope_lab.representation import build_representation


def a_of(model, *d):
    return model.a_coords(np.diag(np.array(d, dtype=float)))


@pytest.fixture(scope="module")
def triangle(std3):
    return moment_polytope(std3)


@pytest.fixture(scope="module")
def tetra(std4):
    return moment_polytope(std4)


class TestPolytope:
    def test_triangle_vertices(self, std3, triangle):
        m = std3.model
        expected = np.array([a_of(m, *np.roll([2 / 3, -1 / 3, -1 / 3], i)) for i in range(3)])
        assert hausdorff(triangle.vertices, expected) < 1e-10
        sides = [np.linalg.norm(a - b) for a, b in itertools.combinations(triangle.vertices, 2)]
        assert np.ptp(sides) < 1e-12

    def test_segment(self, std2):
        P = moment_polytope(std2)
        assert P.vertices.shape == (2, 1) and np.isclose(P.vertices[0, 0], -P.vertices[1, 0])

    def test_sym2_interior_weight(self):
        rep = build_representation(build_model("SL_R", 2), "sym(2, standard)")
        P = moment_polytope(rep)
        assert len(P.vertices) == 2
        assert P.slack(np.zeros(1)) > 0.1

    def test_h_and_v_agree(self, tetra):
        for v in tetra.vertices:
            tight = [abs(o - n @ v) < 1e-9 for n, o in tetra.facets]
            assert sum(tight) >= tetra.ambient_dim
            assert tetra.slack(v) > -1e-9

    @pytest.mark.parametrize("expr,n", [("standard", 4), ("wedge(2, standard)", 4), ("sym(2, standard)", 3),
                                         ("standard", 5)])
    def test_against_scipy(self, expr, n):
        rep = build_representation(build_model("SL_R", n), expr)
        P = moment_polytope(rep)
        hull = scipy.spatial.ConvexHull(rep.weights.vectors())
        ref = rep.weights.vectors()[hull.vertices]
        assert hausdorff(P.vertices, ref) < 1e-10
        # every scipy facet is one of ours
        for eq in hull.equations:
            n_, off = eq[:-1], -eq[-1]
            assert any(np.allclose(n_, a, atol=1e-8) and np.isclose(off, b, atol=1e-8) for a, b in P.facets)

    def test_weyl_orbit_hull(self, std4, tetra):
        assert hausdorff(weyl_orbit(std4.model, std4.weights.mu), tetra.vertices) < 1e-10

    def test_rank_too_large(self):
        rep = build_representation(build_model("SL_R", 6), "standard")
        with pytest.raises(UnsupportedDimensionError):
            moment_polytope(rep)

    def test_degenerate(self):
        with pytest.raises(ConstructionError):
            convex_hull(np.array([[0.0, 0], [1, 1], [2, 2]]))

    def test_export(self, triangle):
        d = polytope_to_dict(triangle)
        assert len(d["vertices"]) == 3 and len(d["facets"]) == 3
        assert polytope_vertices_csv(triangle).count("\n") == 4


class TestExposedFace:
    def test_vertex(self, std3, triangle):
        m = std3.model
        x1, x2 = a_of(m, 2 / 3, -1 / 3, -1 / 3), a_of(m, -1 / 3, 2 / 3, -1 / 3)
        f = exposed_face(triangle, x2 - x1)
        assert len(f.vertex_subset) == 1
        assert np.allclose(triangle.vertices[f.vertex_subset[0]], x2, atol=1e-10)

    def test_edge(self, std3, triangle):
        m = std3.model
        f = exposed_face(triangle, a_of(m, 1, 1, -2))
        got = triangle.vertices[list(f.vertex_subset)]
        expected = np.array([a_of(m, 2 / 3, -1 / 3, -1 / 3), a_of(m, -1 / 3, 2 / 3, -1 / 3)])
        assert hausdorff(got, expected) < 1e-10 and f.dim_face == 1

    def test_zero(self, triangle):
        f = exposed_face(triangle, np.zeros(2))
        assert len(f.vertex_subset) == 3 and f.dim_face == 2


class TestLattice:
    def test_triangle(self, std3, triangle):
        lat = face_lattice(triangle, std3.model)
        assert lat.count_by_dim() == {0: 3, 1: 3, 2: 1}
        assert len({lat.orbit_of[i] for i in lat.proper()}) == 2

    def test_segment(self, std2):
        lat = face_lattice(moment_polytope(std2), std2.model)
        assert lat.count_by_dim() == {0: 2, 1: 1}
        assert len({lat.orbit_of[i] for i in lat.proper()}) == 1

    def test_tetrahedron(self, std4, tetra):
        lat = face_lattice(tetra, std4.model)
        assert lat.count_by_dim() == {0: 4, 1: 6, 2: 4, 3: 1}
        assert len({lat.orbit_of[i] for i in lat.proper()}) == 3

    def test_inclusions_brute_force(self, std3, triangle):
        lat = face_lattice(triangle, std3.model)
        for i, j in itertools.permutations(range(len(lat.faces)), 2):
            assert ((i, j) in lat.inclusions) == (set(lat.faces[i]) < set(lat.faces[j]))

    @pytest.mark.parametrize("n,expr", [(3, "standard"), (3, "sym(2, standard)"), (4, "standard"),
                                         (4, "wedge(2, standard)")])
    def test_every_face_exposed(self, n, expr):
        rep = build_representation(build_model("SL_R", n), expr)
        P = moment_polytope(rep)
        lat = face_lattice(P, rep.model)
        for face in lat.faces:
            normals = [nv for nv, off in P.facets
                       if all(abs(off - nv @ P.vertices[v]) < 1e-9 for v in face)]
            beta = sum(normals) if normals else np.zeros(P.ambient_dim)
            assert exposed_face(P, beta).vertex_subset == face

    def test_ext_of_face(self, tetra, std4):
        lat = face_lattice(tetra, std4.model)
        for face in lat.faces:
            pts = tetra.vertices[list(face)]
            for v in pts:  # every listed vertex is extreme in its face
                others = np.array([p for p in pts if not np.allclose(p, v)])
                if len(others):
                    assert not in_hull_lp(others, v)


class TestCorrespondence:
    def test_sl3(self, std3, triangle):
        faces = {f.I: f for f in face_correspondence(std3, triangle)}
        e = np.eye(3)
        assert len(faces[()].vertex_subset) == 1
        assert subspace_gap(faces[()].W_I_basis, e[:, :1]) < 1e-10
        assert len(faces[(0,)].vertex_subset) == 2
        assert subspace_gap(faces[(0,)].W_I_basis, e[:, :2]) < 1e-10
        assert len(faces[(0, 1)].vertex_subset) == 3

    @pytest.mark.parametrize("n,expr", [(3, "standard"), (4, "standard"), (4, "wedge(2, standard)"),
                                         (3, "sym(2, standard)")])
    def test_bijection(self, n, expr):
        rep = build_representation(build_model("SL_R", n), expr)
        P = moment_polytope(rep)
        faces = face_correspondence(rep, P)
        lat = face_lattice(P, rep.model)
        classes = face_classes_containing(P, lat, rep.weights.mu)
        assert len(faces) == len(classes)
        assert {lat.orbit_of[lat.faces.index(tuple(sorted(f.vertex_subset)))] for f in faces} == classes
        for f in faces:
            assert subspace_gap(f.W_I_basis, max_locus(rep, f.defining_beta)) < 1e-8

    def test_orbit_maximum_lands_on_extreme_points(self, std3):
        m = std3.model
        beta = a_of(m, 1, 1, -2)
        top = moment_polytope(std3).support(beta)
        s = sample_closed_orbit(std3, 200, 3)
        for x in s.points:
            y = flow_limit(std3, x, beta).vector
            mu = gradient_coords(std3, y)
            assert abs(mu @ m.p_coords(beta) - top) < 1e-9
            h, _ = m.chamber_project(mu)
            assert np.allclose(h, std3.weights.mu, atol=1e-9)


class TestMembership:
    def test_examples(self, std3, triangle):
        m = std3.model
        x1 = m.p_coords(np.diag([2 / 3, -1 / 3, -1 / 3]))
        assert orbitope_membership(std3, x1, triangle)
        assert orbitope_membership(std3, np.zeros(5), triangle, slack=1e-8)
        assert not orbitope_membership(std3, 2 * x1, triangle)

    def test_k_rotated(self, std3, triangle, rng):
        m = std3.model
        x = m.p_matrix(m.p_coords(0.9 * np.diag([2 / 3, -1 / 3, -1 / 3])))
        for k in m.random_k(rng, 10):
            assert orbitope_membership(std3, k @ x @ k.T, triangle)
            assert orbitope_slack(std3, k @ x @ k.T, triangle) > 0
