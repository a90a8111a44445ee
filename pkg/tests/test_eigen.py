import numpy as np
import pytest

from orbitope_lab.bly import admissible
from orbitope_lab.eigen import (
    RiemannMesh,
    analytic_rotation_check,
    balance,
    balanced_functions,
    bloch_to_p1,
    eigenbound,
    mesh_sphere,
    north_bias_factor,
    rayleigh_bound,
    squashed_factor,
)
from orbitope_lab.errors import MeshError, PreconditionError
from orbitope_lab.gradient import gradient_coords
from orbitope_lab.io import mesh_from_off, mesh_to_off


@pytest.fixture(scope="module")
def mesh4():
    return mesh_sphere(4)


class TestMesh:
    def test_icosahedron(self):
        m = mesh_sphere(0)
        assert m.n_vertices == 12 and len(m.triangles) == 20

    @pytest.mark.parametrize("level", [0, 1, 2, 3, 4])
    def test_counts_and_euler(self, level):
        m = mesh_sphere(level)
        assert m.n_vertices == 10 * 4 ** level + 2
        assert m.euler_characteristic() == 2

    def test_level4_area(self, mesh4):
        assert mesh4.n_vertices == 2562
        assert abs(mesh4.total_mass() - 4 * np.pi) < 1e-3
        assert abs(mesh4.areas.sum() - 4 * np.pi) < 1e-10

    def test_outward_orientation(self, mesh4):
        v, t = mesh4.vertices, mesh4.triangles
        normals = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        assert np.all(np.einsum("ij,ij->i", normals, v[t].mean(axis=1)) > 0)

    def test_negative_level(self):
        with pytest.raises(ValueError):
            mesh_sphere(-1)

    def test_degenerate_triangle(self):
        v = np.array([[0, 0, 1.0], [0, 1e-9, 1.0], [0, 2e-9, 1.0], [1.0, 0, 0]])
        with pytest.raises(MeshError):
            RiemannMesh(v, np.array([[0, 1, 2], [0, 1, 3]]))

    def test_bad_conformal_factor(self):
        with pytest.raises(MeshError):
            mesh_sphere(1, lambda v: -np.ones(len(v)))

    def test_off_round_trip(self):
        m = mesh_sphere(2)
        back = mesh_from_off(mesh_to_off(m))
        assert np.allclose(back.vertices, m.vertices, atol=1e-15)
        assert np.array_equal(back.triangles, m.triangles)


class TestFEM:
    def test_bloch_chart(self, slc2, stdc2, mesh4):
        # mu_p of the chart point is the Bloch vector scaled by 1/2
        f = gradient_coords(stdc2, mesh4.points)
        assert np.allclose(np.sum(f ** 2, axis=1), 0.5, atol=1e-12)
        pts = bloch_to_p1(np.array([[0, 0, 1.0], [0, 0, -1.0]]))
        assert np.allclose(np.abs(pts), [[1, 0], [0, 1]])

    def test_constants_in_kernel(self, mesh4):
        K = mesh4.stiffness()
        assert np.max(np.abs(K @ np.ones(mesh4.n_vertices))) < 1e-10
        assert abs((K - K.T).max()) < 1e-14

    def test_coordinate_energy_converges(self):
        exact = 8 * np.pi / 3
        meshes = [mesh_sphere(k) for k in (3, 4, 5)]
        errs = [abs(m.dirichlet_energy(m.vertices[:, 0]) - exact) for m in meshes]
        assert errs[0] > errs[1] > errs[2] and errs[2] < 5e-3
        # each level halves h; first order needs a ratio of 2, we observe about 4
        assert all(errs[i] / errs[i + 1] > 2 for i in range(2))

    def test_sum_of_squares_constant(self, stdc2, mesh4):
        f = balanced_functions(stdc2, mesh4, np.eye(2))
        assert np.ptp(np.sum(f ** 2, axis=1)) < 1e-6


def moment_z(rep, mesh, a, z):
    w = mesh.vertex_weights
    return float(w @ balanced_functions(rep, mesh, a) @ z / w.sum())


class TestBalance:
    def test_round_identity(self, stdc2, mesh4):
        a, res = balance(stdc2, mesh4)
        assert res < 1e-8
        t = a @ a.conj().T
        assert np.linalg.norm(t - np.eye(2)) < 1e-6

    def test_north_bias(self, stdc2):
        mesh = mesh_sphere(4, north_bias_factor(0.5))
        assert admissible(stdc2, mesh.measure())[0]
        a, res = balance(stdc2, mesh)
        assert res < 1e-8
        z = stdc2.model.p_coords(np.diag([0.5, -0.5]).astype(complex))
        assert moment_z(stdc2, mesh, np.eye(2), z) > 0.05
        assert abs(moment_z(stdc2, mesh, a, z)) < 1e-8
        # an equator point moves south
        eq = np.array([1.0, 1.0]) / np.sqrt(2)
        assert gradient_coords(stdc2, a @ eq) @ z < -0.05

    def test_strong_bias_inadmissible(self, stdc2):
        mesh = mesh_sphere(4, north_bias_factor(1.0))
        assert not admissible(stdc2, mesh.measure())[0]
        with pytest.raises(PreconditionError):
            balance(stdc2, mesh)

    def test_squashed(self, stdc2):
        a, res = balance(stdc2, mesh_sphere(4, squashed_factor()))
        assert res < 1e-8

    def test_wrong_model(self, std3, mesh4):
        with pytest.raises(PreconditionError):
            balance(std3, mesh4)


class TestRayleigh:
    def test_round_level5(self, stdc2):
        r = eigenbound(stdc2, 5)
        assert abs(r.bound - 2) <= 5e-3
        assert r.balancing_residual <= 1e-8 and r.mesh_size == 10242
        assert np.isclose(r.bound, r.numerator / r.denominator)
        assert np.isclose(r.sum_sq_constant, 0.5) and np.isclose(r.scale_factor, 2.0)

    def test_refinement_stable(self, stdc2):
        b4, b5 = eigenbound(stdc2, 4).bound, eigenbound(stdc2, 5).bound
        assert abs(b4 - b5) / b5 < 0.01 and b4 < b5 <= 2

    def test_squashed_exceeds_two(self, stdc2):
        b4 = eigenbound(stdc2, 4, squashed_factor()).bound
        b5 = eigenbound(stdc2, 5, squashed_factor()).bound
        assert b4 > 2 and b5 > 2 and abs(b4 - b5) / b5 < 0.02
        # conformal invariance of the energy: the bound is 8 pi / volume
        vol = mesh_sphere(5, squashed_factor()).total_mass()
        assert abs(b5 - 8 * np.pi / vol) < 0.01

    def test_right_k_invariance(self, stdc2, slc2, mesh4, rng):
        a, _ = balance(stdc2, mesh4)
        for k in slc2.random_k(rng, 3):
            assert analytic_rotation_check(stdc2, mesh4, a, k) < 1e-8

    def test_unbalanced_rejected(self, stdc2, slc2, mesh4):
        a = slc2.exp_p(slc2.p_coords(np.diag([1.0, -1.0]).astype(complex)))
        with pytest.raises(PreconditionError):
            rayleigh_bound(stdc2, mesh4, a)

    def test_report_dict(self, stdc2, mesh4):
        d = rayleigh_bound(stdc2, mesh4, np.eye(2)).to_dict()
        assert set(d) >= {"bound", "numerator", "denominator", "balancing_residual", "mesh_size"}
