import math
import warnings

import numpy as np
import pytest

from oracles import in_hull_lp, subspace_gap
from orbitope_lab.errors import IrreducibilityError, ParseError, PreconditionError
from orbitope_lab.faces import weyl_orbit
from orbitope_lab.gradient import max_locus
from orbitope_lab.groups import build_model
from orbitope_lab.representation import (
    build_representation,
    is_mu_tau_connected,
    mu_tau_connected_subsets,
    parse_expression,
    subspace_VI,
)

BUILT_IN = [
    ("SL_R", 2, "standard"), ("SL_R", 2, "sym(2, standard)"), ("SL_R", 3, "standard"),
    ("SL_R", 3, "dual"), ("SL_R", 3, "sym(2, standard)"), ("SL_R", 4, "standard"),
    ("SL_R", 4, "wedge(2, standard)"), ("SL_C", 2, "standard"), ("SL_C", 2, "sym(3, standard)"),
]


@pytest.fixture(scope="module", params=BUILT_IN, ids=lambda p: f"{p[0]}{p[1]}-{p[2]}")
def any_rep(request):
    family, n, expr = request.param
    return build_representation(build_model(family, n), expr)


def find_weight(rep, diag):
    target = rep.model.a_coords(np.diag(diag))
    for w in rep.weights.weights:
        if np.allclose(w.vector, target, atol=1e-9):
            return w
    raise AssertionError("weight not found")


class TestBuild:
    def test_standard(self, std3, sl3):
        assert std3.dimV == 3
        for d, b in zip(std3.dtau_p, sl3.p_basis):
            assert np.allclose(d, b)

    def test_dimensions(self):
        assert build_representation(build_model("SL_R", 2), "sym(2, standard)").dimV == 3
        assert build_representation(build_model("SL_R", 4), "wedge(2, standard)").dimV == 6
        assert build_representation(build_model("SL_R", 3), "sym(3, standard)").dimV == math.comb(5, 3)

    def test_reducible_tensor(self, sl3):
        with pytest.raises(IrreducibilityError) as exc:
            build_representation(sl3, "tensor(standard, standard)")
        assert exc.value.context["commutant_dim"] == 2

    def test_parse_errors(self):
        with pytest.raises(ParseError):
            parse_expression("sym(2 standard)", 3)
        with pytest.raises(ParseError):
            parse_expression("frobnicate", 3)

    def test_homomorphism_and_compatibility(self, any_rep):
        assert any_rep.homomorphism_residual() < 1e-8
        for d in any_rep.dtau_p:
            assert np.allclose(d, d.conj().T)
        for d in any_rep.dtau_k:
            assert np.allclose(d, -d.conj().T)

    def test_group_action_matches_lie(self, any_rep, rng):
        m = any_rep.model
        xi = 0.3 * m.random_p(rng)
        g = m.exp_p(xi)
        w, v = np.linalg.eigh(any_rep.dtau_beta(xi))
        assert np.allclose(any_rep.tau(g), (v * np.exp(w)) @ v.conj().T, atol=1e-9)


class TestWeights:
    def test_sl3_standard(self, std3):
        table = std3.weights
        assert len(table.weights) == 3
        assert np.allclose(std3.model.a_matrix(table.mu), np.diag([2 / 3, -1 / 3, -1 / 3]))
        assert np.allclose(np.abs(table.highest_vector.vector), [1, 0, 0])

    def test_supports(self, std3):
        assert find_weight(std3, [2 / 3, -1 / 3, -1 / 3]).support == ()
        assert find_weight(std3, [-1 / 3, 2 / 3, -1 / 3]).support == (0,)
        assert find_weight(std3, [-1 / 3, -1 / 3, 2 / 3]).support == (0, 1)

    def test_sym2_sl2_collinear_equally_spaced(self):
        rep = build_representation(build_model("SL_R", 2), "sym(2, standard)")
        v = np.sort(rep.weights.vectors()[:, 0])
        assert len(v) == 3 and np.isclose(v[1], 0) and np.isclose(v[2], -v[0]) and v[2] > 0

    def test_spaces_orthogonal_and_spanning(self, any_rep):
        basis = np.hstack([w.space for w in any_rep.weights.weights])
        assert basis.shape == (any_rep.dimV, any_rep.dimV)
        assert np.allclose(basis.conj().T @ basis, np.eye(any_rep.dimV), atol=1e-9)

    def test_coefficients_nonnegative(self, any_rep):
        table = any_rep.weights
        for w in table.weights:
            assert np.all(w.coeffs > -1e-7)
            assert np.allclose(table.mu - w.coeffs @ any_rep.model.simple_roots, w.vector, atol=1e-9)

    def test_highest_in_chamber(self, any_rep):
        assert any_rep.model.in_chamber(any_rep.weights.mu)

    def test_trace_zero_balance(self, any_rep):
        total = sum(w.multiplicity * w.vector for w in any_rep.weights.weights)
        assert np.allclose(total, 0, atol=1e-9)

    def test_weyl_symmetry(self, any_rep):
        vecs = any_rep.weights.vectors()
        for s in any_rep.model.weyl_generators:
            img = vecs @ s.T
            for r in img:
                assert np.min(np.linalg.norm(vecs - r, axis=1)) < 1e-8

    def test_weights_in_weyl_hull(self, any_rep):
        orbit = weyl_orbit(any_rep.model, any_rep.weights.mu)
        for v in any_rep.weights.vectors():
            assert in_hull_lp(orbit, v)

    def test_highest_space_one_dimensional(self, any_rep):
        assert any_rep.weights.highest_space_dim == 1


class TestConnected:
    def test_sl3(self, std3):
        assert [I for I, _ in mu_tau_connected_subsets(std3)] == [(), (0,), (0, 1)]
        assert not is_mu_tau_connected(std3, (1,))

    def test_sl2(self, std2):
        assert [I for I, _ in mu_tau_connected_subsets(std2)] == [(), (0,)]

    def test_supports_are_connected(self, any_rep):
        for w in any_rep.weights.weights:
            assert is_mu_tau_connected(any_rep, w.support)

    def test_matches_x_connected(self, any_rep):
        I_list = [I for I, _ in mu_tau_connected_subsets(any_rep)]
        assert I_list == any_rep.model.x_connected_subsets(any_rep.weights.mu)


class TestVI:
    def test_sl3(self, std3):
        e = np.eye(3)
        assert subspace_gap(subspace_VI(std3, ()), e[:, :1]) < 1e-12
        assert subspace_gap(subspace_VI(std3, (0,)), e[:, :2]) < 1e-12
        assert subspace_VI(std3, (0, 1)).shape[1] == 3

    def test_not_connected(self, std3):
        with pytest.raises(PreconditionError):
            subspace_VI(std3, (1,))

    def test_matches_top_eigenspace(self, any_rep):
        m = any_rep.model
        for I, J in mu_tau_connected_subsets(any_rep):
            beta = m.chamber_element_for(J)
            assert subspace_gap(subspace_VI(any_rep, I), max_locus(any_rep, beta)) < 1e-8


def test_highest_vector_choice_irrelevant(sl4):
    """Orbit invariants do not depend on the chosen highest-weight representative."""
    from orbitope_lab.gradient import gradient_coords

    rep = build_representation(sl4, "wedge(2, standard)")
    v = rep.weights.highest_vector.vector
    rng = np.random.default_rng(5)
    ks = sl4.random_k(rng, 2000)
    a = gradient_coords(rep, rep.tau(ks) @ v)
    b = gradient_coords(rep, rep.tau(ks) @ (np.exp(0.9j) * v))
    assert np.allclose(a, b)


def test_large_power_refused(sl3):
    with pytest.raises(Exception):
        build_representation(sl3, "sym(40, standard)")


def test_commutant_warning_for_large_dims():
    rep_model = build_model("SL_R", 3)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        rep = build_representation(rep_model, "sym(8, standard)")
    assert rep.dimV == 45
