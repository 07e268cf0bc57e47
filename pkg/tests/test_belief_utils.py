import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustdec import (Dist, Fattened, FullSimplex, Halfspace, InfeasibleBeliefError, LinearConstraints,
                       OutcomeSpace, Singleton, UnsupportedBackendError, VertexSet, asym_dist_sq,
                       enumerate_vertices, grid_projection, hellinger_project, hellinger_sq, make_rng,
                       worst_case_expectation)


@st.composite
def vertex_sets(draw, space):
    n = space.size
    k = draw(st.integers(1, 3))
    rows = [draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)) for _ in range(k)]
    return VertexSet(space, [np.asarray(r) / sum(r) for r in rows])


@st.composite
def simplex_point(draw, n):
    w = np.asarray(draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)))
    return w / w.sum()


SPACE3 = OutcomeSpace.of_size(3)


class TestWorstCase:
    def test_singleton(self, coin):
        value, witness = worst_case_expectation(Singleton(coin, [0.3, 0.7]), [0.0, 1.0])
        assert value == pytest.approx(0.7)
        assert witness == Dist(coin, [0.3, 0.7])

    def test_full_simplex_takes_min_coordinate(self, coin):
        value, witness = worst_case_expectation(FullSimplex(coin), [0.2, 0.7])
        assert value == pytest.approx(0.2)
        assert witness.probs.tolist() == [1.0, 0.0]

    def test_halfspace_sits_on_boundary(self, coin):
        value, witness = worst_case_expectation(Halfspace(coin, [0.0, 1.0], 0.6), [0.0, 1.0])
        assert value == pytest.approx(0.6)
        assert witness.probs == pytest.approx([0.4, 0.6])

    def test_linear_constraints_match_vertex_set(self):
        psi = LinearConstraints(SPACE3, [([1.0, 0.0, 0.0], 0.2), ([0.0, 0.0, 1.0], 0.1)])
        f = np.array([0.3, 0.1, 0.9])
        value, _ = worst_case_expectation(psi, f)
        assert value == pytest.approx(worst_case_expectation(psi.to_vertex_set(), f)[0], abs=1e-9)
        assert value == pytest.approx(0.2 * 0.3 + 0.7 * 0.1 + 0.1 * 0.9)

    def test_fattened_is_no_larger_than_base(self, coin):
        base = Halfspace(coin, [0.0, 1.0], 0.6)
        value, witness = worst_case_expectation(Fattened(base, 0.1), [0.0, 1.0])
        assert value <= 0.6 + 1e-9
        assert Fattened(base, 0.1).contains(witness.probs, tol=1e-6)


class TestConstruction:
    def test_halfspace_threshold_above_max(self, coin):
        with pytest.raises(InfeasibleBeliefError):
            Halfspace(coin, [0.0, 1.0], 1.5)

    def test_infeasible_linear_constraints(self, coin):
        with pytest.raises(InfeasibleBeliefError):
            LinearConstraints(coin, [([1.0, 0.0], 0.7), ([0.0, 1.0], 0.7)])

    def test_empty_vertex_set(self, coin):
        with pytest.raises(InfeasibleBeliefError):
            VertexSet(coin, [])

    def test_enumerate_vertices_of_halfspace(self):
        V = enumerate_vertices(np.array([[0.0, 1.0]]), np.array([0.5]))
        assert V.tolist() == [[0.5, 0.5], [0.0, 1.0]]

    def test_fattened_exposes_no_vertices(self, coin):
        with pytest.raises(UnsupportedBackendError):
            Fattened(FullSimplex(coin), 0.1).vertices()


class TestProjection:
    def test_member_projects_to_itself(self, coin):
        point, d2 = hellinger_project(Dist(coin, [0.3, 0.7]), Halfspace(coin, [0.0, 1.0], 0.5))
        assert point.probs == pytest.approx([0.3, 0.7])
        assert d2 == 0.0

    def test_point_mass_onto_halfspace(self, coin):
        point, d2 = hellinger_project([1.0, 0.0], Halfspace(coin, [0.0, 1.0], 0.5))
        assert point.probs == pytest.approx([0.5, 0.5], abs=1e-4)
        assert d2 == pytest.approx(1.0 - np.sqrt(0.5), abs=1e-5)

    def test_singleton_is_forced(self, coin):
        point, d2 = hellinger_project([0.9, 0.1], Singleton(coin, [0.2, 0.8]))
        assert point.probs == pytest.approx([0.2, 0.8])
        assert d2 == pytest.approx(hellinger_sq([0.9, 0.1], [0.2, 0.8]))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
    def test_agrees_with_grid_search(self, t1, c):
        t = np.array([1.0 - t1, t1])
        phi = Halfspace(OutcomeSpace.of_size(2), [0.0, 1.0], c)
        _, d2 = hellinger_project(t, phi)
        _, grid_d2 = grid_projection(t, phi, step=1e-3)
        assert d2 == pytest.approx(grid_d2, abs=2e-3)
        assert d2 <= grid_d2 + 1e-9

    def test_three_outcome_halfspace_agrees_with_grid(self):
        phi = Halfspace(SPACE3, [0.0, 0.5, 1.0], 0.7)
        t = np.array([0.5, 0.3, 0.2])
        point, d2 = hellinger_project(t, phi)
        _, grid_d2 = grid_projection(t, phi, step=0.01)
        assert phi.contains(point.probs, tol=1e-7)
        assert d2 == pytest.approx(grid_d2, abs=5e-3)

    def test_fattened_boundary_point_is_member(self, coin):
        base = Singleton(coin, [0.5, 0.5])
        fat = Fattened(base, 0.2)
        point, _ = fat.project([0.99, 0.01])
        assert base.project(point)[1] == pytest.approx(0.04, abs=1e-9)
        assert fat.contains(point)


class TestAsymmetricDistance:
    def test_subset_gives_zero(self, coin):
        psi = VertexSet(coin, [[0.2, 0.8], [0.3, 0.7]])
        phi = Halfspace(coin, [0.0, 1.0], 0.5)
        assert asym_dist_sq(psi, phi) == pytest.approx(0.0, abs=1e-12)

    def test_full_simplex_to_point(self, coin):
        assert asym_dist_sq(FullSimplex(coin), Singleton(coin, [0.0, 1.0])) == pytest.approx(1.0)

    def test_points(self, coin):
        d2 = asym_dist_sq(Singleton(coin, [0.4, 0.6]), Singleton(coin, [0.1, 0.9]))
        assert d2 == pytest.approx(hellinger_sq([0.4, 0.6], [0.1, 0.9]))

    def test_fattened_needs_sampling(self, coin):
        fat = Fattened(Singleton(coin, [0.5, 0.5]), 0.1)
        with pytest.raises(UnsupportedBackendError):
            asym_dist_sq(fat, Singleton(coin, [0.0, 1.0]))
        d2, exact = asym_dist_sq(fat, Singleton(coin, [0.0, 1.0]), n_samples=20, rng=make_rng(0, 'samples'),
                                 return_exact=True)
        assert not exact
        assert 0.0 < d2 <= 1.0

    @settings(max_examples=25, deadline=None)
    @given(st.data())
    def test_triangle_with_factor_two(self, data):
        psi, phi, theta = (data.draw(vertex_sets(SPACE3)) for _ in range(3))
        lhs = asym_dist_sq(psi, theta)
        rhs = 2.0 * asym_dist_sq(psi, phi) + 2.0 * asym_dist_sq(phi, theta)
        assert lhs <= rhs + 1e-6

    @settings(max_examples=25, deadline=None)
    @given(simplex_point(3), simplex_point(3), st.floats(0.0, 1.0))
    def test_distance_to_set_is_convex(self, mu, nu, lam):
        phi = Halfspace(SPACE3, [0.0, 0.5, 1.0], 0.8)
        mix = lam * mu + (1.0 - lam) * nu
        lhs = phi.project(mix)[1]
        rhs = lam * phi.project(mu)[1] + (1.0 - lam) * phi.project(nu)[1]
        assert lhs <= rhs + 1e-6


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_vertex_set_is_convex(data):
    psi = data.draw(vertex_sets(SPACE3))
    rng = make_rng(data.draw(st.integers(0, 1000)), 'samples')
    a, b = psi.sample(2, rng)
    lam = data.draw(st.floats(0.0, 1.0))
    assert psi.contains(lam * a + (1.0 - lam) * b, tol=1e-7)


def test_backends_agree_on_membership(coin, rng):
    as_halfspace = Halfspace(coin, [0.0, 1.0], 0.4)
    as_vertices = VertexSet(coin, [[0.6, 0.4], [0.0, 1.0]])
    as_linear = LinearConstraints(coin, [([0.0, 1.0], 0.4)])
    for mu in FullSimplex(coin).sample(200, rng):
        if abs(mu[1] - 0.4) < 1e-6:
            continue
        expected = as_halfspace.contains(mu)
        assert as_vertices.contains(mu) == expected
        assert as_linear.contains(mu) == expected
