import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from verblunsky import oracle
from verblunsky.opuc import ExplicitSequence, make_interleaved
from verblunsky.point_mass import PerturbedSequence, PointMassSpec, perturb_sequence
from verblunsky.szego_map import JacobiCoefficients, direct_geronimus

FREE = ExplicitSequence([])


class TestMoments:
    def test_free(self):
        c = oracle.moments_from_alpha(FREE, 6).as_complex()
        assert c[0] == 1 and np.all(c[1:] == 0)

    def test_first_coefficient(self):
        c = oracle.moments_from_alpha(ExplicitSequence([0.5]), 3).as_complex()
        assert c[1] == pytest.approx(0.5, abs=1e-15)

    def test_bernstein_szego_quadrature(self):
        # (1 - |a|^2) |1 - a e^{i theta}|^{-2} dtheta / 2pi has c_1 = alpha_0 = a, alpha_n = 0 after
        a = 0.4 + 0.2j
        c = oracle.moments_from_alpha(ExplicitSequence([a]), 4, dps=None).as_complex()
        theta = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        w = (1 - abs(a) ** 2) / np.abs(1 - a * np.exp(1j * theta)) ** 2
        for k in range(4):
            assert c[k] == pytest.approx(np.mean(w * np.exp(-1j * k * theta)), abs=1e-12)

    def test_interleaved_first_moment(self):
        c = oracle.moments_from_alpha(make_interleaved(-0.6), 10).as_complex()
        assert abs(c[1]) < 1e-15
        assert np.all(np.abs(c[1::2]) < 1e-15)

    def test_moment_bound(self):
        with pytest.raises(ValueError):
            oracle.moments_from_alpha(FREE, oracle.MAX_MOMENTS + 1)

    def test_cmv_matrix_unitary(self):
        alphas = [0.3 + 0.1j, -0.5, 0.2j, 0.1, -0.3 - 0.3j]
        C = oracle.cmv_matrix(alphas)
        assert np.allclose(C.conj().T @ C, np.eye(len(C)), atol=1e-14)
        cm = oracle.moments_from_alpha(ExplicitSequence(alphas), 2, dps=None).as_complex()
        for k in range(3):
            assert np.conj(np.linalg.matrix_power(C, k)[0, 0]) == pytest.approx(cm[k], abs=1e-14)


class TestPointInsertion:
    def test_at_one(self):
        c = oracle.add_point_to_moments(oracle.moments_from_alpha(FREE, 3), PointMassSpec.at_one(0.5))
        assert c.as_complex()[1] == pytest.approx(0.5)

    def test_at_minus_one(self):
        c = oracle.add_point_to_moments(oracle.moments_from_alpha(FREE, 3, dps=None), PointMassSpec.at_minus_one(0.5))
        assert c.as_complex()[1] == pytest.approx(-0.5)

    def test_small_weight_is_near_identity(self):
        base = oracle.moments_from_alpha(ExplicitSequence([0.3]), 5)
        c = oracle.add_point_to_moments(base, PointMassSpec.at_one(1e-15))
        assert np.allclose(c.as_complex(), base.as_complex(), atol=1e-14)


class TestLevinson:
    def test_unit_vector(self):
        c = oracle.TrigMomentVector(np.eye(1, 8)[0])
        assert np.all(oracle.levinson(c, 7) == 0)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(min_value=-0.9, max_value=0.9), min_size=20, max_size=20))
    def test_roundtrip_real(self, alphas):
        c = oracle.moments_from_alpha(ExplicitSequence(alphas), 20)
        assert np.max(np.abs(oracle.levinson(c, 20) - alphas)) <= 1e-10

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.complex_numbers(max_magnitude=0.9), min_size=12, max_size=12))
    def test_roundtrip_complex(self, alphas):
        c = oracle.moments_from_alpha(ExplicitSequence(alphas), 12)
        assert np.max(np.abs(oracle.levinson(c, 12) - np.array(alphas))) <= 1e-10

    def test_point_mass_oracle(self):
        seq = make_interleaved(-0.6)
        spec = PointMassSpec.at_one(0.3)
        c = oracle.add_point_to_moments(oracle.moments_from_alpha(seq, 25), spec)
        ref = [r.alpha_perturbed for r in perturb_sequence(seq, spec, 25)]
        assert np.max(np.abs(oracle.levinson(c, 25) - ref)) <= 1e-6

    def test_binary64_degrades(self):
        # the plain float path loses accuracy once ||Phi_n|| gets small
        seq = make_interleaved(-0.6)
        spec = PointMassSpec.at_one(0.3)
        ref = np.array([r.alpha_perturbed for r in perturb_sequence(seq, spec, 25)])
        c = oracle.add_point_to_moments(oracle.moments_from_alpha(seq, 25, dps=None), spec)
        try:
            err = np.max(np.abs(oracle.levinson(c, 25) - ref))
        except oracle.ConditioningError:
            err = math.inf
        assert err > 1e-6
        c = oracle.add_point_to_moments(oracle.moments_from_alpha(seq, 25), spec)
        assert np.max(np.abs(oracle.levinson(c, 25) - ref)) < 1e-12

    def test_needs_enough_moments(self):
        with pytest.raises(ValueError):
            oracle.levinson(oracle.moments_from_alpha(FREE, 4), 5)


class TestQuadrature:
    def test_two_by_two(self):
        dm = oracle.gauss_quadrature(JacobiCoefficients([1.0, 1.0], [0.0, 0.0]), 2)
        assert np.allclose(np.sort(dm.nodes), [-1, 1])
        assert np.allclose(dm.weights, [0.5, 0.5])

    def test_chebyshev_first_kind(self):
        jc = direct_geronimus(FREE, 3)
        nodes = np.sort(oracle.gauss_quadrature(jc, 3).nodes)
        assert np.allclose(nodes, [-math.sqrt(3), 0, math.sqrt(3)], atol=1e-14)
        # roots of T_3(x/2) = 0 found directly
        roots = np.sort(2 * np.cos((2 * np.arange(3) + 1) * np.pi / 6))
        assert np.allclose(nodes, roots, atol=1e-14)

    def test_weights(self):
        dm = oracle.gauss_quadrature(direct_geronimus(make_interleaved(-0.6), 200), 200)
        assert np.all(dm.weights > 0)
        assert dm.weights.sum() == pytest.approx(1.0, abs=1e-14)

    def test_exactness(self):
        # the N-point rule integrates p_k^2 exactly for k < N
        jc = direct_geronimus(ExplicitSequence([0.0, -0.5, 0.0, -0.3]), 8)
        dm = oracle.gauss_quadrature(jc, 8)
        assert dm.moment(0) == pytest.approx(1.0)
        assert dm.moment(1) == pytest.approx(jc.b[0], abs=1e-14)
        assert dm.moment(2) == pytest.approx(jc.a[0] ** 2 + jc.b[0] ** 2, abs=1e-14)

    def test_christoffel_matches_eigenvectors_when_well_scaled(self):
        from scipy.linalg import eigh_tridiagonal

        jc = direct_geronimus(ExplicitSequence([0.2, -0.3, 0.1, 0.4, -0.1, 0.2]), 6)
        _, vecs = eigh_tridiagonal(jc.b, jc.a[:-1])
        dm = oracle.gauss_quadrature(jc, 6)
        assert np.allclose(np.sort(dm.weights), np.sort(vecs[0] ** 2), atol=1e-14)


class TestStieltjes:
    def test_two_points(self):
        dm = oracle.DiscreteMeasure(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        jc = oracle.stieltjes(dm, 1)
        assert jc.a[0] == pytest.approx(1.0) and jc.b[0] == pytest.approx(0.0)

    @pytest.mark.parametrize("seq", [make_interleaved(-0.6), ExplicitSequence([0.1, -0.4, 0.3, 0.2, -0.5])])
    def test_roundtrip(self, seq):
        jc = direct_geronimus(seq, 60)
        back = oracle.stieltjes(oracle.gauss_quadrature(jc, 60), 40)
        assert np.max(np.abs(back.a - jc.a[:40])) <= 1e-10
        assert np.max(np.abs(back.b - jc.b[:40])) <= 1e-10

    def test_line_oracle(self):
        seq = make_interleaved(-0.6)
        quad = oracle.gauss_quadrature(direct_geronimus(seq, 200), 200)
        line = oracle.stieltjes(oracle.insert_node(quad, 2.0, 0.3), 40)
        pert = direct_geronimus(PerturbedSequence(seq, PointMassSpec.at_one(0.3)), 40)
        assert np.max(np.abs(line.a - pert.a)) <= 1e-8
        assert np.max(np.abs(line.b - pert.b)) <= 1e-8

    def test_depth_bound(self):
        dm = oracle.DiscreteMeasure(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            oracle.stieltjes(dm, 2)


class TestDiscreteMeasure:
    def test_validation(self):
        with pytest.raises(ValueError):
            oracle.DiscreteMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.6]))
        with pytest.raises(ValueError):
            oracle.DiscreteMeasure(np.array([0.0, 0.0]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            oracle.DiscreteMeasure(np.array([0.0, 1.0]), np.array([1.0, 0.0]))

    def test_insert_node(self):
        dm = oracle.insert_node(oracle.DiscreteMeasure(np.array([0.0]), np.array([1.0])), 2.0, 0.25)
        assert dm.moment(1) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            oracle.insert_node(dm, 3.0, 0.0)
