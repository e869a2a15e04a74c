import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from verblunsky import oracle
from verblunsky.opuc import ConstantInterleaved, ExplicitSequence, initial_state, make_interleaved, szego_states, szego_step
from verblunsky.point_mass import (
    PerturbedSequence,
    PointMassSpec,
    _general_alphas,
    delta_even_fast,
    delta_n,
    delta_odd_fast,
    fast_deltas,
    geronimus_alpha,
    perturb_at_minus_one,
    perturb_sequence,
    rotation_defect,
    simon_alpha,
)

FREE = ExplicitSequence([])


class TestSpec:
    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.1, 1.5])
    def test_beta_range(self, beta):
        with pytest.raises(ValueError):
            PointMassSpec(0.0, beta)

    def test_axis_points(self):
        assert PointMassSpec.at_one(0.3).zeta == 1
        assert PointMassSpec.at_minus_one(0.3).zeta == -1
        assert PointMassSpec.at_one(0.25).damping == pytest.approx(3.0)


class TestDelta:
    def test_free_case(self):
        spec = PointMassSpec.at_one(0.5)
        s = initial_state(1.0)
        for _ in range(3):
            s = szego_step(s, 0.0)
        assert delta_n(s, szego_step(s, 0.0), spec) == pytest.approx(0.2, abs=1e-15)

    def test_vanishing_weight(self):
        spec = PointMassSpec.at_one(1e-12)
        states = list(szego_states(FREE, 1.0, 11))
        assert abs(delta_n(states[10], states[11], spec)) < 1e-9

    def test_fast_matches_general(self):
        seq = make_interleaved(-0.6)
        spec = PointMassSpec.at_one(0.3)
        even, odd = fast_deltas(seq, spec, 501)
        states = list(szego_states(seq, 1.0, 1003))
        for m in range(501):
            de = delta_n(states[2 * m], states[2 * m + 1], spec).real
            do = delta_n(states[2 * m + 1], states[2 * m + 2], spec).real
            assert even[m] == pytest.approx(de, rel=1e-12)
            assert odd[m] == pytest.approx(do, rel=1e-12)

    def test_constant_tau_limit(self):
        assert delta_even_fast(20000, ConstantInterleaved(-0.5), PointMassSpec.at_one(0.3)) == pytest.approx(0.5, rel=1e-12)

    def test_first_order_term(self):
        m = 10 ** 6
        d = delta_even_fast(m, make_interleaved(-0.6), PointMassSpec.at_one(0.3))
        assert abs(np.sqrt(m) * (d - 0.6) - 1) <= 1e-5
        assert delta_odd_fast(m, make_interleaved(-0.6), PointMassSpec.at_one(0.3)) == pytest.approx(d, abs=1e-6)

    def test_fast_path_guards(self):
        with pytest.raises(ValueError):
            fast_deltas(make_interleaved(-0.6), PointMassSpec.at_minus_one(0.3), 10)
        with pytest.raises(TypeError):
            fast_deltas(FREE, PointMassSpec.at_one(0.3), 10)


class TestPerturbSequence:
    def test_free_case_first_coefficient(self):
        rec = perturb_sequence(FREE, PointMassSpec.at_one(0.5), 1)[0]
        assert rec.alpha_perturbed == pytest.approx(0.5, abs=1e-15)

    def test_interleaved_shape(self):
        vals = PerturbedSequence(make_interleaved(-0.6), PointMassSpec.at_one(0.3)).values(20000)
        assert np.all((vals[0::2] > 0) & (vals[0::2] < 1))
        assert abs(vals[-1]) < 1e-6
        assert np.all(np.abs(vals) < 1)

    def test_records_are_consistent(self):
        seq = make_interleaved(-0.6)
        for r in perturb_sequence(seq, PointMassSpec.at_one(0.3), 50):
            assert r.alpha_base == seq[r.n]
            assert r.alpha_perturbed == pytest.approx(r.alpha_base + r.delta, abs=0)

    @pytest.mark.parametrize("zeta_spec", [PointMassSpec.at_one(0.3), PointMassSpec.at_minus_one(0.3),
                                           PointMassSpec(1.1, 0.4)])
    def test_lean_loop_matches_records(self, zeta_spec):
        seq = make_interleaved(-0.6)
        records = perturb_sequence(seq, zeta_spec, 3000)
        gen = _general_alphas(seq, zeta_spec)
        lean = np.array([next(gen) for _ in range(3000)])
        ref = np.array([r.alpha_perturbed for r in records])
        assert np.max(np.abs(lean - ref)) <= 1e-13

    def test_fast_matches_general_path(self):
        seq = make_interleaved(-0.6)
        spec = PointMassSpec.at_one(0.3)
        fast = PerturbedSequence(seq, spec).values(4000)
        general = PerturbedSequence(seq, spec, method="general").values(4000)
        assert np.max(np.abs(fast - general)) <= 1e-13

    def test_method_selection(self):
        seq = make_interleaved(-0.6)
        assert PerturbedSequence(seq, PointMassSpec.at_one(0.3)).method == "fast"
        assert PerturbedSequence(seq, PointMassSpec.at_minus_one(0.3)).method == "general"
        with pytest.raises(ValueError):
            PerturbedSequence(seq, PointMassSpec.at_minus_one(0.3), method="fast")


class TestSlowFormulas:
    def test_free_case(self):
        spec = PointMassSpec.at_one(0.5)
        assert geronimus_alpha(FREE, spec, 0) == pytest.approx(0.5, abs=1e-15)
        assert simon_alpha(FREE, spec, 0) == pytest.approx(0.5, abs=1e-15)

    def test_three_way_interleaved(self):
        seq = make_interleaved(-0.6)
        spec = PointMassSpec.at_one(0.3)
        recs = perturb_sequence(seq, spec, 31)
        for r in recs:
            assert abs(geronimus_alpha(seq, spec, r.n) - r.alpha_perturbed) <= 1e-10
            assert abs(simon_alpha(seq, spec, r.n) - r.alpha_perturbed) <= 1e-10

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.complex_numbers(max_magnitude=0.8), min_size=1, max_size=10),
           st.floats(min_value=0.0, max_value=6.28), st.floats(min_value=0.05, max_value=0.95))
    def test_three_way_random(self, alphas, omega, beta):
        seq = ExplicitSequence(alphas)
        spec = PointMassSpec(omega, beta)
        for r in perturb_sequence(seq, spec, len(alphas)):
            assert abs(geronimus_alpha(seq, spec, r.n) - r.alpha_perturbed) <= 1e-10
            assert abs(simon_alpha(seq, spec, r.n) - r.alpha_perturbed) <= 1e-10

    def test_tiny_weight(self):
        # phi_n(1) grows fast for the interleaved family, so use a flat base
        seq = ExplicitSequence([0.1, -0.2, 0.05])
        spec = PointMassSpec.at_one(1e-12)
        for n in range(30):
            assert abs(geronimus_alpha(seq, spec, n) - seq[n]) <= 1e-9
            assert abs(simon_alpha(seq, spec, n) - seq[n]) <= 1e-9

    def test_bound(self):
        with pytest.raises(ValueError):
            geronimus_alpha(FREE, PointMassSpec.at_one(0.5), 1000)

    def test_matches_levinson_oracle(self):
        spec = PointMassSpec(0.7, 0.4)
        seq = ExplicitSequence([0.2, -0.1j, 0.3 + 0.2j])
        c = oracle.add_point_to_moments(oracle.moments_from_alpha(seq, 12), spec)
        lev = oracle.levinson(c, 12)
        ref = [r.alpha_perturbed for r in perturb_sequence(seq, spec, 12)]
        assert np.max(np.abs(lev - ref)) <= 1e-12


class TestRotation:
    def test_identity(self):
        assert rotation_defect(make_interleaved(-0.6), 0.3, 101) <= 1e-10

    def test_free_case(self):
        rec = perturb_at_minus_one(FREE, PointMassSpec.at_minus_one(0.5), 1)[0]
        assert rec.alpha_perturbed == pytest.approx(-0.5, abs=1e-15)

    def test_sign_pattern(self):
        seq = make_interleaved(-0.6)
        minus = perturb_at_minus_one(seq, PointMassSpec.at_minus_one(0.3), 40)
        plus = perturb_sequence(seq, PointMassSpec.at_one(0.3), 40)
        for m, p in zip(minus, plus):
            if m.n % 2 == 0:
                assert m.alpha_perturbed == pytest.approx(-p.alpha_perturbed, abs=1e-12)
            else:
                assert m.alpha_perturbed == pytest.approx(p.alpha_perturbed, abs=1e-12)

    def test_requires_symmetric_base(self):
        with pytest.raises(ValueError):
            perturb_at_minus_one(ExplicitSequence([0.1]), PointMassSpec.at_minus_one(0.3), 4)
        with pytest.raises(ValueError):
            perturb_at_minus_one(FREE, PointMassSpec.at_one(0.3), 4)

    def test_no_warning_when_identity_holds(self, caplog):
        with caplog.at_level(logging.WARNING, logger="verblunsky"):
            perturb_at_minus_one(make_interleaved(-0.6), PointMassSpec.at_minus_one(0.3), 60)
        assert not caplog.records
