"""Core domain types and exact decompositions."""

import math

import numpy as np
import pytest

import decoycert as dc
from conftest import certify_scenario, random_scenario


class TestComposeCountingRate:
    def test_single_class_identity(self):
        assert dc.compose_counting_rate([1.0], [0.3]) == 0.3

    def test_symmetry(self):
        assert dc.compose_counting_rate([0.5, 0.5], [0.0, 1.0]) == 0.5

    def test_direct_summation_oracle(self):
        a = [0.818731, 0.163746, 0.017523]
        s = [0.0, 1e-4, 2e-4]
        expected = math.fsum(ai * si for ai, si in zip(a, s))
        assert dc.compose_counting_rate(a, s) == pytest.approx(expected, rel=1e-15)

    def test_result_within_rate_range(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            k = rng.integers(1, 8)
            a = rng.dirichlet(np.ones(k))
            s = rng.uniform(0.0, 1.0, k)
            out = dc.compose_counting_rate(a, s)
            assert s.min() - 1e-15 <= out <= s.max() + 1e-15

    def test_monotone_in_each_rate(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            k = int(rng.integers(2, 6))
            a = rng.dirichlet(np.ones(k))
            s = rng.uniform(0.0, 0.9, k)
            base = dc.compose_counting_rate(a, s)
            i = int(rng.integers(0, k))
            bumped = s.copy()
            bumped[i] += 0.05
            assert dc.compose_counting_rate(a, bumped) >= base - 1e-15

    def test_linearity_in_rates(self):
        a = [0.3, 0.7]
        s1, s2 = np.array([0.1, 0.5]), np.array([0.4, 0.2])
        lhs = dc.compose_counting_rate(a, 0.25 * s1 + 0.75 * s2)
        rhs = 0.25 * dc.compose_counting_rate(a, s1) + 0.75 * dc.compose_counting_rate(a, s2)
        assert lhs == pytest.approx(rhs, rel=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(dc.InvariantViolation):
            dc.compose_counting_rate([1.0], [0.1, 0.2])

    def test_unnormalized_fractions(self):
        with pytest.raises(dc.InvariantViolation):
            dc.compose_counting_rate([0.5, 0.6], [0.1, 0.2])

    def test_rate_out_of_range(self):
        with pytest.raises(dc.InvariantViolation):
            dc.compose_counting_rate([1.0], [1.2])


class TestIdealDecomposition:
    def test_decoy_values(self):
        d = dc.ideal_decomposition(0.2, 0.6)
        assert d.a0 == pytest.approx(math.exp(-0.2), rel=1e-15)
        assert d.a1 == pytest.approx(0.2 * math.exp(-0.2), rel=1e-15)
        assert d.a0 == pytest.approx(0.818731, abs=1e-6)
        assert d.a1 == pytest.approx(0.163746, abs=1e-6)
        assert d.ac == pytest.approx(0.017523, abs=1e-6)

    def test_signal_values(self):
        d = dc.ideal_decomposition(0.2, 0.6)
        assert d.a1p == pytest.approx(0.6 * math.exp(-0.6), rel=1e-15)
        assert d.a1p == pytest.approx(0.329287, abs=1e-6)
        expected_acp = d.ac * 0.36 * math.exp(-0.6) / (0.04 * math.exp(-0.2))
        assert d.acp == pytest.approx(expected_acp, rel=1e-15)
        assert d.acp == pytest.approx(0.105715, abs=1e-6)

    def test_identical_source(self):
        d = dc.ideal_decomposition(0.2, 0.2)
        assert d.acp == pytest.approx(d.ac, rel=1e-14)
        assert d.adp == pytest.approx(0.0, abs=1e-14)

    def test_sums_to_one(self):
        d = dc.ideal_decomposition(0.3, 0.9)
        assert d.a0 + d.a1 + d.ac == pytest.approx(1.0, abs=1e-14)
        assert d.a0p + d.a1p + d.acp + d.adp == pytest.approx(1.0, abs=1e-14)

    def test_mup_too_small_for_convex_form(self):
        with pytest.raises(dc.InvariantViolation, match="adp"):
            dc.ideal_decomposition(0.2, 0.205)

    def test_bad_ordering(self):
        with pytest.raises(dc.InvariantViolation):
            dc.ideal_decomposition(0.6, 0.2)


class TestTrueDecomposition:
    def test_zero_fluctuation_matches_ideal(self):
        pat = dc.FluctuationPattern.from_deltas(np.zeros(16))
        t = dc.true_decomposition(pat, 0.2)
        ideal = dc.ideal_decomposition(0.2, 0.6)
        assert t.a0 == pytest.approx(ideal.a0, rel=1e-14)
        assert t.a1 == pytest.approx(ideal.a1, rel=1e-14)
        assert t.ac == pytest.approx(ideal.ac, rel=1e-14)

    def test_two_term_hand_evaluation(self):
        pat = dc.FluctuationPattern.from_deltas([0.1, -0.1])
        t = dc.true_decomposition(pat, 0.2)
        a1_expected = (0.22 * math.exp(-0.22) + 0.18 * math.exp(-0.18)) / 2.0
        assert t.a1 == pytest.approx(a1_expected, rel=1e-15)
        a0_expected = (math.exp(-0.22) + math.exp(-0.18)) / 2.0
        assert t.a0 == pytest.approx(a0_expected, rel=1e-15)

    def test_full_source_decomposition_consistency(self):
        rng = np.random.default_rng(3)
        pat = dc.gen_fluctuation_pattern(64, 0.2, "uniform", rng=rng)
        patp = dc.gen_fluctuation_pattern(64, 0.1, "uniform", rng=rng)
        d = dc.true_source_decomposition(pat, 0.2, patp, 0.6)
        ratio = dc.multiphoton_ratio(pat, 0.2, patp, 0.6)
        assert d.acp == pytest.approx(ratio * d.ac, rel=1e-14)
        assert d.a0p + d.a1p + d.acp + d.adp == pytest.approx(1.0, abs=1e-12)

    def test_random_patterns_inside_certified_intervals(self):
        # Cross-module property: exact coefficients always land inside the
        # certified intervals computed from the same data.
        rng = np.random.default_rng(4)
        checked = 0
        for _ in range(1000):
            sc = random_scenario(rng, n_pattern=96)
            cert = certify_scenario(sc)
            if cert is None:
                continue
            iv, ivp, bounds = cert
            d = dc.true_source_decomposition(sc.pattern, sc.mu, sc.pattern_p, sc.mup)
            assert iv.mu_minus <= sc.mu <= iv.mu_plus
            assert ivp.mu_minus <= sc.mup <= ivp.mu_plus
            assert bounds.a0_lo <= d.a0 <= bounds.a0_hi
            assert bounds.a1_lo <= d.a1 <= bounds.a1_hi
            assert bounds.ac_lo <= d.ac <= bounds.ac_hi
            assert bounds.a0p_lo <= d.a0p
            assert bounds.a1p_lo <= d.a1p
            assert bounds.bcp_lo <= d.acp  # omega_c = 1 bounds vs exact ratio
            checked += 1
        assert checked > 800


class TestFluctuationPattern:
    def test_nonzero_sum_rejected(self):
        with pytest.raises(dc.InvariantViolation, match="sum to zero"):
            dc.FluctuationPattern.from_deltas([0.1, 0.1])

    def test_envelope_violation_rejected(self):
        with pytest.raises(dc.InvariantViolation, match="delta_max"):
            dc.FluctuationPattern(deltas=np.array([0.2, -0.2]), delta_max=0.1)

    def test_declared_envelope_may_exceed_realized(self):
        pat = dc.FluctuationPattern(deltas=np.array([0.1, -0.1]), delta_max=0.5)
        assert pat.delta_max == 0.5
        assert pat.zeta == pytest.approx(0.01, rel=1e-15)

    def test_zeta_bounded_by_envelope_square(self):
        pat = dc.FluctuationPattern.from_deltas([0.3, -0.3])
        assert 0.0 <= pat.zeta <= pat.delta_max**2 + 1e-15

    def test_intensities_positive(self):
        pat = dc.FluctuationPattern(deltas=np.array([0.9, -0.9]), delta_max=0.9)
        with pytest.raises(dc.InvariantViolation):
            pat.intensities(-0.2)


class TestObservedRates:
    def test_rate_out_of_range(self):
        with pytest.raises(dc.InvariantViolation):
            dc.ObservedRates(S0=0.0, S=1.2, Sp=0.0, h=0.0, hp=0.0, d0=0.0,
                             N=1e9, Np=1e9, N0=1e9, xi=0.05)

    def test_bad_counts(self):
        with pytest.raises(dc.InvariantViolation):
            dc.ObservedRates(S0=0.0, S=0.1, Sp=0.1, h=0.0, hp=0.0, d0=0.0,
                             N=0, Np=1e9, N0=1e9, xi=0.05)


class TestChannelYields:
    def test_tail_convention(self):
        y = dc.ChannelYields(np.array([0.0, 0.1, 0.2]))
        assert y.rate(2) == 0.2
        assert y.rate(10) == 0.2

    def test_range_check(self):
        with pytest.raises(dc.InvariantViolation):
            dc.ChannelYields(np.array([0.0, 1.5]))
