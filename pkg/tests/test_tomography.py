"""Monitor-click tomography: closed forms, soundness, regime guards."""

import math

import mpmath
import numpy as np
import pytest

import decoycert as dc
from conftest import monitor_rate, random_pattern


class TestMuLowerSimple:
    def test_direct_evaluation(self):
        assert dc.mu_lower_simple(0.00995, 0.05) == pytest.approx(0.199, rel=1e-12)

    def test_no_clicks(self):
        assert dc.mu_lower_simple(0.0, 0.05) == 0.0

    def test_sound_for_random_pattern(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            pat = random_pattern(rng, 128, float(rng.uniform(0.0, 0.35)))
            h = monitor_rate(pat, 0.2, 0.05)
            assert dc.mu_lower_simple(h, 0.05) <= 0.2 + 1e-15


class TestMuUpper:
    def test_exact_quadratic_point(self):
        # 1 - 2 * 0.00995 = 0.9801 = 0.99^2, so the bound lands exactly on 0.2.
        assert dc.mu_upper(0.00995, 0.05, 0.0) == pytest.approx(0.2, abs=1e-14)

    def test_no_clicks(self):
        assert dc.mu_upper(0.0, 0.05, 0.1) == 0.0

    def test_high_precision_oracle(self):
        h, xi, zeta = 0.00995, 0.05, 0.01
        with mpmath.workdps(60):
            expected = (1 - mpmath.sqrt(1 - 2 * mpmath.mpf("0.00995") * mpmath.mpf("1.01"))) \
                / (mpmath.mpf("0.05") * mpmath.mpf("1.01"))
            expected = float(expected)
        assert dc.mu_upper(h, xi, zeta) == pytest.approx(expected, rel=1e-12)

    def test_click_rate_too_high(self):
        with pytest.raises(dc.ValidityError):
            dc.mu_upper(0.5, 0.9, 0.1)


class TestMuLowerRefined:
    def test_direct_evaluation(self):
        got = dc.mu_lower_refined(0.00995, 0.05, 0.2)
        expected = 0.199 + 0.00995**2 / 0.1 - 0.05**2 * 0.2**3 / 6.0
        assert got == pytest.approx(expected, rel=1e-14)
        assert got == pytest.approx(0.1999867, abs=1e-7)

    def test_no_clicks(self):
        assert dc.mu_lower_refined(0.0, 0.05, 0.0) == 0.0

    def test_sandwich_over_random_patterns(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            delta = float(rng.uniform(0.0, 0.35))
            mu = float(rng.uniform(0.05, 0.5))
            xi = float(rng.uniform(0.02, 0.1))
            pat = random_pattern(rng, 128, delta)
            h = monitor_rate(pat, mu, xi)
            iv = dc.certify_intensity(h, xi, delta * delta)
            assert iv.mu_minus <= mu <= iv.mu_plus
            assert dc.mu_lower_simple(h, xi) <= iv.mu_minus + 1e-15


class TestZetaBounds:
    def test_zeta_from_delta(self):
        assert dc.zeta_from_delta(0.1) == pytest.approx(0.01, rel=1e-15)
        assert dc.zeta_from_delta(0.0) == 0.0
        assert dc.zeta_from_delta(0.35) == pytest.approx(0.1225, rel=1e-15)

    def test_histogram_published_value(self):
        assert dc.zeta_from_histogram([(0.9, 0.1), (0.1, 0.5)]) == pytest.approx(
            0.034, abs=1e-16)

    def test_histogram_single_bin_reduces_to_delta(self):
        assert dc.zeta_from_histogram([(1.0, 0.2)]) == dc.zeta_from_delta(0.2)

    def test_histogram_direct(self):
        assert dc.zeta_from_histogram([(0.5, 0.0), (0.5, 0.2)]) == pytest.approx(
            0.02, rel=1e-14)

    def test_histogram_never_exceeds_worst_bin(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            k = int(rng.integers(1, 5))
            fracs = rng.dirichlet(np.ones(k))
            bounds = rng.uniform(0.0, 0.5, k)
            hist = list(zip(fracs, bounds))
            assert dc.zeta_from_histogram(hist) <= dc.zeta_from_delta(bounds.max()) + 1e-15

    def test_histogram_unnormalized(self):
        with pytest.raises(dc.InvariantViolation):
            dc.zeta_from_histogram([(0.5, 0.1), (0.4, 0.2)])


class TestIntervalShape:
    def test_width_matches_quadratic_asymptotic(self):
        # mu_plus - h/xi ~ h^2 (1+zeta) / (2 xi) for small h.
        for h in (0.001, 0.005, 0.01, 0.019):
            for zeta in (0.0, 0.05, 0.1225):
                for xi in (0.03, 0.05, 0.1):
                    width = dc.mu_upper(h, xi, zeta) - h / xi
                    approx = h * h * (1.0 + zeta) / (2.0 * xi)
                    assert width == pytest.approx(approx, rel=0.10)

    def test_refined_beats_simple_when_cubic_term_small(self):
        h, xi = 0.00995, 0.05
        plus = dc.mu_upper(h, xi, 0.0)
        if h * h / (2 * xi) >= xi * xi * plus**3 / 6.0:
            assert dc.mu_lower_refined(h, xi, plus) >= dc.mu_lower_simple(h, xi)

    def test_regime_guard(self):
        # xi * mu_plus >= 0.5 must be rejected, not silently certified.
        with pytest.raises(dc.ValidityError):
            dc.certify_intensity(0.4, 0.9, 0.0)


class TestIntensityInterval:
    def test_ordering_enforced(self):
        with pytest.raises(dc.InvariantViolation):
            dc.IntensityInterval(mu_minus=0.3, mu_plus=0.2, zeta_bound=0.0)

    def test_exact_factory(self):
        iv = dc.IntensityInterval.exact(0.2)
        assert iv.mu_minus == iv.mu_plus == 0.2
        assert iv.zeta_bound == 0.0
