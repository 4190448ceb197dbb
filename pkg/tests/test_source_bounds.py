"""Certified coefficient intervals: identities, soundness, monotonicity."""

import math

import numpy as np
import pytest

import decoycert as dc
from decoycert.source_bounds import FLAG_A1_UPPER_GLOBAL_CAP, FLAG_LOWER_CLAMPED
from conftest import random_pattern


def degenerate(mu):
    return dc.IntensityInterval.exact(mu)


class TestDecoyBounds:
    def test_degenerate_interval_reproduces_ideal(self):
        (a0l, a0h), (a1l, a1h), (acl, ach), flags = dc.compute_decoy_bounds(degenerate(0.2))
        ideal = dc.ideal_decomposition(0.2, 0.6)
        assert a0l == pytest.approx(ideal.a0, rel=1e-14)
        assert a0h == pytest.approx(ideal.a0, rel=1e-14)
        assert a1l == pytest.approx(ideal.a1, rel=1e-14)
        assert a1h == pytest.approx(ideal.a1, rel=1e-14)
        assert acl == pytest.approx(ideal.ac, rel=1e-14)
        assert ach == pytest.approx(ideal.ac, rel=1e-14)
        assert flags == ()

    def test_a1_lower_closed_form(self):
        iv = dc.IntensityInterval(mu_minus=0.1999867, mu_plus=0.2, zeta_bound=0.01)
        _, (a1l, _), _, _ = dc.compute_decoy_bounds(iv)
        expected = (1.0 - 0.1999867 * 0.01) * 0.1999867 * math.exp(-0.1999867)
        assert a1l == pytest.approx(expected, rel=1e-14)

    def test_global_cap_outside_monotone_regime(self):
        iv = dc.IntensityInterval(mu_minus=1.05, mu_plus=1.3, zeta_bound=0.01)
        _, (_, a1h), _, flags = dc.compute_decoy_bounds(iv)
        assert a1h == pytest.approx(math.exp(-1.0), rel=1e-15)
        assert FLAG_A1_UPPER_GLOBAL_CAP in flags

    def test_lower_clamp_flag(self):
        iv = dc.IntensityInterval(mu_minus=0.5, mu_plus=0.6, zeta_bound=3.0)
        _, (a1l, _), _, flags = dc.compute_decoy_bounds(iv)
        assert a1l == 0.0
        assert FLAG_LOWER_CLAMPED in flags


class TestSignalBounds:
    def test_degenerate_reproduces_ideal(self):
        a0p, a1p, bcp, _ = dc.compute_signal_bounds(degenerate(0.6), degenerate(0.2), 1.0)
        ideal = dc.ideal_decomposition(0.2, 0.6)
        assert a0p == pytest.approx(ideal.a0p, rel=1e-14)
        assert a1p == pytest.approx(0.329287, abs=1e-6)
        assert bcp == pytest.approx(ideal.acp, rel=1e-14)
        assert bcp == pytest.approx(0.105715, abs=1e-6)

    def test_omega_scaling(self):
        _, _, bcp, _ = dc.compute_signal_bounds(degenerate(0.6), degenerate(0.2), 0.99)
        assert bcp == pytest.approx(0.99 * 0.105715, abs=1e-6)
        assert bcp == pytest.approx(0.104658, abs=1e-6)

    def test_bcp_sound_over_random_patterns(self):
        rng = np.random.default_rng(8)
        checked = 0
        for _ in range(1000):
            delta = float(rng.uniform(0.01, 0.35))
            deltap = float(rng.uniform(0.01, 0.35))
            mu = float(rng.uniform(0.05, 0.5))
            mup = mu * float(rng.uniform(2.0, 4.0))
            pat = random_pattern(rng, 96, delta)
            patp = random_pattern(rng, 96, deltap)
            d = dc.true_source_decomposition(pat, mu, patp, mup)
            iv = dc.IntensityInterval(mu_minus=mu * (1 - 1e-4), mu_plus=mu * (1 + 1e-4),
                                      zeta_bound=delta**2)
            ivp = dc.IntensityInterval(mu_minus=mup * (1 - 1e-4), mu_plus=mup * (1 + 1e-4),
                                       zeta_bound=deltap**2)
            _, _, bcp, _ = dc.compute_signal_bounds(ivp, iv, 1.0)
            assert bcp <= d.acp * (1 + 1e-12)
            checked += 1
        assert checked == 1000


class TestMonotonicity:
    def test_widening_never_shrinks_intervals(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            mu = float(rng.uniform(0.1, 0.6))
            w1 = float(rng.uniform(0.0, 0.02))
            w2 = w1 + float(rng.uniform(0.0, 0.02))
            z1 = float(rng.uniform(0.0, 0.1))
            z2 = z1 + float(rng.uniform(0.0, 0.05))
            inner = dc.IntensityInterval(mu - w1 * mu, mu + w1 * mu, z1)
            outer = dc.IntensityInterval(mu - w2 * mu, mu + w2 * mu, z2)
            bi = dc.compute_decoy_bounds(inner)
            bo = dc.compute_decoy_bounds(outer)
            for (li, hi_), (lo, ho) in zip(bi[:3], bo[:3]):
                assert lo <= li + 1e-15
                assert ho >= hi_ - 1e-15

    def test_signal_lower_bounds_shrink_with_widening(self):
        inner_p, inner = degenerate(0.6), degenerate(0.2)
        outer_p = dc.IntensityInterval(0.59, 0.61, 0.01)
        outer = dc.IntensityInterval(0.19, 0.21, 0.01)
        tight = dc.compute_signal_bounds(inner_p, inner, 1.0)
        loose = dc.compute_signal_bounds(outer_p, outer, 1.0)
        assert loose[0] <= tight[0]
        assert loose[1] <= tight[1]
        assert loose[2] <= tight[2]


class TestExhaustiveSmallPatterns:
    def test_three_pulse_grid(self):
        # All delta triples with sum zero on a grid; exact coefficients must
        # land inside the intervals certified from the same data.
        mu, xi, delta_max = 0.3, 0.05, 0.3
        grid = np.linspace(-delta_max, delta_max, 21)
        zeta_bound = delta_max**2
        count = 0
        for d1 in grid:
            for d2 in grid:
                d3 = -d1 - d2
                if abs(d3) > delta_max + 1e-12:
                    continue
                pat = dc.FluctuationPattern(deltas=np.array([d1, d2, d3]),
                                            delta_max=delta_max)
                h = float(np.mean(1.0 - np.exp(-xi * pat.intensities(mu))))
                iv = dc.certify_intensity(h, xi, zeta_bound)
                assert iv.mu_minus <= mu <= iv.mu_plus
                (a0l, a0h), (a1l, a1h), (acl, ach), _ = dc.compute_decoy_bounds(iv)
                t = dc.true_decomposition(pat, mu)
                assert a0l <= t.a0 <= a0h
                assert a1l <= t.a1 <= a1h
                assert acl <= t.ac <= ach
                count += 1
        assert count > 300


class TestSourceBoundsRecord:
    def test_interval_ordering_enforced(self):
        with pytest.raises(dc.InvariantViolation):
            dc.SourceBounds(a0_lo=0.9, a0_hi=0.8, a1_lo=0.1, a1_hi=0.2,
                            ac_lo=0.01, ac_hi=0.02, a0p_lo=0.5, a1p_lo=0.3,
                            bcp_lo=0.1)

    def test_bcp_raw_roundtrip(self):
        b = dc.compute_source_bounds(degenerate(0.2), degenerate(0.6), omega_c_lo=0.5)
        assert b.bcp_raw == pytest.approx(b.bcp_lo / 0.5, rel=1e-15)

    def test_second_moment_flag_recorded(self):
        b = dc.compute_source_bounds(degenerate(0.2), degenerate(0.6),
                                     multiphoton_second_moment=False)
        assert b.multiphoton_second_moment is False

    def test_study_variant_drops_only_multiphoton_terms(self):
        iv = dc.IntensityInterval(0.1999, 0.2001, 0.04)
        ivp = dc.IntensityInterval(0.5999, 0.6001, 0.04)
        cert = dc.compute_source_bounds(iv, ivp, multiphoton_second_moment=True)
        study = dc.compute_source_bounds(iv, ivp, multiphoton_second_moment=False)
        assert study.ac_hi < cert.ac_hi
        assert study.bcp_lo > cert.bcp_lo
        assert study.a1_lo == cert.a1_lo
        assert study.a1_hi == cert.a1_hi
        assert study.a1p_lo == cert.a1p_lo
        assert study.a0_hi == cert.a0_hi
