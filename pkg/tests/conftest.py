"""Shared scenario helpers for the test suite.

Randomized soundness tests draw scenarios through this module so the sampling
domain (envelopes up to 0.35, transmittance 1e-5..1e-2, dark up to 1e-5) is
identical everywhere it is exercised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

import decoycert as dc


@dataclass
class Scenario:
    pattern: dc.FluctuationPattern
    pattern_p: dc.FluctuationPattern
    mu: float
    mup: float
    xi: float
    eta: float
    dark: float
    n_pulses: float
    zeta_bound: float
    zetap_bound: float


def random_pattern(rng: np.random.Generator, n: int, delta: float) -> dc.FluctuationPattern:
    shape = rng.choice(("uniform", "two-point", "histogram"))
    bins = None
    if shape == "histogram":
        bins = [(0.5, float(rng.uniform(0.1, 0.9)) * delta), (0.5, delta)]
    return dc.gen_fluctuation_pattern(n, delta, shape, rng=rng, bins=bins)


def random_scenario(rng: np.random.Generator, n_pattern: int = 192,
                    delta_max: float = 0.35) -> Scenario:
    delta = float(rng.uniform(0.01, delta_max))
    deltap = float(rng.uniform(0.01, delta_max))
    mu = float(rng.uniform(0.05, 0.5))
    mup = mu * float(rng.uniform(2.0, 4.0))
    return Scenario(
        pattern=random_pattern(rng, n_pattern, delta),
        pattern_p=random_pattern(rng, n_pattern, deltap),
        mu=mu, mup=mup,
        xi=float(rng.uniform(0.02, 0.1)),
        eta=float(10.0 ** rng.uniform(-5.0, -2.0)),
        dark=float(rng.uniform(0.0, 1e-5)),
        n_pulses=float(10.0 ** rng.uniform(8.0, 11.0)),
        zeta_bound=delta * delta,
        zetap_bound=deltap * deltap,
    )


def monitor_rate(pattern: dc.FluctuationPattern, mu_bar: float, xi: float) -> float:
    """Exact monitor click rate mean(1 - e^{-xi mu_i})."""
    return float(np.mean(1.0 - np.exp(-xi * pattern.intensities(mu_bar))))


def certify_scenario(sc: Scenario):
    """Tomography and certified source bounds for a scenario; None when the
    click rates fall outside the certified regime."""
    h = monitor_rate(sc.pattern, sc.mu, sc.xi)
    hp = monitor_rate(sc.pattern_p, sc.mup, sc.xi)
    try:
        iv = dc.certify_intensity(h, sc.xi, sc.zeta_bound)
        ivp = dc.certify_intensity(hp, sc.xi, sc.zetap_bound)
    except dc.ValidityError:
        return None
    return iv, ivp, dc.compute_source_bounds(iv, ivp)
