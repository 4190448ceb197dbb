"""Certified mean-intensity intervals from monitor-detector click rates.

Alice splits every pulse on a 50:50 beam splitter and watches the reflected
arm with a low-efficiency detector (efficiency xi, modeled as an attenuator
followed by a perfect yes/no detector).  With per-pulse intensities
mu_i = (1 + delta_i) mu_bar the click rate satisfies

    h = mean(1 - e^{-xi mu_i}).

Because sum(delta_i) = 0, Taylor control of that average pins mu_bar between
closed-form endpoints that depend only on (h, xi) and a bound zeta on the
second moment of the errors:

    lower (simple):   mu_bar >= h / xi                        (concavity)
    upper:            mu_bar <= (1 - sqrt(1 - 2h(1+zeta))) / (xi (1+zeta))
    lower (refined):  mu_bar >= h/xi + h^2/(2 xi) - xi^2 mu_plus^3 / 3!

The refined lower bound keeps the third-order term of the expansion; its
remainder is not controlled analytically here, so ``certify_intensity``
additionally enforces xi * mu_plus < 0.5 (outside that regime the truncated
series soundness is not established) and reports max(refined, simple), both
being valid lower bounds.  Monte-Carlo soundness of the sandwich is exercised
in the test suite over random patterns.

Callers must subtract the monitor dark rate from the observed click rate
before entering this module (the CLI ingestion layer does this and clamps
negative results to zero with a warning).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvariantViolation, ValidityError

# Above this the truncated Taylor expansions are not certified.
MAX_XI_MU_PLUS = 0.5


@dataclass(frozen=True)
class IntensityInterval:
    """Certified interval for a class's mean intensity plus its zeta bound."""

    mu_minus: float
    mu_plus: float
    zeta_bound: float

    def __post_init__(self):
        if not 0.0 <= self.mu_minus <= self.mu_plus:
            raise InvariantViolation(
                f"need 0 <= mu_minus <= mu_plus, got [{self.mu_minus!r}, {self.mu_plus!r}]")
        if self.zeta_bound < 0.0:
            raise InvariantViolation(f"zeta bound {self.zeta_bound!r} must be >= 0")

    @classmethod
    def exact(cls, mu: float) -> "IntensityInterval":
        """Degenerate interval for a source with exactly known intensity."""
        return cls(mu_minus=mu, mu_plus=mu, zeta_bound=0.0)


def _check_h_xi(h: float, xi: float) -> None:
    if not 0.0 <= h < 1.0:
        raise InvariantViolation(f"click rate h = {h!r} outside [0, 1)")
    if not 0.0 < xi <= 1.0:
        raise InvariantViolation(f"monitor efficiency xi = {xi!r} outside (0, 1]")


def mu_lower_simple(h: float, xi: float) -> float:
    """First-order lower bound h / xi, valid for any error pattern."""
    _check_h_xi(h, xi)
    return h / xi


def mu_upper(h: float, xi: float, zeta_bound: float) -> float:
    """Upper bound on the mean intensity given a second-moment bound.

    Args:
        h: dark-subtracted monitor click rate.
        xi: monitor detection efficiency.
        zeta_bound: bound on sum(delta_i^2)/N for the class.

    Returns:
        mu_plus = (1 - sqrt(1 - 2h(1+zeta))) / (xi (1+zeta)).

    Raises:
        ValidityError: if 2h(1+zeta) >= 1, i.e. the click rate is too high
            for this expansion; such input is rejected rather than bounded.
    """
    _check_h_xi(h, xi)
    if zeta_bound < 0.0:
        raise InvariantViolation(f"zeta bound {zeta_bound!r} must be >= 0")
    radicand = 1.0 - 2.0 * h * (1.0 + zeta_bound)
    if radicand <= 0.0:
        raise ValidityError(
            f"2h(1+zeta) = {2.0 * h * (1.0 + zeta_bound):.6g} >= 1: click rate too "
            "high for the quadratic expansion")
    return (1.0 - math.sqrt(radicand)) / (xi * (1.0 + zeta_bound))


def mu_lower_refined(h: float, xi: float, mu_plus: float) -> float:
    """Third-order lower bound h/xi + h^2/(2 xi) - xi^2 mu_plus^3 / 6.

    Can fall below h/xi for tiny h; callers should report
    max(mu_lower_refined, mu_lower_simple), both being proven lower bounds.
    """
    _check_h_xi(h, xi)
    if mu_plus < 0.0:
        raise InvariantViolation(f"mu_plus = {mu_plus!r} must be >= 0")
    if h == 0.0:
        return 0.0
    return h / xi + h * h / (2.0 * xi) - xi * xi * mu_plus**3 / 6.0


def zeta_from_delta(delta_max: float) -> float:
    """Second-moment bound from the max-error envelope: zeta <= delta_max^2."""
    if delta_max < 0.0:
        raise InvariantViolation(f"delta_max = {delta_max!r} must be >= 0")
    return delta_max * delta_max


def zeta_from_histogram(bins) -> float:
    """Second-moment bound from a histogram of per-pulse error envelopes.

    Args:
        bins: sequence of (fraction of pulses, per-bin max |delta_i|) pairs;
            the fractions must sum to 1.

    Returns:
        sum(fraction_k * bound_k^2), never larger than
        zeta_from_delta(max bound).
    """
    bins = list(bins)
    if not bins:
        raise InvariantViolation("histogram must contain at least one bin")
    total = math.fsum(frac for frac, _ in bins)
    if abs(total - 1.0) > 1e-12:
        raise InvariantViolation(f"histogram fractions sum to {total!r}, expected 1")
    out = 0.0
    for frac, bound in bins:
        if frac < 0.0:
            raise InvariantViolation(f"histogram fraction {frac!r} is negative")
        if bound < 0.0:
            raise InvariantViolation(f"histogram bin bound {bound!r} is negative")
        out += frac * bound * bound
    return out


def certify_intensity(h: float, xi: float, zeta_bound: float) -> IntensityInterval:
    """Full tomography step: certified [mu_minus, mu_plus] for one class.

    Combines the three bounds, reporting max(simple, refined) as the lower
    endpoint, and enforces the expansion-regime guard xi * mu_plus < 0.5.
    """
    plus = mu_upper(h, xi, zeta_bound)
    if xi * plus >= MAX_XI_MU_PLUS:
        raise ValidityError(
            f"xi * mu_plus = {xi * plus:.6g} >= {MAX_XI_MU_PLUS}: outside the regime "
            "where the truncated expansions are certified")
    minus = max(mu_lower_simple(h, xi), mu_lower_refined(h, xi, plus))
    return IntensityInterval(mu_minus=minus, mu_plus=plus, zeta_bound=zeta_bound)
