"""Certified intervals for the source-decomposition coefficients.

Given tomography output (mu_minus, mu_plus, zeta bound) for each class, this
module bounds every mixture coefficient the yield solver consumes.  For the
decoy class (intensity interval [m-, m+], second-moment bound z):

    e^{-m+}  <=  a0  <=  e^{-m-} (1 + m+^2 z / 2)
    min over endpoints of (1 - x z) x e^{-x}  <=  a1  <=  max over [m-, m+] of x e^{-x}
    g(m-)  <=  ac  <=  g(m+) + (max over [m-, m+] of x^2 e^{-x}) z / 2

with g(x) = 1 - e^{-x} - x e^{-x}.  For the signal class:

    a0' >= e^{-m+'}
    a1' >= min over endpoints of (1 - x z') x e^{-x}
    bc' >= omega_c * (min endpoint of x^2 e^{-x} on [m-', m+']) * g(m-)
                   / ((1 + z) * max over [m-, m+] of x^2 e^{-x})
    ad' >= 0

In the usual operating regime (m+ <= 1 for the intensities entering
x e^{-x}, m+ <= 2 for those entering x^2 e^{-x}) the endpoint/mode logic
reduces exactly to evaluating the monotone branch at m- or m+.  Outside it,
x e^{-x} peaks at 1 and x^2 e^{-x} at 2, so interval extrema sit at an
endpoint or the mode; using them keeps every bound valid instead of silently
extrapolating a monotonicity that no longer holds.  When the a1 upper bound
leaves the monotone regime it is capped at the global maximum 1/e and the
result is flagged as reduced tightness.

Negative lower bounds clamp to 0 (all coefficients are probabilities, so the
clamp is sound) and set a flag.

``multiphoton_second_moment`` controls the two second-moment corrections to
the multi-photon sector: the + (...) z / 2 inflation of the ac upper bound
and the 1/(1+z) deflation of the bc' lower bound.  The certified default is
True.  The efficiency-study harness disables it to reproduce the published
comparison table, which omits both corrections; reports echo the flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvariantViolation
from .tomography import IntensityInterval

FLAG_A1_UPPER_GLOBAL_CAP = "a1-upper-capped-at-1/e"
FLAG_LOWER_CLAMPED = "negative-lower-bound-clamped-to-0"


def _xexp(x: float) -> float:
    return x * math.exp(-x)


def _x2exp(x: float) -> float:
    return x * x * math.exp(-x)


def _gee(x: float) -> float:
    """Poisson multi-photon mass 1 - e^-x - x e^-x, increasing in x."""
    return 1.0 - math.exp(-x) - x * math.exp(-x)


def _max_x2exp(lo: float, hi: float) -> float:
    """Max of x^2 e^-x over [lo, hi]; the function peaks at x = 2."""
    if lo <= 2.0 <= hi:
        return _x2exp(2.0)
    return max(_x2exp(lo), _x2exp(hi))


@dataclass(frozen=True)
class SourceBounds:
    """Certified coefficient intervals feeding the worst-case yield solve.

    ``bcp_lo`` includes the ``omega_c_lo`` factor it was computed with; the
    solver recovers the statistical-factor-free value as bcp_lo / omega_c_lo
    before applying its own omega_c.  ``adp_lo`` is identically 0 (the
    residual coefficient has no useful lower bound beyond nonnegativity).
    """

    a0_lo: float
    a0_hi: float
    a1_lo: float
    a1_hi: float
    ac_lo: float
    ac_hi: float
    a0p_lo: float
    a1p_lo: float
    bcp_lo: float
    adp_lo: float = 0.0
    omega_c_lo: float = 1.0
    multiphoton_second_moment: bool = True
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        for lo, hi in (("a0_lo", "a0_hi"), ("a1_lo", "a1_hi"), ("ac_lo", "ac_hi")):
            vlo, vhi = getattr(self, lo), getattr(self, hi)
            if not 0.0 <= vlo <= vhi <= 1.0:
                raise InvariantViolation(f"bad interval {lo}={vlo!r}, {hi}={vhi!r}")
        for name in ("a0p_lo", "a1p_lo", "bcp_lo"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvariantViolation(f"{name} = {v!r} outside [0, 1]")
        if self.adp_lo != 0.0:
            raise InvariantViolation("adp_lo is fixed at 0")
        if not 0.0 < self.omega_c_lo:
            raise InvariantViolation("omega_c_lo must be positive")

    @property
    def bcp_raw(self) -> float:
        """bc' lower bound with the statistical omega_c factor divided out."""
        return self.bcp_lo / self.omega_c_lo


def compute_decoy_bounds(iv: IntensityInterval, *, multiphoton_second_moment: bool = True):
    """Intervals for (a0, a1, ac) of the decoy class.

    Returns:
        ((a0_lo, a0_hi), (a1_lo, a1_hi), (ac_lo, ac_hi), flags)
    """
    if iv.mu_minus <= 0.0:
        raise InvariantViolation("decoy intensity lower endpoint must be positive")
    mlo, mhi, z = iv.mu_minus, iv.mu_plus, iv.zeta_bound
    flags: list[str] = []

    a0_lo = math.exp(-mhi)
    a0_hi = min(1.0, math.exp(-mlo) * (1.0 + mhi * mhi * z / 2.0))

    if mhi <= 1.0:
        a1_hi = _xexp(mhi)
    else:
        a1_hi = math.exp(-1.0)
        flags.append(FLAG_A1_UPPER_GLOBAL_CAP)

    def f1lo(x: float) -> float:
        return (1.0 - x * z) * _xexp(x)

    a1_lo = min(f1lo(mlo), f1lo(mhi))
    if a1_lo < 0.0:
        a1_lo = 0.0
        flags.append(FLAG_LOWER_CLAMPED)

    ac_lo = _gee(mlo)
    ac_hi = _gee(mhi)
    if multiphoton_second_moment:
        ac_hi += _max_x2exp(mlo, mhi) * z / 2.0
    ac_hi = min(ac_hi, 1.0)

    return (a0_lo, a0_hi), (a1_lo, a1_hi), (ac_lo, ac_hi), tuple(flags)


def compute_signal_bounds(iv_prime: IntensityInterval, iv: IntensityInterval,
                          omega_c_lo: float = 1.0, *,
                          multiphoton_second_moment: bool = True):
    """Lower bounds (a0p_lo, a1p_lo, bcp_lo, flags) for the signal class.

    ``iv`` is the decoy-class interval; its endpoints and zeta bound enter the
    bc' bound through the shared multi-photon coefficient ratio.
    ``omega_c_lo`` is a lower bound on the statistical factor relating the
    shared multi-photon state's counting rates across the two classes; pass 1
    to obtain the purely geometric bound.
    """
    if iv_prime.mu_minus <= 0.0 or iv.mu_minus <= 0.0:
        raise InvariantViolation("intensity lower endpoints must be positive")
    if not 0.0 <= omega_c_lo <= 1.0 + 1e-12:
        raise InvariantViolation(f"omega_c_lo = {omega_c_lo!r} outside [0, 1]")
    mplo, mphi, zp = iv_prime.mu_minus, iv_prime.mu_plus, iv_prime.zeta_bound
    mlo, mhi, z = iv.mu_minus, iv.mu_plus, iv.zeta_bound
    flags: list[str] = []

    a0p_lo = math.exp(-mphi)

    def fplo(x: float) -> float:
        return (1.0 - x * zp) * _xexp(x)

    a1p_lo = min(fplo(mplo), fplo(mphi))
    if a1p_lo < 0.0:
        a1p_lo = 0.0
        flags.append(FLAG_LOWER_CLAMPED)

    ratio_num = min(_x2exp(mplo), _x2exp(mphi))
    ratio_den = _max_x2exp(mlo, mhi)
    if multiphoton_second_moment:
        ratio_den *= 1.0 + z
    # bc' is a convex-mixture coefficient, so capping at 1 keeps the bound valid.
    bcp_lo = min(1.0, omega_c_lo * ratio_num * _gee(mlo) / ratio_den)
    if bcp_lo < 0.0:
        bcp_lo = 0.0
        flags.append(FLAG_LOWER_CLAMPED)

    return a0p_lo, a1p_lo, bcp_lo, tuple(flags)


def compute_source_bounds(iv: IntensityInterval, iv_prime: IntensityInterval,
                          omega_c_lo: float = 1.0, *,
                          multiphoton_second_moment: bool = True) -> SourceBounds:
    """Assemble the full SourceBounds record for both classes."""
    (a0_lo, a0_hi), (a1_lo, a1_hi), (ac_lo, ac_hi), dflags = compute_decoy_bounds(
        iv, multiphoton_second_moment=multiphoton_second_moment)
    a0p_lo, a1p_lo, bcp_lo, sflags = compute_signal_bounds(
        iv_prime, iv, omega_c_lo, multiphoton_second_moment=multiphoton_second_moment)
    return SourceBounds(
        a0_lo=a0_lo, a0_hi=a0_hi, a1_lo=a1_lo, a1_hi=a1_hi, ac_lo=ac_lo, ac_hi=ac_hi,
        a0p_lo=a0p_lo, a1p_lo=a1p_lo, bcp_lo=bcp_lo,
        omega_c_lo=omega_c_lo, multiphoton_second_moment=multiphoton_second_moment,
        flags=tuple(dict.fromkeys(dflags + sflags)))
