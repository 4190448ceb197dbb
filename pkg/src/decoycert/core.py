"""Domain types, the counting-rate composition law, and Poissonian source decompositions.

A 3-intensity decoy protocol sends three pulse classes: vacuum (Y0), decoy (Y,
nominal intensity mu) and signal (Y', nominal intensity mu' > mu).  Each class
is a convex mixture of photon-number subclasses, and the observed counting
rate of a class is the fraction-weighted sum of the subclass counting rates.
Everything downstream (tomography, interval bounds, the yield solver) consumes
the scalar mixture coefficients computed here.

Coefficients are evaluated with exact closed forms; there is no series
truncation in this module.  Probability sums are checked at 1e-12 and
violations raise, never silently renormalize: a silent fix here could mask a
soundness bug in the certification chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation

SUM_TOL = 1e-12


def _as_readonly_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvariantViolation(f"expected a 1-d sequence, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FluctuationPattern:
    """Per-pulse relative intensity errors delta_i with zero mean.

    ``delta_max`` is a declared bound on max |delta_i| (it may exceed the
    realized maximum, e.g. when a device spec guarantees a looser envelope
    than a particular batch achieved).  ``zeta`` is the realized second
    moment sum(delta_i^2)/N.
    """

    deltas: np.ndarray
    delta_max: float = None  # type: ignore[assignment]
    zeta: float = None  # type: ignore[assignment]

    def __post_init__(self):
        arr = _as_readonly_array(self.deltas)
        object.__setattr__(self, "deltas", arr)
        n = arr.size
        if n == 0:
            raise InvariantViolation("pattern must contain at least one pulse")
        realized_max = float(np.max(np.abs(arr)))
        realized_zeta = float(np.mean(arr * arr))
        if self.delta_max is None:
            object.__setattr__(self, "delta_max", realized_max)
        if self.zeta is None:
            object.__setattr__(self, "zeta", realized_zeta)
        if abs(float(np.sum(arr))) > SUM_TOL * n:
            raise InvariantViolation(
                f"pattern errors must sum to zero (got {float(np.sum(arr)):.3e} over {n} pulses)")
        if realized_max > self.delta_max + 1e-15:
            raise InvariantViolation(
                f"|delta_i| = {realized_max:.6g} exceeds declared delta_max = {self.delta_max:.6g}")
        if abs(self.zeta - realized_zeta) > 1e-12:
            raise InvariantViolation(
                f"zeta = {self.zeta:.6g} does not match the realized second moment {realized_zeta:.6g}")
        if not 0.0 <= self.zeta <= self.delta_max**2 + 1e-15:
            raise InvariantViolation(
                f"zeta = {self.zeta:.6g} outside [0, delta_max^2 = {self.delta_max**2:.6g}]")

    @property
    def n(self) -> int:
        return int(self.deltas.size)

    def intensities(self, mu_bar: float) -> np.ndarray:
        """Per-pulse intensities mu_i = (1 + delta_i) * mu_bar."""
        mu_i = mu_bar * (1.0 + self.deltas)
        if np.any(mu_i <= 0.0):
            raise InvariantViolation("all per-pulse intensities must be positive")
        return mu_i

    @classmethod
    def from_deltas(cls, deltas, delta_max: float | None = None) -> "FluctuationPattern":
        return cls(deltas=_as_readonly_array(deltas), delta_max=delta_max, zeta=None)


@dataclass(frozen=True)
class ClassDecomposition:
    """Vacuum / single-photon / multi-photon fractions of one pulse class."""

    a0: float
    a1: float
    ac: float

    def __post_init__(self):
        for name in ("a0", "a1", "ac"):
            v = getattr(self, name)
            if v < -SUM_TOL:
                raise InvariantViolation(f"{name} = {v:.6g} is negative")
        total = self.a0 + self.a1 + self.ac
        if abs(total - 1.0) > SUM_TOL:
            raise InvariantViolation(f"a0 + a1 + ac = {total!r} must equal 1 within {SUM_TOL}")


@dataclass(frozen=True)
class SourceDecomposition:
    """Mixture coefficients for the decoy class and the signal class.

    The signal class is written as a convex combination over vacuum, a single
    photon, the decoy class's shared multi-photon state (coefficient ``acp``)
    and a residual state (coefficient ``adp``).
    """

    a0: float
    a1: float
    ac: float
    a0p: float
    a1p: float
    acp: float
    adp: float

    def __post_init__(self):
        for name in ("a0", "a1", "ac", "a0p", "a1p", "acp", "adp"):
            v = getattr(self, name)
            if v < -SUM_TOL:
                raise InvariantViolation(f"{name} = {v:.6g} is negative")
        if abs(self.a0 + self.a1 + self.ac - 1.0) > SUM_TOL:
            raise InvariantViolation("decoy-class fractions must sum to 1")
        if abs(self.a0p + self.a1p + self.acp + self.adp - 1.0) > SUM_TOL:
            raise InvariantViolation("signal-class fractions must sum to 1")

    @property
    def decoy(self) -> ClassDecomposition:
        return ClassDecomposition(self.a0, self.a1, self.ac)


@dataclass(frozen=True)
class ObservedRates:
    """Directly observed quantities of one experimental run.

    ``h`` and ``hp`` are the monitor click rates of the decoy and signal
    classes with the monitor dark rate ``d0`` already subtracted (the
    subtraction happens at ingestion, keeping this layer exact).
    """

    S0: float
    S: float
    Sp: float
    h: float
    hp: float
    d0: float
    N: float
    Np: float
    N0: float
    xi: float

    def __post_init__(self):
        for name in ("S0", "S", "Sp", "h", "hp", "d0"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvariantViolation(f"rate {name} = {v!r} outside [0, 1]")
        for name in ("N", "Np", "N0"):
            v = getattr(self, name)
            if v < 1:
                raise InvariantViolation(f"pulse count {name} = {v!r} must be >= 1")
        if not 0.0 < self.xi <= 1.0:
            raise InvariantViolation(f"monitor efficiency xi = {self.xi!r} outside (0, 1]")


@dataclass(frozen=True)
class ChannelYields:
    """Per-photon-number counting rates, the simulation ground truth.

    ``yields[n]`` is the counting rate for an n-photon pulse; photon numbers
    beyond the last entry reuse the final value, so class rates computed from
    this table are exact under that convention rather than truncated.
    """

    yields: np.ndarray = field()

    def __post_init__(self):
        arr = _as_readonly_array(self.yields)
        object.__setattr__(self, "yields", arr)
        if arr.size == 0:
            raise InvariantViolation("yields table must not be empty")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise InvariantViolation("every per-photon-number yield must lie in [0, 1]")

    def rate(self, n_photons: int) -> float:
        if n_photons < 0:
            raise InvariantViolation("photon number must be >= 0")
        return float(self.yields[min(n_photons, self.yields.size - 1)])


def compose_counting_rate(fractions, rates) -> float:
    """Counting rate of a class from subclass fractions and subclass rates.

    The observed counts of a class are the sum of the counts contributed by
    each subclass, so the class rate is sum(a_i * s_i).

    Args:
        fractions: subclass probabilities, must sum to 1 within 1e-12.
        rates: subclass counting rates, each in [0, 1].

    Returns:
        The composed counting rate, guaranteed inside [min(rates), max(rates)].
    """
    a = np.asarray(fractions, dtype=np.float64)
    s = np.asarray(rates, dtype=np.float64)
    if a.shape != s.shape or a.ndim != 1:
        raise InvariantViolation(
            f"fractions and rates must be 1-d and matching, got {a.shape} vs {s.shape}")
    if abs(float(np.sum(a)) - 1.0) > SUM_TOL:
        raise InvariantViolation(f"fractions sum to {float(np.sum(a))!r}, expected 1")
    if np.any(a < -SUM_TOL):
        raise InvariantViolation("fractions must be nonnegative")
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise InvariantViolation("every rate must lie in [0, 1]")
    return float(np.dot(a, s))


def ideal_decomposition(mu: float, mup: float | None = None) -> SourceDecomposition:
    """Decomposition of exact coherent sources of intensity mu and mup.

    For coherent light the photon-number distribution is Poissonian, so
    A0 = e^-mu, A1 = mu e^-mu and Ac = 1 - A0 - A1.  The signal class shares
    the decoy class's multi-photon state with coefficient
    Acp = Ac * mup^2 e^-mup / (mu^2 e^-mu), and the residual coefficient is
    adp = 1 - A0p - A1p - Acp.

    Raises:
        InvariantViolation: if adp comes out negative, which signals that mup
            is too close to mu for the convex form to exist.
    """
    if mup is None:
        mup = mu
    if not 0.0 < mu <= mup:
        raise InvariantViolation(f"need 0 < mu <= mup, got mu={mu!r}, mup={mup!r}")
    a0 = math.exp(-mu)
    a1 = mu * math.exp(-mu)
    ac = 1.0 - a0 - a1
    a0p = math.exp(-mup)
    a1p = mup * math.exp(-mup)
    acp = ac * mup**2 * math.exp(-mup) / (mu**2 * math.exp(-mu))
    adp = 1.0 - a0p - a1p - acp
    if adp < -SUM_TOL:
        raise InvariantViolation(
            f"residual coefficient adp = {adp:.3e} < 0: mup = {mup!r} is too small "
            f"relative to mu = {mu!r} for the convex decomposition to exist")
    adp = max(adp, 0.0)
    return SourceDecomposition(a0=a0, a1=a1, ac=ac, a0p=a0p, a1p=a1p, acp=acp, adp=adp)


def true_decomposition(pattern: FluctuationPattern, mu_bar: float) -> ClassDecomposition:
    """Exact decomposition of one class averaged over a fluctuation pattern.

    a0 = mean(e^-mu_i), a1 = mean(mu_i e^-mu_i), ac = 1 - a0 - a1 with
    mu_i = (1 + delta_i) mu_bar.  Exact sums, no Taylor truncation.
    """
    mu_i = pattern.intensities(mu_bar)
    e = np.exp(-mu_i)
    a0 = float(np.mean(e))
    a1 = float(np.mean(mu_i * e))
    return ClassDecomposition(a0=a0, a1=a1, ac=1.0 - a0 - a1)


def multiphoton_ratio(pattern: FluctuationPattern, mu_bar: float,
                      pattern_p: FluctuationPattern, mup_bar: float) -> float:
    """Exact ratio mean(mu_i'^2 e^-mu_i') / mean(mu_i^2 e^-mu_i).

    This is the factor relating the signal class's shared multi-photon
    coefficient to the decoy class's: acp = ratio * ac.
    """
    mu_i = pattern.intensities(mu_bar)
    mup_i = pattern_p.intensities(mup_bar)
    num = float(np.mean(mup_i**2 * np.exp(-mup_i)))
    den = float(np.mean(mu_i**2 * np.exp(-mu_i)))
    return num / den


def true_source_decomposition(pattern: FluctuationPattern, mu_bar: float,
                              pattern_p: FluctuationPattern, mup_bar: float) -> SourceDecomposition:
    """Exact two-class decomposition for fluctuating decoy and signal sources."""
    decoy = true_decomposition(pattern, mu_bar)
    mup_i = pattern_p.intensities(mup_bar)
    ep = np.exp(-mup_i)
    a0p = float(np.mean(ep))
    a1p = float(np.mean(mup_i * ep))
    acp = multiphoton_ratio(pattern, mu_bar, pattern_p, mup_bar) * decoy.ac
    adp = 1.0 - a0p - a1p - acp
    if adp < -SUM_TOL:
        raise InvariantViolation(
            f"residual coefficient adp = {adp:.3e} < 0: the signal intensities are too "
            "close to the decoy intensities for the convex decomposition to exist")
    return SourceDecomposition(a0=decoy.a0, a1=decoy.a1, ac=decoy.ac,
                               a0p=a0p, a1p=a1p, acp=acp, adp=max(adp, 0.0))
