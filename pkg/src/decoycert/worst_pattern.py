"""Certified s1 bound under arbitrary, possibly adversarial, intensity patterns.

When per-pulse intensities are not random (an adversary may correlate a
time-dependent channel with a deterministic intensity drift), the two classes'
subclasses can no longer be treated as randomly mixed samples of each other,
and the statistical-fluctuation machinery of the main solver does not apply.
A weaker but unconditional constraint system still holds provided every decoy
pulse has intensity at most mu and every signal pulse at least mup:

    A1 s1 + Ac sc  = E,        E = S - e^-mu s0
    A1' s1 + Ac' sc <= S'

with the exact constants A1 = mu e^-mu, Ac = 1 - e^-mu - mu e^-mu,
A1' = mup e^-mup, Ac' = Ac mup^2 e^-mup / (mu^2 e^-mu), and 0 <= s1, sc <= 1.
Minimizing s1 over that polytope is the certified bound.  The system is
linear with at most six faces, so the minimum is found by exact corner
enumeration; no iterative LP is needed (tests cross-check against an LP and a
dense grid).

The finite-size extension replaces (s1, sc) in the inequality with primed
copies tied to the originals by caller-supplied sampling radii
|s1 - s1'| <= r1, |sc - sc'| <= rc.  The radii are inputs on purpose: the
concentration inequality used to produce them is the caller's statistical
contract, and hard-coding one here would silently couple the solver's
soundness to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleProblem, InvariantViolation

_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class Num5Problem:
    """Inputs of the unconditional constraint system.

    The caller guarantees the intensity hypothesis (every decoy pulse at most
    ``mu``, every signal pulse at least ``mup``); the solver only checks
    mu < mup, which the constants require.
    """

    mu: float
    mup: float
    S: float
    Sp: float
    s0: float = 0.0
    sampling_radii: tuple[float, float] | None = None

    def __post_init__(self):
        if not 0.0 < self.mu < self.mup:
            raise InvariantViolation(f"need 0 < mu < mup, got {self.mu!r}, {self.mup!r}")
        for name in ("S", "Sp", "s0"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvariantViolation(f"rate {name} = {v!r} outside [0, 1]")
        if self.sampling_radii is not None:
            r1, rc = self.sampling_radii
            if r1 < 0.0 or rc < 0.0:
                raise InvariantViolation("sampling radii must be >= 0")


def num5_constants(mu: float, mup: float) -> tuple[float, float, float, float]:
    """(A1, Ac, A1p, Acp) for nominal intensities mu < mup."""
    a1 = mu * math.exp(-mu)
    ac = 1.0 - math.exp(-mu) - a1
    a1p = mup * math.exp(-mup)
    acp = ac * mup**2 * math.exp(-mup) / (mu**2 * math.exp(-mu))
    return a1, ac, a1p, acp


def _effective_rate(p: Num5Problem) -> float:
    return p.S - math.exp(-p.mu) * p.s0


def _s1_box(E: float, a1: float, ac: float) -> tuple[float, float]:
    """Range of s1 allowed by the equality constraint and 0 <= sc <= 1."""
    if E > a1 + ac + _FEAS_TOL:
        raise InfeasibleProblem(
            f"E = {E:.6g} exceeds A1 + Ac = {a1 + ac:.6g}: the equality constraint "
            "cannot be met with subclass rates in [0, 1]")
    lo = max(0.0, (E - ac) / a1)
    hi = min(1.0, E / a1)
    return lo, min(hi, 1.0)


def solve_num5_asymptotic(p: Num5Problem) -> float:
    """Minimum s1 consistent with the asymptotic constraint system.

    Returns:
        max(bound, 0); exactly 0 when E <= 0 (no decoy counts beyond the
        vacuum term certify nothing).

    Raises:
        InfeasibleProblem: the constraints admit no solution, which means the
            observed rates are mutually inconsistent.
    """
    a1, ac, a1p, acp = num5_constants(p.mu, p.mup)
    E = _effective_rate(p)
    if E <= 0.0:
        return 0.0
    lo, hi = _s1_box(E, a1, ac)
    if lo > hi + _FEAS_TOL:
        raise InfeasibleProblem("empty s1 box: observed rates are inconsistent")

    def lhs(s1: float) -> float:
        sc = (E - a1 * s1) / ac
        return a1p * s1 + acp * sc

    # lhs is decreasing in s1 (A1' - Ac' A1 / Ac < 0 whenever mup > mu), so
    # the inequality binds from below; its crossing is the same closed form
    # as the main solver with bc' -> Ac', E' -> S'.
    if lhs(hi) > p.Sp + _FEAS_TOL:
        raise InfeasibleProblem(
            f"signal constraint unsatisfiable: even at s1 = {hi:.6g} the shared-state "
            f"counts exceed Sp = {p.Sp:.6g}")
    den = a1 * acp - a1p * ac
    crossing = (acp * E - ac * p.Sp) / den
    return max(0.0, lo, min(crossing, hi))


def solve_num5_finite(p: Num5Problem) -> float:
    """Finite-size variant with sampling radii decoupling the two constraints.

    Minimizes s1 subject to A1 s1 + Ac sc = E, A1' s1' + Ac' sc' <= S',
    |s1 - s1'| <= r1, |sc - sc'| <= rc, all four variables in [0, 1].  With
    the equality eliminating sc, feasibility at a candidate s1 only needs the
    least-demanding primed pair, so the active constraint is

        g(s1) = A1' max(0, s1 - r1) + Ac' max(0, sc(s1) - rc) - S' <= 0,

    a piecewise-linear function scanned exactly over its breakpoints.
    """
    if p.sampling_radii is None:
        raise InvariantViolation("solve_num5_finite requires sampling_radii")
    r1, rc = p.sampling_radii
    a1, ac, a1p, acp = num5_constants(p.mu, p.mup)
    E = _effective_rate(p)
    if E <= 0.0:
        return 0.0
    lo, hi = _s1_box(E, a1, ac)
    if lo > hi + _FEAS_TOL:
        raise InfeasibleProblem("empty s1 box: observed rates are inconsistent")

    def sc_of(s1: float) -> float:
        return (E - a1 * s1) / ac

    def g(s1: float) -> float:
        return (a1p * max(0.0, s1 - r1)
                + acp * max(0.0, sc_of(s1) - rc)
                - p.Sp)

    # Breakpoints of g inside [lo, hi]: the two hinge activations.
    points = {lo, hi}
    if lo < r1 < hi:
        points.add(r1)
    s1_at_rc = (E - ac * rc) / a1
    if lo < s1_at_rc < hi:
        points.add(s1_at_rc)
    knots = sorted(points)

    if g(hi) > _FEAS_TOL:
        raise InfeasibleProblem(
            "signal constraint unsatisfiable even at the largest admissible s1")

    for left, right in zip(knots, knots[1:]):
        gl, gr = g(left), g(right)
        if gl <= _FEAS_TOL:
            return max(0.0, left)
        if gr <= _FEAS_TOL:
            # Linear on the segment; locate the crossing exactly.
            if gl == gr:
                return max(0.0, right)
            t = gl / (gl - gr)
            return max(0.0, left + t * (right - left))
    return max(0.0, hi)
