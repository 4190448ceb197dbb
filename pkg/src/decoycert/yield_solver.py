"""Worst-case lower bound on the single-photon counting rate.

The 3-intensity constraint system, after absorbing the vacuum and statistical
terms, reads

    E  = a1 s1 + ac sc          E  = S  - a0 s0
    E' = a1' s1 + bc' sc        E' = S' - a0' s0' + f1 - ad' sd'

where f1 collects the sampling fluctuation between the two classes' single
photon rates and bc' = omega_c ac' does the same for the shared multi-photon
state.  Defining K1 = E/a1, Kc = E/ac, K1' = E'/a1', Kc' = E'/bc', a
meaningful solution exists whenever

    K1' > K1 > 0   and   Kc > Kc' > 0,

and under those orderings the solved s1 decreases when a0 s0, a1, ac or f1
grow and when a0' s0', a1', bc' or ad' shrink.  The certified lower bound is
therefore the closed form

    s1 = (bc' E - ac E') / (a1 bc' - a1' ac)

evaluated at the corner: maximal a0 s0, a1, ac, f1; minimal a0' s0' (set 0),
a1', bc', ad' (set 0, its rate is unknown but nonnegative, so dropping the
term only lowers the bound).

Statistical terms come in two printed forms.  Before s1 and sc are known, the
bootstrap forms assume sc > 2 eta (if that assumption fails then s1 > eta,
and reporting min(eta, s1) is valid either way):

    f1      <= 10 a1 sqrt(eta / (a1 N))
    omega_c >= 1 - sqrt(1 / (2 eta ac N))

After a solve, the self-consistent forms can be iterated to a fixed point:

    f1      <= f1_factor * a1 sqrt(s1 / (N mu e^-mu))
    omega_c >= 1 - omega_c_factor * sqrt(1 / (sc ac N))

The two factors are exposed because the printed sources disagree on the
omega_c coefficient (10 in the efficiency-comparison form, 1 in the bootstrap
form); verification defaults to the conservative 10, while the efficiency
harness uses 1, which is what the published comparison numbers require.  The
f1 prefactor uses the a1 upper bound and the denominator the nominal
mu e^-mu, both exactly as printed.  No confidence level is advertised for the
factor-10 radii; reports echo the formulas' parameters instead.

A failed condition check returns a typed inconclusive outcome, never a zero
bound, so callers cannot mistake "no certificate" for "certified zero".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ObservedRates
from .errors import InfeasibleProblem, InvariantViolation, ProtocolDiscarded
from .source_bounds import SourceBounds

STATUS_OK = "ok"
STATUS_INCONCLUSIVE = "inconclusive"

R_CORRECTION_SIGNAL = "signal"
R_CORRECTION_PRINTED = "decoy-as-printed"


@dataclass(frozen=True)
class ConditionFlags:
    """Outcome of the solvability check K1' > K1 > 0 and Kc > Kc' > 0."""

    k1_ordering: bool
    kc_ordering: bool

    @property
    def ok(self) -> bool:
        return self.k1_ordering and self.kc_ordering


@dataclass(frozen=True)
class SolverOptions:
    """Formula-variant switches for the worst-case solve; all echoed in reports.

    ``mu_nominal`` is required for the fixed-point f1 form (its denominator is
    N mu e^-mu at the nominal decoy intensity); without it the solver stops at
    the bootstrap stage.  ``mup_nominal``, ``zeta`` and ``zetap`` feed the
    untagged-fraction output.  ``r_correction`` picks the correction factor
    1 - mup*zetap ("signal", matches the published comparison table) or
    1 - mu*zeta ("decoy-as-printed", the formula variant as displayed).
    """

    fixed_point: bool = True
    f1_factor: float = 10.0
    omega_c_factor: float = 10.0
    max_iterations: int = 100
    rel_tol: float = 1e-9
    mu_nominal: float | None = None
    mup_nominal: float | None = None
    zeta: float = 0.0
    zetap: float = 0.0
    r_correction: str = R_CORRECTION_SIGNAL

    def __post_init__(self):
        if self.r_correction not in (R_CORRECTION_SIGNAL, R_CORRECTION_PRINTED):
            raise InvariantViolation(
                f"r_correction must be '{R_CORRECTION_SIGNAL}' or '{R_CORRECTION_PRINTED}'")


@dataclass(frozen=True)
class YieldBoundResult:
    """Certified bound plus everything needed to audit how it was produced.

    ``s1_raw`` keeps the unclamped closed-form value for diagnostics;
    ``s1_lower`` is the reported bound min(eta, clamp(s1_raw, 0, 1)).
    """

    status: str
    s1_lower: float
    sc_at_solution: float
    conditions: ConditionFlags
    f1_used: float
    omega_c_used: float
    s0_bound: float
    delta1_prime: float | None
    capped_by_eta: bool
    s1_raw: float
    iterations: int
    fixed_point_converged: bool
    options: SolverOptions

    @property
    def conditions_ok(self) -> bool:
        return self.conditions.ok


def check_conditions(E: float, Ep: float, a1: float, ac: float,
                     a1p: float, bcp: float) -> ConditionFlags:
    """Evaluate the solvability orderings at one parameter corner.

    Zero or negative denominators make the corresponding ordering fail; this
    is a verdict, not a crash.
    """
    if E < 0.0 or Ep < 0.0:
        return ConditionFlags(k1_ordering=False, kc_ordering=False)
    k1 = E / a1 if a1 > 0.0 else math.inf
    k1p = Ep / a1p if a1p > 0.0 else math.inf
    kc = E / ac if ac > 0.0 else math.inf
    kcp = Ep / bcp if bcp > 0.0 else math.inf
    k1_ok = a1 > 0.0 and a1p > 0.0 and k1p > k1 > 0.0
    kc_ok = ac > 0.0 and bcp > 0.0 and math.isfinite(kc) and kc > kcp > 0.0
    return ConditionFlags(k1_ordering=k1_ok, kc_ordering=kc_ok)


def solve_closed_form(E: float, Ep: float, a1: float, ac: float,
                      a1p: float, bcp: float) -> tuple[float, float]:
    """Exact solution of the 2x2 system; raw values, no clamping.

    Returns:
        (s1, sc) with s1 = (bc' E - ac E') / (a1 bc' - a1' ac) and
        sc = (E - a1 s1) / ac.

    Raises:
        InfeasibleProblem: when a1 * bc' == a1' * ac, the degenerate relation
            under which the two constraint lines are parallel.
    """
    den = a1 * bcp - a1p * ac
    if den == 0.0:
        raise InfeasibleProblem(
            f"singular system: a1 * bcp == a1p * ac ({a1!r} * {bcp!r} == {a1p!r} * {ac!r}); "
            "the two constraints are parallel")
    s1 = (bcp * E - ac * Ep) / den
    if ac == 0.0:
        raise InfeasibleProblem("ac = 0: sc is undetermined")
    sc = (E - a1 * s1) / ac
    return s1, sc


def _statistical_f1_bootstrap(a1: float, eta: float, n: float) -> float:
    # 10 a1 sqrt(eta / (a1 N)), algebraically 10 sqrt(a1 eta / N)
    return 10.0 * math.sqrt(a1 * eta / n)


def _statistical_omega_bootstrap(ac: float, eta: float, n: float) -> float:
    return max(0.0, 1.0 - math.sqrt(1.0 / (2.0 * eta * ac * n)))


def worst_case_s1(obs: ObservedRates, bounds: SourceBounds, eta: float,
                  s0_bound: float = 0.0,
                  options: SolverOptions | None = None) -> YieldBoundResult:
    """Certified lower bound on s1 at the worst-case parameter corner.

    Args:
        obs: observed counting rates and pulse counts.
        bounds: coefficient intervals; its bc' lower bound is rescaled by the
            solver's own statistical omega_c, so build it with omega_c_lo=1
            unless an external statistical factor is intended.
        eta: channel transmittance, used for the bootstrap radii and the
            final min(eta, s1) rule.
        s0_bound: certified upper bound on the vacuum-class counting rate.
        options: formula-variant switches; defaults to SolverOptions().

    Returns:
        YieldBoundResult; status "inconclusive" when the condition check
        fails (distinct from a certified zero bound).
    """
    opts = options or SolverOptions()
    if eta <= 0.0 or eta > 1.0:
        raise InvariantViolation(f"transmittance eta = {eta!r} outside (0, 1]")
    if s0_bound < 0.0 or s0_bound > 1.0:
        raise InvariantViolation(f"s0 bound {s0_bound!r} outside [0, 1]")

    a1 = bounds.a1_hi
    ac = bounds.ac_hi
    a1p = bounds.a1p_lo
    bcp_raw = bounds.bcp_raw
    n = obs.N

    # Worst case of the vacuum term: maximal a0 * s0.
    E = obs.S - bounds.a0_hi * s0_bound

    f1 = _statistical_f1_bootstrap(a1, eta, n)
    omega = _statistical_omega_bootstrap(bounds.ac_lo, eta, n)
    Ep = obs.Sp + f1  # s0' and ad' sd' set to 0: both only lower the bound
    conditions = check_conditions(E, Ep, a1, ac, a1p, omega * bcp_raw)

    def result(status, s1_raw, sc, f1u, omu, iters, converged):
        if status != STATUS_OK:
            # Inconclusive is not a certified zero; keep the bound undefined.
            s1_clamped = math.nan
        else:
            s1_clamped = min(max(s1_raw, 0.0), 1.0)
        capped = eta < s1_clamped
        s1_lower = min(eta, s1_clamped) if status == STATUS_OK else math.nan
        delta1p = None
        if status == STATUS_OK and opts.mup_nominal is not None and obs.Sp > 0.0:
            a1p_nom = opts.mup_nominal * math.exp(-opts.mup_nominal)
            if opts.r_correction == R_CORRECTION_SIGNAL:
                corr = opts.mup_nominal * opts.zetap
            else:
                if opts.mu_nominal is None:
                    raise InvariantViolation(
                        "r_correction='decoy-as-printed' needs mu_nominal")
                corr = opts.mu_nominal * opts.zeta
            delta1p = untagged_fraction(s1_lower, a1p_nom, obs.Sp, corr)
        return YieldBoundResult(
            status=status, s1_lower=s1_lower, sc_at_solution=sc,
            conditions=conditions, f1_used=f1u, omega_c_used=omu,
            s0_bound=s0_bound, delta1_prime=delta1p,
            capped_by_eta=capped if status == STATUS_OK else False,
            s1_raw=s1_raw, iterations=iters, fixed_point_converged=converged,
            options=opts)

    if not conditions.ok:
        return result(STATUS_INCONCLUSIVE, math.nan, math.nan, f1, omega, 0, False)

    s1_boot, sc_boot = solve_closed_form(E, Ep, a1, ac, a1p, omega * bcp_raw)

    if not (opts.fixed_point and opts.mu_nominal is not None):
        return result(STATUS_OK, s1_boot, sc_boot, f1, omega, 0, True)

    # Self-consistent tightening of f1 and omega_c at the solved (s1, sc).
    a1_nom_exp = opts.mu_nominal * math.exp(-opts.mu_nominal)
    s1_it, sc_it = s1_boot, sc_boot
    f1_it, om_it = f1, omega
    converged = False
    iters = 0
    for iters in range(1, opts.max_iterations + 1):
        if s1_it <= 0.0 or sc_it <= 0.0:
            break
        f1_new = opts.f1_factor * a1 * math.sqrt(s1_it / (n * a1_nom_exp))
        om_new = max(0.0, 1.0 - opts.omega_c_factor * math.sqrt(1.0 / (sc_it * bounds.ac_lo * n)))
        cond_it = check_conditions(E, obs.Sp + f1_new, a1, ac, a1p, om_new * bcp_raw)
        if not cond_it.ok:
            break
        s1_new, sc_new = solve_closed_form(E, obs.Sp + f1_new, a1, ac, a1p, om_new * bcp_raw)
        moved = abs(s1_new - s1_it) > opts.rel_tol * max(abs(s1_new), 1e-300)
        s1_it, sc_it, f1_it, om_it = s1_new, sc_new, f1_new, om_new
        if not moved:
            converged = True
            break

    if not converged:
        # Sound but looser: keep the bootstrap solution.
        return result(STATUS_OK, s1_boot, sc_boot, f1, omega, iters, False)
    return result(STATUS_OK, s1_it, sc_it, f1_it, om_it, iters, True)


def bound_s0_dark(S0: float, eps0: float, eps1: float, epsm: float | None = None,
                  s1_est: float | None = None) -> float:
    """Upper bound on the vacuum-subclass rate when Y0 pulses are impure.

    The Y0 class is modeled as (1 - eps0) vacuum + eps1 single photon + epsm
    multi photon with eps0 = eps1 + epsm, so S0 = (1-eps0) s0 + eps1 s1 +
    epsm sm.  Without an s1 estimate this gives the preliminary bound
    S0 / (1 - eps0).  Re-reading the identity after a first solve tightens it
    to min(S0 / (1 - eps0) - eps1 s1, S0).

    Args:
        s1_est: certified s1 from a first solve; triggers the refined bound.

    Raises:
        ProtocolDiscarded: when s1_est < 1.5 * S0; the consistency margin
            assumed by the refinement is absent and the run must be rejected.
        InvariantViolation: eps0 >= 1, negative inputs, or eps0 != eps1 + epsm.
    """
    if not 0.0 <= S0 <= 1.0:
        raise InvariantViolation(f"S0 = {S0!r} outside [0, 1]")
    if eps0 >= 1.0:
        raise InvariantViolation(f"eps0 = {eps0!r} must be < 1")
    if eps0 < 0.0 or eps1 < 0.0:
        raise InvariantViolation("impurity fractions must be >= 0")
    if epsm is None:
        epsm = eps0 - eps1
    if epsm < -1e-15 or abs(eps0 - (eps1 + epsm)) > 1e-12:
        raise InvariantViolation(
            f"need eps0 = eps1 + epsm with epsm >= 0, got {eps0!r} != {eps1!r} + {epsm!r}")
    preliminary = S0 / (1.0 - eps0)
    if s1_est is None:
        return preliminary
    if s1_est < 1.5 * S0:
        raise ProtocolDiscarded(
            f"s1 = {s1_est:.6g} < 1.5 * S0 = {1.5 * S0:.6g}: protocol discarded")
    return max(0.0, min(preliminary - eps1 * s1_est, S0))


def untagged_fraction(s1: float, a1p: float, Sp: float, correction: float = 0.0) -> float:
    """Certified fraction of signal-class detections from single photons.

    Delta1' = s1 * a1p * (1 - correction) / S', where ``a1p`` is the
    single-photon coefficient of the signal class (nominal mup e^-mup in the
    efficiency comparison) and ``correction`` the second-moment factor.
    """
    if Sp <= 0.0:
        raise InvariantViolation(f"signal counting rate Sp = {Sp!r} must be > 0")
    if not 0.0 <= correction <= 1.0:
        raise InvariantViolation(f"correction = {correction!r} outside [0, 1]")
    return s1 * a1p * (1.0 - correction) / Sp


def solve_with_dark_refinement(obs: ObservedRates, bounds: SourceBounds, eta: float,
                               eps0: float = 0.0, eps1: float = 0.0,
                               options: SolverOptions | None = None) -> YieldBoundResult:
    """Full vacuum-impurity pipeline: preliminary s0 bound, solve, refine, re-solve.

    Raises:
        ProtocolDiscarded: propagated from the 1.5 * S0 consistency rule.
    """
    s0_prelim = bound_s0_dark(obs.S0, eps0, eps1)
    first = worst_case_s1(obs, bounds, eta, s0_bound=min(s0_prelim, 1.0), options=options)
    if first.status != STATUS_OK:
        return first
    if eps0 == 0.0 and eps1 == 0.0:
        return first
    s0_refined = bound_s0_dark(obs.S0, eps0, eps1, s1_est=first.s1_lower)
    return worst_case_s1(obs, bounds, eta, s0_bound=s0_refined, options=options)
