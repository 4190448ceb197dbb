"""Ground-truth experiment generation for soundness tests and the efficiency table.

Scenarios are pure functions of (config, seed); the random generator is the
named, portable PCG64 behind numpy's default_rng, so identical seeds produce
bit-identical scenarios on any platform.

Asymptotic mode computes expected counting rates in closed form from a finite
sample of per-pulse relative errors standing in for the full pulse
population: for a linear-loss channel the class rate is exactly
mean(1 - (1-dark) e^{-eta mu_i}), and for an arbitrary per-photon-number
yield table the Poisson mixture is summed with its tail mass assigned to the
table's last entry, so there is no truncation error under that convention.
Sampled mode draws binomial counts at the asymptotic rates, which is the
exact law when each pulse's intensity is an independent draw from the error
sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (ChannelYields, FluctuationPattern, ObservedRates,
                   true_source_decomposition)
from .errors import InvariantViolation, ValidityError
from .source_bounds import compute_source_bounds
from .tomography import IntensityInterval, certify_intensity, zeta_from_delta
from .yield_solver import (STATUS_OK, R_CORRECTION_SIGNAL, SolverOptions,
                           worst_case_s1)

RNG_NAME = "pcg64"  # numpy default_rng; fixed here so configs are self-describing

PAPER_DELTA_GRID = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35)

H_MODEL_EXACT = "exact"
H_MODEL_TAYLOR2 = "taylor2"

PATTERN_SHAPES = ("uniform", "two-point", "histogram")


@dataclass(frozen=True)
class ChannelModel:
    """Linear-loss channel: an n-photon pulse clicks unless all photons are
    lost and no dark count fires."""

    eta: float
    dark_rate: float = 0.0
    mode: str = "iid-linear"

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise InvariantViolation(f"transmittance eta = {self.eta!r} outside (0, 1]")
        if not 0.0 <= self.dark_rate < 1.0:
            raise InvariantViolation(f"dark rate {self.dark_rate!r} outside [0, 1)")
        if self.mode not in ("iid-linear", "time-varying-adversarial"):
            raise InvariantViolation(f"unknown channel mode {self.mode!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Source-side scenario description.

    ``n_pulses``/``np_pulses`` are the pulse counts entering the statistical
    fluctuation formulas; ``pattern_samples`` is the size of the error sample
    representing the population (the certified bounds depend on the pattern
    only through its click-rate average and declared envelope, so a modest
    sample is enough; see the efficiency-table notes).
    """

    mu: float = 0.2
    mup: float = 0.6
    delta: float = 0.0
    deltap: float | None = None
    xi: float = 0.05
    n_pulses: float = 1e9
    np_pulses: float | None = None
    n0_pulses: float = 1e9
    seed: int = 0
    asymptotic: bool = True
    pattern_samples: int = 4096
    pattern_shape: str = "uniform"

    def __post_init__(self):
        if not 0.0 < self.mu <= self.mup:
            raise InvariantViolation(f"need 0 < mu <= mup, got {self.mu!r}, {self.mup!r}")
        if not 0.0 < self.xi <= 1.0:
            raise InvariantViolation(f"xi = {self.xi!r} outside (0, 1]")
        if self.delta < 0.0 or (self.deltap is not None and self.deltap < 0.0):
            raise InvariantViolation("fluctuation bounds must be >= 0")
        if self.pattern_shape not in PATTERN_SHAPES:
            raise InvariantViolation(f"unknown pattern shape {self.pattern_shape!r}")
        if self.pattern_samples < 2:
            raise InvariantViolation("pattern_samples must be >= 2")

    @property
    def deltap_effective(self) -> float:
        return self.delta if self.deltap is None else self.deltap

    @property
    def np_effective(self) -> float:
        return self.n_pulses if self.np_pulses is None else self.np_pulses


def gen_fluctuation_pattern(n: int, delta_max: float, shape: str = "uniform",
                            seed: int | None = None, bins=None,
                            rng: np.random.Generator | None = None) -> FluctuationPattern:
    """Zero-mean error pattern with |delta_i| <= delta_max, deterministic per seed.

    Shapes:
        uniform:   iid uniform on [-delta_max, delta_max], then mean-subtracted
                   and rescaled into the envelope.
        two-point: alternating +-delta_max (a trailing zero when n is odd),
                   realizing zeta = delta_max^2 up to the odd element.
        histogram: per-bin two-point values from ``bins`` of
                   (fraction, bound) pairs, the stress pattern for
                   histogram-derived zeta bounds.
    """
    if n < 2:
        raise InvariantViolation("pattern needs at least 2 pulses")
    if delta_max < 0.0:
        raise InvariantViolation("delta_max must be >= 0")
    if rng is None:
        rng = np.random.default_rng(seed)
    if shape == "uniform":
        deltas = rng.uniform(-delta_max, delta_max, n)
    elif shape == "two-point":
        deltas = np.where(np.arange(n) % 2 == 0, delta_max, -delta_max)
        if n % 2 == 1:
            deltas = deltas.copy()
            deltas[-1] = 0.0
    elif shape == "histogram":
        if not bins:
            raise InvariantViolation("histogram shape requires bins")
        parts = []
        remaining = n
        for i, (frac, bound) in enumerate(bins):
            if bound > delta_max + 1e-15:
                raise InvariantViolation("histogram bin bound exceeds delta_max")
            k = remaining if i == len(bins) - 1 else int(round(frac * n))
            k = min(k, remaining)
            parts.append(bound * rng.choice((-1.0, 1.0), size=k))
            remaining -= k
        deltas = np.concatenate(parts)
        rng.shuffle(deltas)
    else:
        raise InvariantViolation(f"unknown pattern shape {shape!r}")

    deltas = deltas - deltas.mean()
    peak = float(np.max(np.abs(deltas)))
    if peak > delta_max and peak > 0.0:
        deltas = deltas * (delta_max / peak)
    return FluctuationPattern.from_deltas(deltas, delta_max=delta_max)


def channel_yield(n_photons: int, ch: ChannelModel) -> float:
    """Counting rate of an n-photon pulse: 1 - (1-dark) (1-eta)^n."""
    if n_photons < 0:
        raise InvariantViolation("photon number must be >= 0")
    return 1.0 - (1.0 - ch.dark_rate) * (1.0 - ch.eta) ** n_photons


def linear_channel_yields(ch: ChannelModel, n_max: int = 40) -> ChannelYields:
    """Yield table of the linear-loss channel up to n_max photons."""
    n = np.arange(n_max + 1)
    return ChannelYields(1.0 - (1.0 - ch.dark_rate) * (1.0 - ch.eta) ** n)


def poisson_pmf(mu, n_max: int) -> np.ndarray:
    """Poisson probabilities P(0..n_max); accepts scalar or vector means.

    Built iteratively (p_n = p_{n-1} mu / n), stable for the mean photon
    numbers used here.
    """
    mu_arr = np.atleast_1d(np.asarray(mu, dtype=np.float64))
    out = np.empty((mu_arr.size, n_max + 1))
    out[:, 0] = np.exp(-mu_arr)
    for k in range(1, n_max + 1):
        out[:, k] = out[:, k - 1] * mu_arr / k
    return out[0] if np.isscalar(mu) or np.ndim(mu) == 0 else out


def class_rate(mu: float, yields: ChannelYields) -> float:
    """Exact Poisson-mixture counting rate under the tail convention."""
    k = yields.yields.size
    pmf = poisson_pmf(mu, k - 1)
    head = float(np.dot(pmf, yields.yields))
    tail = 1.0 - float(np.sum(pmf))
    return head + tail * float(yields.yields[-1])


def multiphoton_rate(mu: float, yields: ChannelYields) -> float:
    """Counting rate conditioned on n >= 2 under the Poisson mixture."""
    total = class_rate(mu, yields)
    p0 = math.exp(-mu)
    p1 = mu * p0
    pc = 1.0 - p0 - p1
    if pc <= 0.0:
        raise InvariantViolation("multi-photon mass is zero at this intensity")
    return (total - p0 * yields.rate(0) - p1 * yields.rate(1)) / pc


def pattern_class_rate(pattern: FluctuationPattern, mu_bar: float,
                       yields: ChannelYields) -> float:
    """Pattern-averaged class rate for an arbitrary yield table."""
    mu_i = pattern.intensities(mu_bar)
    k = yields.yields.size
    pmf = poisson_pmf(mu_i, k - 1)
    head = pmf @ yields.yields
    tail = 1.0 - pmf.sum(axis=1)
    return float(np.mean(head + tail * yields.yields[-1]))


def pattern_multiphoton_rate(pattern: FluctuationPattern, mu_bar: float,
                             yields: ChannelYields) -> float:
    """Counting rate of the class's multi-photon subclass, pattern averaged.

    This is the yield of the shared multi-photon state, so it is the ground
    truth for both classes' shared-state rates under an iid channel.
    """
    mu_i = pattern.intensities(mu_bar)
    k = yields.yields.size
    pmf = poisson_pmf(mu_i, k - 1)
    head = pmf @ yields.yields
    tail = 1.0 - pmf.sum(axis=1)
    rate_i = head + tail * yields.yields[-1]
    p0, p1 = pmf[:, 0], pmf[:, 1]
    num = rate_i - p0 * yields.rate(0) - p1 * yields.rate(1)
    den = 1.0 - p0 - p1
    if float(den.sum()) <= 0.0:
        raise InvariantViolation("multi-photon mass is zero for this pattern")
    return float(num.sum() / den.sum())


@dataclass(frozen=True)
class GroundTruth:
    """Everything a soundness test needs to compare a certificate against."""

    s0: float
    s1: float
    sc_decoy: float
    sc_signal: float
    S0: float
    S: float
    Sp: float
    h: float
    hp: float
    mu_bar: float
    mup_bar: float
    a0: float
    a1: float
    ac: float
    a0p: float
    a1p: float
    acp: float
    adp: float
    untagged_fraction: float


def simulate_observed(cfg: ScenarioConfig, ch: ChannelModel,
                      pattern: FluctuationPattern | None = None,
                      pattern_p: FluctuationPattern | None = None,
                      h_model: str = H_MODEL_EXACT,
                      yields: ChannelYields | None = None,
                      bins=None) -> tuple[ObservedRates, GroundTruth]:
    """Observed rates plus ground truth for one scenario.

    ``h_model`` selects the monitor-click model: "exact" evaluates
    mean(1 - e^{-xi mu_i}) over the pattern (soundness mode); "taylor2" uses
    the quadratic model h = xi mu - xi^2 mu^2 / 2 at the nominal intensities
    (the efficiency-table convention).  ``yields`` overrides the linear-loss
    channel with an arbitrary per-photon-number yield table.
    """
    rng = np.random.default_rng(cfg.seed)
    if pattern is None:
        pattern = gen_fluctuation_pattern(cfg.pattern_samples, cfg.delta,
                                          cfg.pattern_shape, rng=rng, bins=bins)
    if pattern_p is None:
        pattern_p = gen_fluctuation_pattern(cfg.pattern_samples, cfg.deltap_effective,
                                            cfg.pattern_shape, rng=rng, bins=bins)

    mu_i = pattern.intensities(cfg.mu)
    mup_i = pattern_p.intensities(cfg.mup)

    if yields is None:
        dark = ch.dark_rate
        S = float(np.mean(1.0 - (1.0 - dark) * np.exp(-ch.eta * mu_i)))
        Sp = float(np.mean(1.0 - (1.0 - dark) * np.exp(-ch.eta * mup_i)))
        yields_tab = linear_channel_yields(ch)
    else:
        yields_tab = yields
        S = pattern_class_rate(pattern, cfg.mu, yields_tab)
        Sp = pattern_class_rate(pattern_p, cfg.mup, yields_tab)
    S0 = yields_tab.rate(0)

    if h_model == H_MODEL_TAYLOR2:
        h = cfg.xi * cfg.mu - cfg.xi**2 * cfg.mu**2 / 2.0
        hp = cfg.xi * cfg.mup - cfg.xi**2 * cfg.mup**2 / 2.0
    elif h_model == H_MODEL_EXACT:
        h = float(np.mean(1.0 - np.exp(-cfg.xi * mu_i)))
        hp = float(np.mean(1.0 - np.exp(-cfg.xi * mup_i)))
    else:
        raise InvariantViolation(f"unknown h model {h_model!r}")

    if not cfg.asymptotic:
        n, npp, n0 = int(cfg.n_pulses), int(cfg.np_effective), int(cfg.n0_pulses)
        S = rng.binomial(n, S) / n
        Sp = rng.binomial(npp, Sp) / npp
        S0 = rng.binomial(n0, S0) / n0
        h = rng.binomial(n, h) / n
        hp = rng.binomial(npp, hp) / npp

    obs = ObservedRates(S0=S0, S=S, Sp=Sp, h=h, hp=hp, d0=0.0,
                        N=cfg.n_pulses, Np=cfg.np_effective, N0=cfg.n0_pulses,
                        xi=cfg.xi)

    decomp = true_source_decomposition(pattern, cfg.mu, pattern_p, cfg.mup)
    s1_true = yields_tab.rate(1)
    sc_decoy = pattern_multiphoton_rate(pattern, cfg.mu, yields_tab)
    truth = GroundTruth(
        s0=yields_tab.rate(0), s1=s1_true,
        sc_decoy=sc_decoy,
        sc_signal=sc_decoy,  # same shared state through the same channel
        S0=yields_tab.rate(0), S=S, Sp=Sp, h=h, hp=hp,
        mu_bar=cfg.mu, mup_bar=cfg.mup,
        a0=decomp.a0, a1=decomp.a1, ac=decomp.ac,
        a0p=decomp.a0p, a1p=decomp.a1p, acp=decomp.acp, adp=decomp.adp,
        untagged_fraction=decomp.a1p * s1_true / Sp if Sp > 0 else 0.0)
    return obs, truth


@dataclass(frozen=True)
class TableRow:
    delta: float
    T: float
    R: float
    s1: float
    s1_ideal: float
    delta1_prime: float
    delta1_prime_ideal: float
    status: str


@dataclass(frozen=True)
class EfficiencyStudyOptions:
    """Formula variants of the efficiency comparison; all echoed in reports.

    The defaults reproduce the published comparison: the fixed-point
    statistical forms with f1 factor 10 and omega_c factor 1, the signal-side
    untagged-bit correction, and multi-photon second-moment terms omitted
    from the coefficient bounds (``multiphoton_second_moment=False``).  The
    certified verification path uses the sound defaults instead (second
    moment on, omega_c factor 10); see the solver module notes.
    """

    fixed_point: bool = True
    f1_factor: float = 10.0
    omega_c_factor: float = 1.0
    r_correction: str = R_CORRECTION_SIGNAL
    multiphoton_second_moment: bool = False


def run_efficiency_table(deltas=PAPER_DELTA_GRID,
                         cfg: ScenarioConfig | None = None,
                         ch: ChannelModel | None = None,
                         study: EfficiencyStudyOptions | None = None) -> list[TableRow]:
    """Efficiency ratios T = s1 / s1_ideal and R = Delta1' / Delta1'_ideal.

    For each envelope delta the inexact-intensity pipeline (tomography from
    the quadratic monitor model, coefficient bounds with zeta = delta^2,
    worst-case solve) is compared against the ideal pipeline (exact
    coefficients, same statistical forms).  Rows are returned ordered by
    delta regardless of evaluation order; inconclusive solves are reported
    per-row, never raised.
    """
    cfg = cfg or ScenarioConfig()
    ch = ch or ChannelModel(eta=1e-4, dark_rate=0.0)
    study = study or EfficiencyStudyOptions()

    rows = []
    for i, d in enumerate(sorted(deltas)):
        cfg_d = replace(cfg, delta=float(d), deltap=None, seed=cfg.seed + i)
        obs, _ = simulate_observed(cfg_d, ch, h_model=H_MODEL_TAYLOR2)
        zeta = zeta_from_delta(cfg_d.delta)
        zetap = zeta_from_delta(cfg_d.deltap_effective)

        iv = certify_intensity(obs.h, cfg_d.xi, zeta)
        ivp = certify_intensity(obs.hp, cfg_d.xi, zetap)
        bounds = compute_source_bounds(
            iv, ivp, multiphoton_second_moment=study.multiphoton_second_moment)
        bounds_ideal = compute_source_bounds(
            IntensityInterval.exact(cfg_d.mu), IntensityInterval.exact(cfg_d.mup),
            multiphoton_second_moment=study.multiphoton_second_moment)

        opts = SolverOptions(fixed_point=study.fixed_point, f1_factor=study.f1_factor,
                             omega_c_factor=study.omega_c_factor,
                             mu_nominal=cfg_d.mu, mup_nominal=cfg_d.mup,
                             zeta=zeta, zetap=zetap, r_correction=study.r_correction)
        opts_ideal = replace(opts, zeta=0.0, zetap=0.0)

        res = worst_case_s1(obs, bounds, ch.eta, s0_bound=0.0, options=opts)
        res_ideal = worst_case_s1(obs, bounds_ideal, ch.eta, s0_bound=0.0,
                                  options=opts_ideal)

        if res.status == STATUS_OK and res_ideal.status == STATUS_OK:
            T = res.s1_lower / res_ideal.s1_lower
            R = res.delta1_prime / res_ideal.delta1_prime
            status = STATUS_OK
        else:
            T = R = math.nan
            status = res.status if res.status != STATUS_OK else res_ideal.status
        rows.append(TableRow(delta=float(d), T=T, R=R,
                             s1=res.s1_lower, s1_ideal=res_ideal.s1_lower,
                             delta1_prime=res.delta1_prime if res.delta1_prime is not None else math.nan,
                             delta1_prime_ideal=(res_ideal.delta1_prime
                                                 if res_ideal.delta1_prime is not None else math.nan),
                             status=status))
    return rows


@dataclass(frozen=True)
class AdversarialScenario:
    """Time-dependent scenario with per-slot intensities and yields.

    ``s1_virtual`` is the attenuation-weighted single-photon rate
    mean((nu_t / mu) y_t(1) + (1 - nu_t / mu) y_t(0)), the sharp quantity the
    unconditional bound certifies; ``s1_singles_decoy``/``s1_singles_signal``
    are the physically weighted single-photon yields of each class, which
    dominate it whenever all nu_t <= mu <= 1.
    """

    mu: float
    mup: float
    nu: np.ndarray
    nup: np.ndarray
    S: float
    Sp: float
    S0: float
    s1_virtual: float
    s1_singles_decoy: float
    s1_singles_signal: float


def simulate_from_slot_yields(mu: float, mup: float, nu, nup,
                              slot_yields) -> AdversarialScenario:
    """Observed class rates and ground truth from explicit per-slot yields.

    Args:
        nu, nup: per-slot decoy and signal intensities; the unconditional
            bound's hypothesis (every nu_t <= mu, every nup_t >= mup) is
            enforced here and violations raise.
        slot_yields: array (n_slots, n_max+1); row t gives y_t(n) with the
            usual last-entry tail convention.
    """
    nu = np.asarray(nu, dtype=np.float64)
    nup = np.asarray(nup, dtype=np.float64)
    y = np.asarray(slot_yields, dtype=np.float64)
    if nu.shape != nup.shape or nu.ndim != 1:
        raise InvariantViolation("nu and nup must be matching 1-d arrays")
    if y.shape != (nu.size, y.shape[1]):
        raise InvariantViolation("slot_yields must have one row per slot")
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise InvariantViolation("slot yields must lie in [0, 1]")
    if np.any(nu > mu * (1.0 + 1e-12)):
        raise ValidityError(
            "hypothesis violated: every decoy intensity must be <= mu")
    if np.any(nup < mup * (1.0 - 1e-12)):
        raise ValidityError(
            "hypothesis violated: every signal intensity must be >= mup")
    if np.any(nu <= 0.0):
        raise InvariantViolation("decoy intensities must be positive")

    n_max = y.shape[1] - 1

    def rates(intensities):
        pmf = poisson_pmf(intensities, n_max)
        head = np.sum(pmf * y, axis=1)
        tail = 1.0 - pmf.sum(axis=1)
        return head + tail * y[:, -1]

    S = float(np.mean(rates(nu)))
    Sp = float(np.mean(rates(nup)))
    S0 = float(np.mean(y[:, 0]))

    chi = nu / mu
    s1_virtual = float(np.mean(chi * y[:, 1] + (1.0 - chi) * y[:, 0]))

    w_dec = nu * np.exp(-nu)
    w_sig = nup * np.exp(-nup)
    s1_dec = float(np.dot(w_dec, y[:, 1]) / np.sum(w_dec))
    s1_sig = float(np.dot(w_sig, y[:, 1]) / np.sum(w_sig))

    return AdversarialScenario(mu=mu, mup=mup, nu=nu, nup=nup, S=S, Sp=Sp, S0=S0,
                               s1_virtual=s1_virtual, s1_singles_decoy=s1_dec,
                               s1_singles_signal=s1_sig)


def simulate_adversarial(mu: float, mup: float, ch: ChannelModel, n_slots: int = 128,
                         drift_amplitude: float = 0.2, eve_amplitude: float = 0.9,
                         eve_phase: float = math.pi, seed: int | None = None,
                         n_max: int = 30) -> AdversarialScenario:
    """Sinusoidal intensity drift with an eavesdropper-modulated transmittance.

    The decoy intensity drifts below mu and the signal intensity above mup
    (so the unconditional hypothesis holds by construction); the per-slot
    transmittance eta_t = eta (1 + eve_amplitude sin(phase_t + eve_phase))
    lets tests correlate or anti-correlate the channel with the drift.
    """
    if not 0.0 <= drift_amplitude < 1.0:
        raise InvariantViolation("drift amplitude must be in [0, 1)")
    if not 0.0 <= eve_amplitude <= 1.0:
        raise InvariantViolation("eve amplitude must be in [0, 1]")
    rng = np.random.default_rng(seed)
    phase0 = rng.uniform(0.0, 2.0 * math.pi)
    t = np.arange(n_slots)
    phase = 2.0 * math.pi * t / n_slots + phase0
    dip = 0.5 * (1.0 + np.sin(phase))
    nu = mu * (1.0 - drift_amplitude * dip)
    nup = mup * (1.0 + drift_amplitude * dip)
    eta_t = ch.eta * (1.0 + eve_amplitude * np.sin(phase + eve_phase))
    eta_t = np.clip(eta_t, 0.0, 1.0)
    n = np.arange(n_max + 1)
    slot_yields = 1.0 - (1.0 - ch.dark_rate) * (1.0 - eta_t[:, None]) ** n[None, :]
    return simulate_from_slot_yields(mu, mup, nu, nup, slot_yields)
