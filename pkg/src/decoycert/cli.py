"""Command-line surface: verify | table | num5 | simulate.

Input formats
-------------
Scenario/config files are flat key-value text, one ``key = value`` pair per
line, ``#`` comments allowed.  Count records are CSV with the exact header

    class,pulses_sent,counts_observed,monitor_clicks,monitor_dark

and one row per class (Y0, Y, Yp).  Rates are formed as counts/pulses; the
monitor dark rate is subtracted from the monitor click rate at ingestion
(negative differences clamp to 0 and set a warning flag: statistical
underflow at low rates).  Numbers are plain decimal, no locale formatting.

Exit codes: 0 success, 2 inconclusive (the solvability conditions failed or
the vacuum-consistency rule discarded the run), 3 input error.

Every formula-variant switch (untagged-bit correction, omega_c factor,
fixed-point iteration, multi-photon second-moment terms) is echoed in the
report next to the numbers it produced; there are no silent defaults.
Floating output uses 9 significant digits; table percentages one decimal.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from .core import FluctuationPattern, ObservedRates
from .errors import (DecoyCertError, InfeasibleProblem, InvariantViolation,
                     ProtocolDiscarded, ValidityError)
from .simulator import (ChannelModel, EfficiencyStudyOptions, ScenarioConfig,
                        H_MODEL_EXACT, PAPER_DELTA_GRID, RNG_NAME,
                        run_efficiency_table, simulate_observed)
from .source_bounds import compute_source_bounds
from .tomography import certify_intensity, zeta_from_delta
from .worst_pattern import Num5Problem, solve_num5_asymptotic, solve_num5_finite
from .yield_solver import (R_CORRECTION_PRINTED, R_CORRECTION_SIGNAL, STATUS_OK,
                           SolverOptions, bound_s0_dark, worst_case_s1)

EXIT_OK = 0
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3

CSV_HEADER = ["class", "pulses_sent", "counts_observed", "monitor_clicks", "monitor_dark"]
CSV_CLASSES = ("Y0", "Y", "Yp")

FLOAT_FMT = "%.9g"


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return FLOAT_FMT % x


# --------------------------------------------------------------------------
# config parsing

_CONFIG_SCHEMA: dict[str, type] = {
    "mu": float, "mup": float, "xi": float,
    "delta": float, "deltap": float, "zeta": float, "zetap": float,
    "eta": float, "dark": float,
    "eps0": float, "eps1": float,
    "S0": float, "S": float, "Sp": float, "h": float, "hp": float, "d0": float,
    "n_pulses": float, "np_pulses": float, "n0_pulses": float,
    "s0": float, "r1": float, "rc": float,
    "decoy_intensity_max": float, "signal_intensity_min": float,
    "seed": int, "pattern_samples": int,
    "asymptotic": bool, "fixed_point": bool, "multiphoton_second_moment": bool,
    "f1_factor": float, "omega_c_factor": float,
    "r_correction": str, "pattern_shape": str,
    "deltas": str,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise InvariantViolation(f"cannot parse boolean from {text!r}")


def parse_config_text(text: str) -> dict:
    """Parse flat key-value config text; unknown keys are input errors."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvariantViolation(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_SCHEMA:
            raise InvariantViolation(f"config line {lineno}: unknown key {key!r}")
        typ = _CONFIG_SCHEMA[key]
        try:
            if typ is bool:
                out[key] = _parse_bool(value)
            elif typ is str:
                out[key] = value
            else:
                out[key] = typ(value)
        except ValueError as exc:
            raise InvariantViolation(f"config line {lineno}: bad value for {key!r}: {value!r}") from exc
    return out


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise InvariantViolation(f"cannot read config file {path!r}: {exc}") from exc


def read_counts_csv(path: str) -> dict[str, dict]:
    """Read per-class count records; returns a mapping class -> row dict."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise InvariantViolation(f"cannot read counts file {path!r}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != CSV_HEADER:
        raise InvariantViolation(
            f"counts file must start with header {','.join(CSV_HEADER)!r}")
    records: dict[str, dict] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise InvariantViolation(f"counts line {lineno}: expected {len(CSV_HEADER)} columns")
        cls = row[0].strip()
        if cls not in CSV_CLASSES:
            raise InvariantViolation(
                f"counts line {lineno}: class must be one of {CSV_CLASSES}, got {cls!r}")
        try:
            rec = {
                "pulses_sent": float(row[1]),
                "counts_observed": float(row[2]),
                "monitor_clicks": float(row[3]),
                "monitor_dark": float(row[4]),
            }
        except ValueError as exc:
            raise InvariantViolation(f"counts line {lineno}: non-numeric field") from exc
        if rec["pulses_sent"] < 1:
            raise InvariantViolation(f"counts line {lineno}: pulses_sent must be >= 1")
        records[cls] = rec
    return records


def _validate_declared_pattern(cfg: dict) -> None:
    """Optional per-pulse error metadata: must satisfy the pattern invariants."""
    if "deltas" not in cfg:
        return
    try:
        values = [float(tok) for tok in cfg["deltas"].split(",") if tok.strip()]
    except ValueError as exc:
        raise InvariantViolation("field 'deltas': non-numeric entry") from exc
    declared = cfg.get("delta")
    try:
        FluctuationPattern.from_deltas(np.asarray(values), delta_max=declared)
    except InvariantViolation as exc:
        raise InvariantViolation(f"field 'deltas': {exc}") from exc


def observed_from_inputs(cfg: dict, counts: dict[str, dict] | None):
    """Build ObservedRates from a counts CSV and/or direct config rates.

    Returns (observed, warnings).
    """
    warnings: list[str] = []
    if counts:
        if "Y" not in counts or "Yp" not in counts:
            raise InvariantViolation("counts file must contain rows for classes Y and Yp")
        y, yp = counts["Y"], counts["Yp"]
        y0 = counts.get("Y0")
        n, npp = y["pulses_sent"], yp["pulses_sent"]
        n0 = y0["pulses_sent"] if y0 else 1.0
        S = y["counts_observed"] / n
        Sp = yp["counts_observed"] / npp
        S0 = (y0["counts_observed"] / n0) if y0 else 0.0
        d0 = y["monitor_dark"] / n
        h_raw = y["monitor_clicks"] / n
        hp_raw = yp["monitor_clicks"] / npp
        dp0 = yp["monitor_dark"] / npp
        h = h_raw - d0
        hp = hp_raw - dp0
        if h < 0.0:
            warnings.append("monitor rate for class Y fell below its dark rate; clamped to 0")
            h = 0.0
        if hp < 0.0:
            warnings.append("monitor rate for class Yp fell below its dark rate; clamped to 0")
            hp = 0.0
    else:
        required = ("S", "Sp", "h", "hp")
        missing = [k for k in required if k not in cfg]
        if missing:
            raise InvariantViolation(
                f"no counts file given and config lacks rate field(s): {', '.join(missing)}")
        d0 = cfg.get("d0", 0.0)
        h = cfg["h"] - d0
        hp = cfg["hp"] - d0
        if h < 0.0 or hp < 0.0:
            warnings.append("monitor rate fell below the dark rate; clamped to 0")
            h, hp = max(h, 0.0), max(hp, 0.0)
        S, Sp, S0 = cfg["S"], cfg["Sp"], cfg.get("S0", 0.0)
        n = cfg.get("n_pulses", 1e9)
        npp = cfg.get("np_pulses", n)
        n0 = cfg.get("n0_pulses", n)
    if "xi" not in cfg:
        raise InvariantViolation("config lacks required field 'xi'")
    obs = ObservedRates(S0=S0, S=S, Sp=Sp, h=h, hp=hp, d0=d0,
                        N=n, Np=npp, N0=n0, xi=cfg["xi"])
    return obs, warnings


# --------------------------------------------------------------------------
# verify

def run_verify(cfg: dict, counts: dict[str, dict] | None):
    """Full verification pipeline; returns (report dict, exit code)."""
    _validate_declared_pattern(cfg)
    obs, warnings = observed_from_inputs(cfg, counts)

    for key in ("mu", "mup", "eta"):
        if key not in cfg:
            raise InvariantViolation(f"config lacks required field {key!r}")
    mu, mup, eta = cfg["mu"], cfg["mup"], cfg["eta"]

    zeta = cfg.get("zeta", zeta_from_delta(cfg.get("delta", 0.0)))
    zetap = cfg.get("zetap", zeta_from_delta(cfg.get("deltap", cfg.get("delta", 0.0))))

    iv = certify_intensity(obs.h, obs.xi, zeta)
    ivp = certify_intensity(obs.hp, obs.xi, zetap)

    second_moment = cfg.get("multiphoton_second_moment", True)
    bounds = compute_source_bounds(iv, ivp, multiphoton_second_moment=second_moment)

    options = SolverOptions(
        fixed_point=cfg.get("fixed_point", True),
        f1_factor=cfg.get("f1_factor", 10.0),
        omega_c_factor=cfg.get("omega_c_factor", 10.0),
        mu_nominal=mu, mup_nominal=mup, zeta=zeta, zetap=zetap,
        r_correction=cfg.get("r_correction", R_CORRECTION_SIGNAL))

    eps0 = cfg.get("eps0", 0.0)
    eps1 = cfg.get("eps1", 0.0)
    s0_bound = bound_s0_dark(obs.S0, eps0, eps1)
    result = worst_case_s1(obs, bounds, eta, s0_bound=min(s0_bound, 1.0), options=options)
    if result.status == STATUS_OK and (eps0 > 0.0 or eps1 > 0.0):
        # Refined vacuum bound from the first solve, then one re-solve.
        s0_refined = bound_s0_dark(obs.S0, eps0, eps1, s1_est=result.s1_lower)
        result = worst_case_s1(obs, bounds, eta, s0_bound=s0_refined, options=options)

    report = {
        "command": "verify",
        "inputs": {
            "S0": obs.S0, "S": obs.S, "Sp": obs.Sp, "h": obs.h, "hp": obs.hp,
            "d0": obs.d0, "N": obs.N, "Np": obs.Np, "N0": obs.N0, "xi": obs.xi,
            "mu": mu, "mup": mup, "eta": eta, "zeta": zeta, "zetap": zetap,
            "eps0": eps0, "eps1": eps1,
        },
        "flags": {
            "fixed_point": options.fixed_point,
            "f1_factor": options.f1_factor,
            "omega_c_factor": options.omega_c_factor,
            "r_correction": options.r_correction,
            "multiphoton_second_moment": second_moment,
        },
        "intensity_intervals": {
            "decoy": asdict(iv),
            "signal": asdict(ivp),
        },
        "source_bounds": {
            "a0_lo": bounds.a0_lo, "a0_hi": bounds.a0_hi,
            "a1_lo": bounds.a1_lo, "a1_hi": bounds.a1_hi,
            "ac_lo": bounds.ac_lo, "ac_hi": bounds.ac_hi,
            "a0p_lo": bounds.a0p_lo, "a1p_lo": bounds.a1p_lo,
            "bcp_lo": bounds.bcp_lo, "adp_lo": bounds.adp_lo,
            "flags": list(bounds.flags),
        },
        "result": {
            "status": result.status,
            "s1_lower": result.s1_lower,
            "s1_raw": result.s1_raw,
            "sc_at_solution": result.sc_at_solution,
            "conditions_ok": result.conditions_ok,
            "k1_ordering": result.conditions.k1_ordering,
            "kc_ordering": result.conditions.kc_ordering,
            "f1_used": result.f1_used,
            "omega_c_used": result.omega_c_used,
            "s0_bound": result.s0_bound,
            "delta1_prime": result.delta1_prime,
            "capped_by_eta": result.capped_by_eta,
            "iterations": result.iterations,
            "fixed_point_converged": result.fixed_point_converged,
        },
        "warnings": warnings,
    }
    code = EXIT_OK if result.status == STATUS_OK else EXIT_INCONCLUSIVE
    return report, code


def _print_verify_text(report: dict) -> None:
    res = report["result"]
    print("verification report")
    for section in ("inputs", "flags"):
        pairs = ", ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}"
                          for k, v in report[section].items())
        print(f"  {section}: {pairs}")
    iv, ivp = report["intensity_intervals"]["decoy"], report["intensity_intervals"]["signal"]
    print(f"  decoy intensity  in [{_fmt(iv['mu_minus'])}, {_fmt(iv['mu_plus'])}] "
          f"(zeta <= {_fmt(iv['zeta_bound'])})")
    print(f"  signal intensity in [{_fmt(ivp['mu_minus'])}, {_fmt(ivp['mu_plus'])}] "
          f"(zeta <= {_fmt(ivp['zeta_bound'])})")
    sb = report["source_bounds"]
    print(f"  a0 in [{_fmt(sb['a0_lo'])}, {_fmt(sb['a0_hi'])}], "
          f"a1 in [{_fmt(sb['a1_lo'])}, {_fmt(sb['a1_hi'])}], "
          f"ac in [{_fmt(sb['ac_lo'])}, {_fmt(sb['ac_hi'])}]")
    print(f"  a0p >= {_fmt(sb['a0p_lo'])}, a1p >= {_fmt(sb['a1p_lo'])}, "
          f"bcp >= {_fmt(sb['bcp_lo'])}, adp >= {_fmt(sb['adp_lo'])}")
    print(f"  status: {res['status']} (K1 ordering: {res['k1_ordering']}, "
          f"Kc ordering: {res['kc_ordering']})")
    if res["status"] == STATUS_OK:
        print(f"  s1 lower bound: {_fmt(res['s1_lower'])} "
              f"(raw {_fmt(res['s1_raw'])}, capped_by_eta={res['capped_by_eta']})")
        print(f"  sc at solution: {_fmt(res['sc_at_solution'])}")
        print(f"  f1 used: {_fmt(res['f1_used'])}, omega_c used: {_fmt(res['omega_c_used'])}, "
              f"s0 bound: {_fmt(res['s0_bound'])}")
        if res["delta1_prime"] is not None:
            print(f"  untagged fraction Delta1': {_fmt(res['delta1_prime'])}")
    for warning in report["warnings"]:
        print(f"  warning: {warning}")


# --------------------------------------------------------------------------
# table

def run_table(cfg: dict, delta_grid, study: EfficiencyStudyOptions):
    scenario = ScenarioConfig(
        mu=cfg.get("mu", 0.2), mup=cfg.get("mup", 0.6), xi=cfg.get("xi", 0.05),
        n_pulses=cfg.get("n_pulses", 1e9), seed=cfg.get("seed", 0),
        pattern_samples=cfg.get("pattern_samples", 4096))
    channel = ChannelModel(eta=cfg.get("eta", 1e-4), dark_rate=cfg.get("dark", 0.0))
    rows = run_efficiency_table(delta_grid, scenario, channel, study)
    report = {
        "command": "table",
        "flags": {
            "fixed_point": study.fixed_point,
            "f1_factor": study.f1_factor,
            "omega_c_factor": study.omega_c_factor,
            "r_correction": study.r_correction,
            "multiphoton_second_moment": study.multiphoton_second_moment,
            "rng": RNG_NAME,
        },
        "inputs": {"mu": scenario.mu, "mup": scenario.mup, "xi": scenario.xi,
                   "eta": channel.eta, "n_pulses": scenario.n_pulses,
                   "seed": scenario.seed},
        "rows": [asdict(r) for r in rows],
    }
    code = EXIT_OK if all(r.status == STATUS_OK for r in rows) else EXIT_INCONCLUSIVE
    return report, code


def _print_table_text(report: dict) -> None:
    print("efficiency comparison (inexact-intensity protocol vs ideal protocol)")
    pairs = ", ".join(f"{k}={v}" for k, v in report["flags"].items())
    print(f"  flags: {pairs}")
    pairs = ", ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}"
                      for k, v in report["inputs"].items())
    print(f"  inputs: {pairs}")
    header = f"{'delta':>7} {'T':>7} {'R':>7} {'s1':>14} {'s1_ideal':>14} {'status':>13}"
    print(header)
    for row in report["rows"]:
        t = f"{100.0 * row['T']:.1f}%" if not math.isnan(row["T"]) else "n/a"
        r = f"{100.0 * row['R']:.1f}%" if not math.isnan(row["R"]) else "n/a"
        print(f"{100.0 * row['delta']:6.1f}% {t:>7} {r:>7} "
              f"{_fmt(row['s1']):>14} {_fmt(row['s1_ideal']):>14} {row['status']:>13}")


def _write_table_csv(report: dict, path: str) -> None:
    fields = ["delta", "T", "R", "s1", "s1_ideal", "delta1_prime",
              "delta1_prime_ideal", "status"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in report["rows"]:
            writer.writerow([row[f] if f == "status" else _fmt(row[f]) for f in fields])


# --------------------------------------------------------------------------
# num5

def run_num5(cfg: dict):
    for key in ("mu", "mup", "S", "Sp"):
        if key not in cfg:
            raise InvariantViolation(f"num5 input lacks required field {key!r}")
    if "decoy_intensity_max" in cfg and cfg["decoy_intensity_max"] > cfg["mu"]:
        raise InvariantViolation(
            "field 'decoy_intensity_max': the unconditional bound requires every decoy "
            "intensity to be <= mu")
    if "signal_intensity_min" in cfg and cfg["signal_intensity_min"] < cfg["mup"]:
        raise InvariantViolation(
            "field 'signal_intensity_min': the unconditional bound requires every signal "
            "intensity to be >= mup")
    s0 = cfg.get("s0", 0.0)
    if "S0" in cfg:
        s0 = bound_s0_dark(cfg["S0"], cfg.get("eps0", 0.0), cfg.get("eps1", 0.0))
    radii = None
    if "r1" in cfg or "rc" in cfg:
        radii = (cfg.get("r1", 0.0), cfg.get("rc", 0.0))
    problem = Num5Problem(mu=cfg["mu"], mup=cfg["mup"], S=cfg["S"], Sp=cfg["Sp"],
                          s0=s0, sampling_radii=radii)
    if radii is None:
        bound = solve_num5_asymptotic(problem)
        mode = "asymptotic"
    else:
        bound = solve_num5_finite(problem)
        mode = "finite-size"
    report = {
        "command": "num5",
        "inputs": {"mu": problem.mu, "mup": problem.mup, "S": problem.S,
                   "Sp": problem.Sp, "s0": problem.s0,
                   "r1": None if radii is None else radii[0],
                   "rc": None if radii is None else radii[1]},
        "flags": {"mode": mode},
        "result": {"s1_lower": bound},
    }
    return report, EXIT_OK


# --------------------------------------------------------------------------
# simulate

def run_simulate(cfg: dict, output: str | None):
    scenario = ScenarioConfig(
        mu=cfg.get("mu", 0.2), mup=cfg.get("mup", 0.6),
        delta=cfg.get("delta", 0.0), deltap=cfg.get("deltap"),
        xi=cfg.get("xi", 0.05),
        n_pulses=cfg.get("n_pulses", 1e9), np_pulses=cfg.get("np_pulses"),
        n0_pulses=cfg.get("n0_pulses", 1e9),
        seed=cfg.get("seed", 0), asymptotic=cfg.get("asymptotic", True),
        pattern_samples=cfg.get("pattern_samples", 4096),
        pattern_shape=cfg.get("pattern_shape", "uniform"))
    channel = ChannelModel(eta=cfg.get("eta", 1e-4), dark_rate=cfg.get("dark", 0.0))
    obs, truth = simulate_observed(scenario, channel, h_model=H_MODEL_EXACT)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            n, npp, n0 = obs.N, obs.Np, obs.N0
            writer.writerow(["Y0", _fmt(n0), _fmt(obs.S0 * n0), _fmt(0.0), _fmt(0.0)])
            writer.writerow(["Y", _fmt(n), _fmt(obs.S * n), _fmt(obs.h * n), _fmt(0.0)])
            writer.writerow(["Yp", _fmt(npp), _fmt(obs.Sp * npp), _fmt(obs.hp * npp), _fmt(0.0)])
    report = {
        "command": "simulate",
        "inputs": {"mu": scenario.mu, "mup": scenario.mup, "delta": scenario.delta,
                   "deltap": scenario.deltap_effective, "xi": scenario.xi,
                   "eta": channel.eta, "dark": channel.dark_rate,
                   "seed": scenario.seed, "asymptotic": scenario.asymptotic,
                   "pattern_shape": scenario.pattern_shape,
                   "pattern_samples": scenario.pattern_samples, "rng": RNG_NAME},
        "observed": {"S0": obs.S0, "S": obs.S, "Sp": obs.Sp, "h": obs.h,
                     "hp": obs.hp, "N": obs.N, "Np": obs.Np, "N0": obs.N0,
                     "xi": obs.xi},
        "ground_truth": {"s0": truth.s0, "s1": truth.s1, "sc": truth.sc_decoy,
                         "a0": truth.a0, "a1": truth.a1, "ac": truth.ac,
                         "a0p": truth.a0p, "a1p": truth.a1p, "acp": truth.acp,
                         "adp": truth.adp,
                         "untagged_fraction": truth.untagged_fraction},
        "output_file": output,
    }
    return report, EXIT_OK


# --------------------------------------------------------------------------
# argument parsing and dispatch

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key-value scenario/config file")
    parser.add_argument("--json", action="store_true", help="emit a JSON report")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--eta", type=float, help="override the channel transmittance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decoycert",
        description="Certified single-photon yield bounds for 3-intensity "
                    "decoy-state QKD with inexactly controlled pulse intensities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="certify s1 and the untagged fraction "
                                             "from observed rates")
    _add_common(p_verify)
    p_verify.add_argument("--input", help="CSV count records (see module docstring)")
    p_verify.add_argument("--fixed-point", dest="fixed_point",
                          action=argparse.BooleanOptionalAction, default=None,
                          help="toggle the self-consistent statistical tightening")
    p_verify.add_argument("--r-correction", choices=[R_CORRECTION_SIGNAL, R_CORRECTION_PRINTED],
                          help="untagged-bit correction variant")
    p_verify.add_argument("--omega-c-factor", type=float, help="fixed-point omega_c coefficient")
    p_verify.add_argument("--f1-factor", type=float, help="fixed-point f1 coefficient")

    p_table = sub.add_parser("table", help="efficiency comparison over an envelope grid")
    _add_common(p_table)
    p_table.add_argument("--delta-grid", help="comma-separated envelopes in percent "
                                              "(default: 5,10,15,20,25,30,35)")
    p_table.add_argument("--csv", help="also write the table as CSV to this path")
    p_table.add_argument("--fixed-point", dest="fixed_point",
                         action=argparse.BooleanOptionalAction, default=True)
    p_table.add_argument("--r-correction", choices=[R_CORRECTION_SIGNAL, R_CORRECTION_PRINTED],
                         default=R_CORRECTION_SIGNAL)
    p_table.add_argument("--omega-c-factor", type=float, default=1.0)
    p_table.add_argument("--f1-factor", type=float, default=10.0)
    p_table.add_argument("--second-moment", dest="second_moment",
                         action=argparse.BooleanOptionalAction, default=False,
                         help="include the multi-photon second-moment terms in the "
                              "coefficient bounds (certified variant; the comparison "
                              "table convention omits them)")

    p_num5 = sub.add_parser("num5", help="unconditional worst-pattern bound")
    _add_common(p_num5)
    p_num5.add_argument("--input", help="key-value problem file (mu, mup, S, Sp, ...)")
    p_num5.add_argument("--r1", type=float, help="sampling radius |s1 - s1'|")
    p_num5.add_argument("--rc", type=float, help="sampling radius |sc - sc'|")

    p_sim = sub.add_parser("simulate", help="generate a scenario and count records")
    _add_common(p_sim)
    p_sim.add_argument("--output", help="write count records CSV here")

    return parser


def _merge_cli_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    out = dict(cfg)
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "eta", None) is not None:
        out["eta"] = args.eta
    if getattr(args, "fixed_point", None) is not None:
        out["fixed_point"] = args.fixed_point
    if getattr(args, "r_correction", None) is not None:
        out["r_correction"] = args.r_correction
    if getattr(args, "omega_c_factor", None) is not None:
        out["omega_c_factor"] = args.omega_c_factor
    if getattr(args, "f1_factor", None) is not None:
        out["f1_factor"] = args.f1_factor
    if getattr(args, "r1", None) is not None:
        out["r1"] = args.r1
    if getattr(args, "rc", None) is not None:
        out["rc"] = args.rc
    return out


def _parse_delta_grid(text: str | None):
    if text is None:
        return PAPER_DELTA_GRID
    try:
        values = [float(tok) / 100.0 for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise InvariantViolation(f"bad --delta-grid value {text!r}") from exc
    if not values:
        raise InvariantViolation("--delta-grid must contain at least one value")
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        cfg = _merge_cli_overrides(cfg, args)

        if args.command == "verify":
            counts = read_counts_csv(args.input) if args.input else None
            report, code = run_verify(cfg, counts)
            if args.json:
                print(json.dumps(report, indent=2, sort_keys=True))
            else:
                _print_verify_text(report)
            return code

        if args.command == "table":
            study = EfficiencyStudyOptions(
                fixed_point=args.fixed_point, f1_factor=args.f1_factor,
                omega_c_factor=args.omega_c_factor, r_correction=args.r_correction,
                multiphoton_second_moment=args.second_moment)
            report, code = run_table(cfg, _parse_delta_grid(args.delta_grid), study)
            if args.csv:
                _write_table_csv(report, args.csv)
            if args.json:
                print(json.dumps(report, indent=2, sort_keys=True))
            else:
                _print_table_text(report)
            return code

        if args.command == "num5":
            if args.input:
                cfg = _merge_cli_overrides(load_config(args.input), args)
            report, code = run_num5(cfg)
            if args.json:
                print(json.dumps(report, indent=2, sort_keys=True))
            else:
                res = report["result"]
                print("unconditional worst-pattern bound")
                pairs = ", ".join(f"{k}={_fmt(v)}" for k, v in report["inputs"].items())
                print(f"  inputs: {pairs}")
                print(f"  mode: {report['flags']['mode']}")
                print(f"  s1 lower bound: {_fmt(res['s1_lower'])}")
            return code

        if args.command == "simulate":
            report, code = run_simulate(cfg, args.output)
            if args.json:
                print(json.dumps(report, indent=2, sort_keys=True))
            else:
                for section in ("inputs", "observed", "ground_truth"):
                    pairs = ", ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}"
                                      for k, v in report[section].items())
                    print(f"{section}: {pairs}")
                if report["output_file"]:
                    print(f"counts written to {report['output_file']}")
            return code

        raise InvariantViolation(f"unknown command {args.command!r}")
    except ProtocolDiscarded as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (InvariantViolation, ValidityError, InfeasibleProblem) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except DecoyCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
