"""Command-line front end: config handling, experiment drivers, CSV export.

Subcommands reproduce the headline measurements at desk scale:

    error-budget      analytic gate error, quadrature budget, dephasing table
    blockade-profile  blockade shift and double-excitation vs separation,
                      separation histograms
    rabi              ground/Rydberg flopping with crosstalk and blockade
    truth-table       state-preparation and CNOT matrices, raw and corrected
    bell              Bell-state populations for both target inputs
    parity            parity scan, coherence fit, fidelity report
    selftest          run the acceptance suite

Exit codes: 0 success, 2 configuration error, 3 numerical or fit failure,
4 acceptance failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, noise
from .experiment import (bell_experiment, parity_scan, rabi_experiment,
                         truth_table)
from .noise import BUDGET_FIELDS, NoiseConfig
from .qcore import AtomLevel
from .sequence import (INPUT_LABELS, PhysicalParams, Transition,
                       ideal_cnot_table)
from .thermal import (BlockadeModel, TrapConfig, calibrate_blockade,
                      double_excitation_prob, separation_distribution)

BLOCKADE_TARGET = 2 * math.pi * 5.3e6   # effective shift the model matches
CALIBRATION_SAMPLES = 50_000

REFERENCE = {
    "budget_now": dict(zip(BUDGET_FIELDS, (0.02, 0.02, 0.01, 0.04, 0.04))),
    "budget_earlier": dict(zip(BUDGET_FIELDS, (0.1, 0.09, 0.01, 0.04, 0.04))),
    "cnot_raw": 0.74, "cnot_bg": 0.91, "cnot_trace": 0.92,
    "bell_raw": 0.58, "bell_bg": 0.71,
    "background_loss_pair": 0.19, "trace_loss": 0.01,
}


class ConfigError(ValueError):
    """Bad configuration file or overrides."""


@dataclass
class RunConfig:
    """Full run description: physics, trap, noise and execution settings."""

    params: PhysicalParams
    trap: TrapConfig
    noise: NoiseConfig
    seed: int = 0
    shots: int = 10_000
    workers: int = 1
    out_dir: str = "rydcnot-out"


_SECTIONS = {
    "physical": PhysicalParams,
    "trap": TrapConfig,
    "noise": NoiseConfig,
}

_RUN_FIELDS = {"seed": int, "shots": int, "workers": int, "out_dir": str}

_UNITS = {
    "omega_ryd": "rad/s", "omega_g": "rad/s", "omega_10": "rad/s",
    "tau_ryd": "s", "omega_780": "rad/s", "omega_480": "rad/s",
    "delta_f2": "rad/s", "lambda_780": "m", "lambda_480": "m",
    "lambda_trap": "m", "omega_ac": "rad/s", "mass": "kg",
    "gamma_5p": "rad/s", "t24": "s", "crosstalk_ratio": "dimensionless",
    "depth": "K (potential depth / k_B)", "waist": "m",
    "trap_wavelength": "m", "separation_x": "m", "temperature": "K",
    "p_bg_single": "probability", "p_pump_err": "probability",
    "p_se_total": "probability", "loss_before_frac": "fraction",
    "se_branch_p0": "probability", "doppler_axis": "0=x 1=y 2=z",
    "fixed_blockade": "rad/s or 'none'",
}


def default_config() -> RunConfig:
    return RunConfig(params=PhysicalParams(), trap=TrapConfig(),
                     noise=NoiseConfig())


def dump_config(cfg: RunConfig) -> str:
    """Serialize the effective configuration (reloadable, units in comments)."""
    lines = ["# rydcnot run configuration; values are SI"]
    for section, cls in _SECTIONS.items():
        obj = dict(params=cfg.params, trap=cfg.trap,
                   noise=cfg.noise)[
                       {"physical": "params", "trap": "trap",
                        "noise": "noise"}[section]]
        lines.append(f"\n[{section}]")
        for f in dataclasses.fields(cls):
            unit = _UNITS.get(f.name)
            if unit:
                lines.append(f"# {unit}")
            value = getattr(obj, f.name)
            if value is None:
                value = "none"
            lines.append(f"{f.name} = {value}")
    lines.append("\n[run]")
    for name in _RUN_FIELDS:
        lines.append(f"{name} = {getattr(cfg, name)}")
    return "\n".join(lines) + "\n"


def _coerce(name: str, text: str, py_type):
    text = text.strip()
    try:
        if py_type is bool:
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        return py_type(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name} = {text!r}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Read a config file; unknown sections or keys are hard errors."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path} not found")
    known = set(_SECTIONS) | {"run"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    built = {}
    for section, cls in _SECTIONS.items():
        kwargs = {}
        field_types = {f.name: f.type for f in dataclasses.fields(cls)}
        if parser.has_section(section):
            for key, raw in parser.items(section):
                if key not in field_types:
                    raise ConfigError(
                        f"unknown key {key!r} in section [{section}]")
                if key == "fixed_blockade":
                    kwargs[key] = (None if raw.strip().lower() == "none"
                                   else _coerce(key, raw, float))
                elif key == "doppler_axis":
                    kwargs[key] = _coerce(key, raw, int)
                elif key.startswith("enable_"):
                    kwargs[key] = _coerce(key, raw, bool)
                else:
                    kwargs[key] = _coerce(key, raw, float)
        try:
            built[section] = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad [{section}] values: {exc}") from exc

    run_kwargs = {}
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key not in _RUN_FIELDS:
                raise ConfigError(f"unknown key {key!r} in section [run]")
            run_kwargs[key] = _coerce(key, raw, _RUN_FIELDS[key])
    return RunConfig(params=built["physical"], trap=built["trap"],
                     noise=built["noise"], **run_kwargs)


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([str(x) for x in row])


def _calibrated_model(cfg: RunConfig) -> BlockadeModel:
    rng = np.random.default_rng(
        np.random.SeedSequence([cfg.seed, 0xB10C]))
    return calibrate_blockade(cfg.trap, cfg.params, BLOCKADE_TARGET,
                              CALIBRATION_SAMPLES, rng)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_error_budget(cfg: RunConfig, out: Path) -> list[str]:
    p = cfg.params
    err = noise.intrinsic_gate_error(p.omega_ryd, p.tau_ryd,
                                     BLOCKADE_TARGET, p.omega_10)
    budget_now = noise.quadrature_budget(REFERENCE["budget_now"])
    budget_prev = noise.quadrature_budget(REFERENCE["budget_earlier"])
    _write_csv(out / "quadrature_budget.csv",
               ["error_source", "this_work", "earlier_work"],
               [(name, REFERENCE["budget_now"][name],
                 REFERENCE["budget_earlier"][name])
                for name in BUDGET_FIELDS]
               + [("total_quadrature", budget_now.total, budget_prev.total)])

    temps = np.linspace(10e-6, 250e-6, 49)
    rows = []
    for t in temps:
        factor = noise.dephasing_factor(t, p.t24, p)
        rows.append((t, factor, noise.max_fidelity_from_dephasing(factor)))
    _write_csv(out / "dephasing_vs_temperature.csv",
               ["temperature_K", "dephasing_factor",
                "stochastic_phase_limited_fidelity"], rows)

    f150 = noise.dephasing_factor(150e-6, p.t24, p)
    xi = noise.ac_stark_phase(p)
    report = [
        f"intrinsic controlled-phase error at effective shift "
        f"{BLOCKADE_TARGET / (2 * math.pi) / 1e6:.2f} MHz: {err:.3e}",
        f"quadrature error budget: this work {budget_now.total:.3f}, "
        f"earlier work {budget_prev.total:.3f}",
        f"dephasing factor at 150 uK, gap {p.t24 * 1e6:.1f} us: {f150:.3f} "
        f"-> phase-limited fidelity "
        f"{noise.max_fidelity_from_dephasing(f150):.3f}",
        f"differential light-shift phase: {xi:.3f} rad "
        f"({xi % (2 * math.pi):.3f} mod 2 pi)",
    ]
    return report


def _cmd_blockade_profile(cfg: RunConfig, out: Path) -> list[str]:
    model = _calibrated_model(cfg)
    p = cfg.params
    r_grid = np.linspace(0.7 * cfg.trap.separation_x,
                         2.5 * cfg.trap.separation_x, 73)
    rows = [(r * 1e6, model.blockade(r),
             double_excitation_prob(p.omega_ryd, model.blockade(r)))
            for r in r_grid]
    _write_csv(out / "blockade_vs_separation.csv",
               ["separation_um", "blockade_rad_s",
                "double_excitation_probability"], rows)

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xD157]))
    dist = separation_distribution(cfg.trap, max(cfg.shots, 10_000), rng)
    (out / "separation_hist_axial.txt").write_text(dist.to_text("axial"))
    (out / "separation_hist_3d.txt").write_text(dist.to_text("full"))
    return [
        f"blockade model: b0 = {model.b0:.4e} rad/s at r0 = "
        f"{model.r0 * 1e6:.2f} um (1/R^6 scaling)",
        f"axial separation std: {dist.axial_std * 1e6:.2f} um; "
        f"mean 3-D separation {dist.mean_separation * 1e6:.2f} um",
    ]


def _cmd_rabi(cfg: RunConfig, out: Path) -> list[str]:
    model = _calibrated_model(cfg)
    p = cfg.params
    report = []
    scans = [
        ("ground", Transition.GROUND, 2 * math.pi / p.omega_g, False),
        ("rydberg", Transition.RYDBERG, 2 * math.pi / p.omega_ryd, False),
        ("blockaded", Transition.RYDBERG, 2 * math.pi / p.omega_ryd, True),
    ]
    for name, transition, period, blocked in scans:
        durations = np.linspace(0.0, 2.0 * period, 41)
        curve = rabi_experiment(transition, 1, durations, cfg.shots,
                                p, cfg.trap, model, cfg.noise,
                                neighbor_blocked=blocked, seed=cfg.seed,
                                workers=cfg.workers, label=f"rabi-{name}")
        _write_csv(out / f"rabi_{name}.csv",
                   ["duration_s", "targeted_present", "targeted_err",
                    "neighbor_present", "neighbor_err"],
                   zip(curve.durations, curve.targeted, curve.targeted_err,
                       curve.neighbor, curve.neighbor_err))
        if blocked:
            report.append(f"{name}: residual flopping max "
                          f"{curve.targeted.max():.4f}")
            continue
        base = p.omega_g if transition is Transition.GROUND else p.omega_ryd
        fit = analysis.fit_rabi(curve.durations, curve.targeted, base,
                                errors=curve.targeted_err)
        report.append(f"{name}: pi time {fit.pi_time * 1e9:.1f} ns, "
                      f"peak-to-peak {fit.peak_to_peak:.3f}")
    return report


def _table_rows(table):
    for i, lab in enumerate(table.inputs):
        yield (lab, *(table.probs[i]), table.loss[i], *(table.errors[i]))


_TABLE_HEADER = ["input", "p00", "p01", "p10", "p11", "loss",
                 "err00", "err01", "err10", "err11"]


def _cmd_truth_table(cfg: RunConfig, out: Path) -> list[str]:
    model = (None if not cfg.noise.enable_thermal_blockade
             else _calibrated_model(cfg))
    prep = truth_table(cfg.shots, cfg.params, cfg.trap, model, cfg.noise,
                       pulses=[], seed=cfg.seed, workers=cfg.workers,
                       label="prep")
    gate = truth_table(cfg.shots, cfg.params, cfg.trap, model, cfg.noise,
                       seed=cfg.seed, workers=cfg.workers, label="cnot")
    _write_csv(out / "prep_table_raw.csv", _TABLE_HEADER, _table_rows(prep))
    _write_csv(out / "truth_table_raw.csv", _TABLE_HEADER, _table_rows(gate))

    p_bg = cfg.noise.p_bg_single if cfg.noise.enable_loss else 1.0
    corrected = gate.background_corrected(p_bg)
    _write_csv(out / "truth_table_corrected.csv", _TABLE_HEADER,
               _table_rows(corrected))

    ideal = ideal_cnot_table()
    rep = analysis.cnot_fidelity_report(gate, ideal, p_bg,
                                        1 - REFERENCE["trace_loss"])
    prep_fid = float(np.mean([prep.probs[i, i] for i in range(4)]))
    return [
        f"state preparation mean diagonal: {prep_fid:.3f}",
        f"CNOT fidelity raw {rep.raw:.3f} (reference "
        f"{REFERENCE['cnot_raw']:.2f}), background corrected "
        f"{rep.background_corrected:.3f} ({REFERENCE['cnot_bg']:.2f}), "
        f"background & trace corrected {rep.trace_corrected:.3f} "
        f"({REFERENCE['cnot_trace']:.2f})",
    ]


def _cmd_bell(cfg: RunConfig, out: Path) -> list[str]:
    model = (None if not cfg.noise.enable_thermal_blockade
             else _calibrated_model(cfg))
    rows = []
    report = []
    for target in (AtomLevel.G1, AtomLevel.G0):
        res = bell_experiment(target, cfg.shots, cfg.params, cfg.trap,
                              model, cfg.noise, seed=cfg.seed,
                              workers=cfg.workers,
                              label=f"bell-{int(target)}")
        rows.append((f"B{1 if target is AtomLevel.G1 else 2}",
                     *(res.populations[k] for k in INPUT_LABELS), res.loss,
                     *(res.errors[k] for k in INPUT_LABELS)))
        report.append(
            f"target |{int(target)}> populations: "
            + " ".join(f"P{k}={res.populations[k]:.3f}"
                       for k in INPUT_LABELS))
    _write_csv(out / "bell_populations.csv",
               ["state", "p00", "p01", "p10", "p11", "loss",
                "err00", "err01", "err10", "err11"], rows)
    return report


def _cmd_parity(cfg: RunConfig, out: Path) -> list[str]:
    model = (None if not cfg.noise.enable_thermal_blockade
             else _calibrated_model(cfg))
    p = cfg.params
    gaps = np.linspace(0.0, 8e-6, 25)
    bell = bell_experiment(AtomLevel.G1, cfg.shots, p, cfg.trap, model,
                           cfg.noise, seed=cfg.seed, workers=cfg.workers)
    curve = parity_scan(gaps, cfg.shots, p, cfg.trap, model, cfg.noise,
                        seed=cfg.seed + 1, workers=cfg.workers)
    _write_csv(out / "parity_scan.csv",
               ["gap_s", "parity", "parity_err"],
               zip(curve.gaps, curve.parity, curve.errors))
    fit = analysis.fit_parity(curve, p.omega_ac)
    sig = np.sqrt(np.clip(np.diag(fit.covariance), 0, None))
    _write_csv(out / "parity_fit.csv",
               ["parameter", "value", "sigma"],
               [("re_c2", fit.re_c2, sig[0]),
                ("abs_c1", fit.abs_c1, sig[1]),
                ("xi_rad", fit.xi, sig[2]),
                ("oscillation_rad_s", 2 * fit.omega_fit, 2 * sig[3]),
                ("residual_rms", fit.residual_rms, "")])

    pair_retention = (cfg.noise.p_bg_single ** 2 if cfg.noise.enable_loss
                      else 1.0)
    rep = analysis.bell_fidelity_report(
        bell.populations["00"], bell.populations["11"], fit.abs_c1,
        pair_retention, 1 - REFERENCE["trace_loss"])
    _write_csv(out / "fidelity_report.csv",
               ["quantity", "value", "reference"],
               [("bell_fidelity_raw", rep.raw, REFERENCE["bell_raw"]),
                ("bell_fidelity_background_corrected",
                 rep.background_corrected, REFERENCE["bell_bg"]),
                ("bell_fidelity_trace_corrected", rep.trace_corrected,
                 REFERENCE["bell_bg"])])
    xi_analytic = noise.ac_stark_phase(p)
    return [
        f"oscillation frequency 2w = "
        f"{2 * fit.omega_fit / (2 * math.pi) / 1e6:.4f} MHz "
        f"(drive Stark rate doubled: "
        f"{2 * p.omega_ac / (2 * math.pi) / 1e6:.4f} MHz)",
        f"coherence |C1| = {fit.abs_c1:.4f}, phase xi = {fit.xi:.3f} rad "
        f"(light-shift value mod 2 pi: "
        f"{xi_analytic % (2 * math.pi):.3f}; with winding restored: "
        f"{analysis.unwind_phase(fit.xi, xi_analytic):.3f})",
        f"Bell fidelity raw {rep.raw:.3f} "
        f"(reference {REFERENCE['bell_raw']:.2f}), corrected "
        f"{rep.background_corrected:.3f} ({REFERENCE['bell_bg']:.2f})",
    ]


def _cmd_selftest(cfg: RunConfig, out: Path) -> int:
    from .acceptance import run_all

    results = run_all(seed=cfg.seed, workers=cfg.workers)
    lines = []
    ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        ok &= res.passed
        line = f"[{status}] {res.name}: {res.detail} ({res.seconds:.1f}s)"
        print(line)
        lines.append(line)
    (out / "selftest.txt").write_text("\n".join(lines) + "\n")
    return 0 if ok else 4


COMMANDS = {
    "error-budget": _cmd_error_budget,
    "blockade-profile": _cmd_blockade_profile,
    "rabi": _cmd_rabi,
    "truth-table": _cmd_truth_table,
    "bell": _cmd_bell,
    "parity": _cmd_parity,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydcnot",
        description="Monte Carlo simulator for a two-atom blockade CNOT")
    parser.add_argument("command",
                        choices=sorted(COMMANDS) + ["selftest"])
    parser.add_argument("--config", help="configuration file path")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (default 0)")
    parser.add_argument("--shots", type=int, default=None,
                        help="shots per data point")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel shot workers")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--no-noise", action="store_true",
                        help="disable every noise channel")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.shots is not None:
            if args.shots < 1:
                raise ConfigError("shots must be positive")
            cfg = dataclasses.replace(cfg, shots=args.shots)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("workers must be positive")
            cfg = dataclasses.replace(cfg, workers=args.workers)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out_dir=args.out)
        if args.no_noise:
            cfg = dataclasses.replace(cfg, noise=NoiseConfig.noiseless())
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.ini").write_text(dump_config(cfg))

    if args.command == "selftest":
        return _cmd_selftest(cfg, out)
    try:
        report = COMMANDS[args.command](cfg, out)
    except (analysis.FitError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    text = "\n".join([f"rydcnot {args.command}", *report])
    (out / "report.txt").write_text(text + "\n")
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
