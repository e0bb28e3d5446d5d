"""Acceptance suite: every headline number the simulator must reproduce.

Each criterion is a standalone function returning (passed, detail); the
CLI `selftest` subcommand and the test suite both run them through
`run_all`, which prints nothing itself.  Tolerances are fixed here, not
configurable.
"""

from __future__ import annotations

import dataclasses
import filecmp
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import analysis, cli, noise, qcore, thermal
from .experiment import bell_experiment, parity_scan
from .noise import NoiseConfig
from .qcore import AtomLevel, ReadoutMode, computational_state
from .sequence import PhysicalParams, ideal_cnot_table
from .thermal import TrapConfig, calibrate_blockade

TWO_PI = 2 * math.pi
BLOCKADE_TARGET = TWO_PI * 5.3e6


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _rk4_evolve(h: np.ndarray, t: float, psi: np.ndarray,
                dt: float = 1e-9) -> np.ndarray:
    """Fixed-step 4th-order integration of psi' = -i h psi (oracle only)."""
    steps = max(1, int(round(t / dt)))
    step = t / steps
    psi = psi.astype(complex).copy()
    for _ in range(steps):
        k1 = -1j * (h @ psi)
        k2 = -1j * (h @ (psi + 0.5 * step * k1))
        k3 = -1j * (h @ (psi + 0.5 * step * k2))
        k4 = -1j * (h @ (psi + step * k3))
        psi = psi + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def _pipeline_fidelity(params, trap, model, cfg, shots, seed,
                       gaps=None, label="acc"):
    """Bell populations + parity fit -> fidelity report."""
    if gaps is None:
        gaps = np.linspace(0.0, 8e-6, 25)
    bell = bell_experiment(AtomLevel.G1, shots, params, trap, model, cfg,
                           seed=seed, label=f"{label}-bell")
    curve = parity_scan(gaps, shots, params, trap, model, cfg,
                        seed=seed + 1, label=f"{label}-par")
    fit = analysis.fit_parity(curve, params.omega_ac)
    retention = cfg.p_bg_single ** 2 if cfg.enable_loss else 1.0
    report = analysis.bell_fidelity_report(
        bell.populations["00"], bell.populations["11"], fit.abs_c1,
        retention, trace_retention=0.99)
    return report, fit, bell


def crit_1_gate_error(ctx) -> tuple[bool, str]:
    p = ctx.params
    err = noise.intrinsic_gate_error(p.omega_ryd, p.tau_ryd,
                                     BLOCKADE_TARGET, p.omega_10)
    return abs(err - 6.5e-3) <= 0.1e-3, f"E = {err:.4e} (want 6.5e-3 +- 1e-4)"


def crit_2_dephasing(ctx) -> tuple[bool, str]:
    p = ctx.params
    closed = noise.dephasing_factor(150e-6, 2.2e-6, p)
    rng = np.random.default_rng(np.random.SeedSequence([ctx.seed, 2]))
    v = thermal.sample_velocities(150e-6, p.mass, 100_000, rng)[:, 2]
    mc = float(np.mean(np.cos(noise.doppler_k_eff(p) * v * 2.2e-6)))
    fid = noise.max_fidelity_from_dephasing(closed)
    ok = (abs(closed - 0.41) <= 0.02 and abs(mc - 0.41) <= 0.02
          and abs(fid - 0.71) <= 0.01)
    return ok, (f"closed form {closed:.4f}, Monte Carlo {mc:.4f} "
                f"(want 0.41 +- 0.02); fidelity {fid:.4f} (0.71 +- 0.01)")


def crit_3_improvement(ctx) -> tuple[bool, str]:
    params = dataclasses.replace(ctx.params, t24=1.5e-6)
    trap = TrapConfig(temperature=50e-6)
    cfg = NoiseConfig(temperature=50e-6)
    limit = noise.max_fidelity_from_dephasing(
        noise.dephasing_factor(50e-6, 1.5e-6, params))
    rng = np.random.default_rng(np.random.SeedSequence([ctx.seed, 3]))
    model = calibrate_blockade(trap, params, BLOCKADE_TARGET, 50_000, rng)
    report, _, _ = _pipeline_fidelity(params, trap, model, cfg,
                                      shots=20_000, seed=ctx.seed + 300,
                                      label="acc3")
    ok = limit >= 0.93 and report.trace_corrected >= 0.88
    return ok, (f"phase-limited fidelity {limit:.4f} (>= 0.93); "
                f"simulated corrected {report.trace_corrected:.4f} (>= 0.88)")


def crit_4_light_shift(ctx) -> tuple[bool, str]:
    xi = noise.ac_stark_phase(ctx.params)
    return abs(xi - 14.69) <= 0.05, f"xi = {xi:.4f} rad (want 14.69 +- 0.05)"


def crit_5_quadrature(ctx) -> tuple[bool, str]:
    now = noise.quadrature_budget(cli.REFERENCE["budget_now"]).total
    prev = noise.quadrature_budget(cli.REFERENCE["budget_earlier"]).total
    ok = abs(now - 0.064) <= 0.002 and abs(prev - 0.147) <= 0.002
    return ok, (f"totals {now:.4f} (want 0.064), {prev:.4f} (want 0.147, "
                f"exact quadrature of the published entries is 0.1463)")


def crit_6_vdw_ratio(ctx) -> tuple[bool, str]:
    model = thermal.BlockadeModel(b0=1.0, r0=8.7e-6)
    ratio = model.blockade(8.7e-6) / model.blockade(10e-6)
    return abs(ratio - 2.31) <= 0.01, f"ratio = {ratio:.4f} (2.31 +- 0.01)"


def crit_7_thermal_average(ctx) -> tuple[bool, str]:
    rng = np.random.default_rng(np.random.SeedSequence([ctx.seed, 7]))
    pos_a = thermal.sample_positions(ctx.trap, 100_000, rng)
    pos_b = thermal.sample_positions(ctx.trap, 100_000, rng)
    seps = thermal.pair_separations(ctx.trap, pos_a, pos_b)
    mean = thermal.mean_intrinsic_error(ctx.model, seps, ctx.params)
    return (abs(mean - 6.5e-3) <= 1.0e-3,
            f"<E> = {mean:.4e} on a fresh ensemble (want 6.5e-3 +- 1e-3)")


def crit_8_table_arithmetic(ctx) -> tuple[bool, str]:
    published = np.array([[0.08, 0.93, 0.00, 0.00],
                          [0.88, 0.02, 0.02, 0.02],
                          [0.00, 0.00, 0.90, 0.05],
                          [0.02, 0.05, 0.07, 0.94]])
    fid = analysis.truth_table_fidelity(published, ideal_cnot_table())
    c1 = analysis.correct_background(0.74, 0.81)
    c2 = analysis.correct_trace(0.914, 0.99)
    c3 = analysis.correct_background(0.58, 0.81)
    ok = (abs(fid - 0.9125) <= 1e-4 and abs(c1 - 0.914) <= 5e-4
          and abs(c2 - 0.923) <= 5e-4 and abs(c3 - 0.716) <= 5e-4)
    return ok, (f"printed-matrix fidelity {fid:.4f} (0.9125); corrections "
                f"{c1:.4f}/{c2:.4f}/{c3:.4f} (0.914/0.923/0.716)")


def crit_9_end_to_end(ctx) -> tuple[bool, str]:
    cfg = NoiseConfig()
    report, _, _ = _pipeline_fidelity(ctx.params, ctx.trap, ctx.model, cfg,
                                      shots=10_000, seed=ctx.seed + 900,
                                      label="acc9")
    f = report.background_corrected
    return (0.60 <= f <= 0.72,
            f"corrected Bell fidelity {f:.4f} (want within [0.60, 0.72]; "
            f"the reference model predicts about 0.65)")


def crit_10_parity_pipeline(ctx) -> tuple[bool, str]:
    p = ctx.params
    msgs = []
    ok = True

    # frequency and amplitude from a noiseless simulated scan
    cfg0 = NoiseConfig.noiseless()
    gaps = np.linspace(0.0, 8e-6, 25)
    curve = parity_scan(gaps, 3000, p, ctx.trap, None, cfg0,
                        seed=ctx.seed + 10, label="acc10")
    fit = analysis.fit_parity(curve, p.omega_ac)
    freq_err = abs(2 * fit.omega_fit - 2 * p.omega_ac) / (2 * p.omega_ac)
    ok &= freq_err <= 0.05 and 2 * fit.abs_c1 >= 0.98
    msgs.append(f"frequency off by {freq_err * 100:.2f}% (<=5%), "
                f"amplitude {2 * fit.abs_c1:.4f} (>=0.98)")

    # exact synthetic recovery
    t = np.linspace(0, 8e-6, 25)
    truth = (0.02, 0.35, 2.12, p.omega_ac)
    y = 2 * truth[0] - 2 * truth[1] * np.cos(2 * truth[3] * t + truth[2])
    exact = analysis.fit_parity(SimpleNamespace(gaps=t, parity=y,
                                                errors=None), p.omega_ac)
    dev = max(abs(exact.re_c2 - truth[0]), abs(exact.abs_c1 - truth[1]),
              abs(exact.xi - truth[2]),
              abs(exact.omega_fit - truth[3]) / truth[3])
    ok &= dev <= 1e-6
    msgs.append(f"noiseless recovery within {dev:.1e} (<=1e-6)")

    # unbiasedness under noise
    rng = np.random.default_rng(np.random.SeedSequence([ctx.seed, 10]))
    estimates = []
    sigmas = []
    for _ in range(200):
        noisy = y + rng.normal(scale=0.03, size=len(t))
        f = analysis.fit_parity(
            SimpleNamespace(gaps=t, parity=noisy,
                            errors=np.full(len(t), 0.03)), p.omega_ac)
        estimates.append([f.re_c2, f.abs_c1, f.xi, f.omega_fit])
        sigmas.append(np.sqrt(np.clip(np.diag(f.covariance), 0, None)))
    bias = np.mean(estimates, axis=0) - np.array(truth)
    allowance = 3 * np.mean(sigmas, axis=0) / math.sqrt(200)
    unbiased = bool(np.all(np.abs(bias) <= allowance))
    ok &= unbiased
    msgs.append(f"bias within 3 sigma/sqrt(200): {unbiased}")

    # separable-state pipeline stays at or below the threshold
    cfg_sep = dataclasses.replace(cfg0, fixed_blockade=0.0)
    bell = bell_experiment(AtomLevel.G1, 4000, p, ctx.trap, None, cfg_sep,
                           seed=ctx.seed + 11, label="acc10s")
    sep_curve = parity_scan(gaps, 3000, p, ctx.trap, None, cfg_sep,
                            seed=ctx.seed + 12, label="acc10sp")
    sep_fit = analysis.fit_parity(sep_curve, p.omega_ac)
    f_sep = analysis.entanglement_fidelity(bell.populations["00"],
                                           bell.populations["11"],
                                           sep_fit.abs_c1)
    sigma_f = math.sqrt(bell.errors["00"] ** 2 + bell.errors["11"] ** 2) / 2 \
        + math.sqrt(max(sep_fit.covariance[1, 1], 0.0))
    ok &= f_sep <= 0.5 + 3 * sigma_f
    msgs.append(f"separable F = {f_sep:.4f} (<= 0.5 + 3 sigma)")
    return bool(ok), "; ".join(msgs)


def crit_11_numerical_core(ctx) -> tuple[bool, str]:
    rng = np.random.default_rng(np.random.SeedSequence([ctx.seed, 11]))
    msgs = []
    ok = True

    # unitarity and propagator-vs-integrator on random Hermitian matrices
    # scaled to spectral norm 2 pi x 10 MHz (entries then bounded by it too)
    worst_norm = 0.0
    worst_dev = 0.0
    for _ in range(12):
        m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        h = m + m.conj().T
        h *= TWO_PI * 10e6 / np.linalg.norm(h, 2)
        psi = rng.normal(size=9) + 1j * rng.normal(size=9)
        psi /= np.linalg.norm(psi)
        state = qcore.TwoAtomState(psi)
        t = rng.uniform(0.0, 10e-6)
        evolved = qcore.evolve(state, h, t)
        worst_norm = max(worst_norm, abs(evolved.norm() - 1.0))
        t_short = rng.uniform(0.0, 100e-9)
        dev = np.max(np.abs(qcore.evolve(state, h, t_short).amps
                            - _rk4_evolve(h, t_short, psi)))
        worst_dev = max(worst_dev, float(dev))
    ok &= worst_norm <= 1e-10 and worst_dev <= 1e-6
    msgs.append(f"norm error {worst_norm:.1e} (<=1e-10), integrator "
                f"deviation {worst_dev:.1e} (<=1e-6)")

    # blockade limit: control in r freezes a 2 pi target pulse
    p = ctx.params
    big_b = 1e4 * p.omega_ryd
    h = qcore.rydberg_hamiltonian((0.0, p.omega_ryd), (0.0, 0.0), big_b)
    blocked = qcore.evolve(computational_state(AtomLevel.R, AtomLevel.G1),
                           h, TWO_PI / p.omega_ryd)
    leak = 1.0 - blocked.population(AtomLevel.R, AtomLevel.G1)
    ok &= leak < 1e-3
    msgs.append(f"blockade leakage {leak:.1e} (<1e-3)")

    # Born-rule frequencies
    state = qcore.product_state(np.array([1, 1, 0]) / math.sqrt(2),
                                np.array([0, 1, 0]))
    n = 10_000
    hits = sum(qcore.measure(state, rng, ReadoutMode.BLOW_ONE) == (True, False)
               for _ in range(n))
    sigma = math.sqrt(0.25 * n)
    ok &= abs(hits - 0.5 * n) <= 3 * sigma
    msgs.append(f"Born frequency {hits / n:.4f} (0.5 +- 3 sigma)")
    return bool(ok), "; ".join(msgs)


def crit_12_determinism(ctx) -> tuple[bool, str]:
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for workers in (1, 4, 8):
            out = Path(tmp) / f"w{workers}"
            out.mkdir()
            run = cli.RunConfig(params=ctx.params, trap=ctx.trap,
                                noise=NoiseConfig(), seed=ctx.seed,
                                shots=2000, workers=workers,
                                out_dir=str(out))
            cli._cmd_truth_table(run, out)
            outputs.append(out)
        same = all(
            filecmp.cmp(outputs[0] / name, other / name, shallow=False)
            for other in outputs[1:]
            for name in ("truth_table_raw.csv", "truth_table_corrected.csv",
                         "prep_table_raw.csv"))
    return same, ("CSV outputs byte-identical across worker counts {1,4,8}: "
                  f"{same}")


CRITERIA = [
    ("1 intrinsic gate error", crit_1_gate_error),
    ("2 dephasing factor", crit_2_dephasing),
    ("3 improvement projection", crit_3_improvement),
    ("4 light-shift phase", crit_4_light_shift),
    ("5 quadrature budgets", crit_5_quadrature),
    ("6 van der Waals ratio", crit_6_vdw_ratio),
    ("7 thermal average", crit_7_thermal_average),
    ("8 table arithmetic", crit_8_table_arithmetic),
    ("9 end-to-end prediction", crit_9_end_to_end),
    ("10 parity pipeline", crit_10_parity_pipeline),
    ("11 numerical core", crit_11_numerical_core),
    ("12 determinism", crit_12_determinism),
]


def make_context(seed: int = 0, workers: int = 1) -> SimpleNamespace:
    params = PhysicalParams()
    trap = TrapConfig()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB10C]))
    model = calibrate_blockade(trap, params, BLOCKADE_TARGET, 50_000, rng)
    return SimpleNamespace(params=params, trap=trap, model=model,
                           seed=seed, workers=workers)


def run_all(seed: int = 0, workers: int = 1) -> list[CriterionResult]:
    ctx = make_context(seed, workers)
    results = []
    for name, fn in CRITERIA:
        start = time.time()
        try:
            passed, detail = fn(ctx)
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CriterionResult(name=name, passed=passed,
                                       detail=detail,
                                       seconds=time.time() - start))
    return results
