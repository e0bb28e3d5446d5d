"""Shot-level experiment harness.

One shot mirrors one repetition of the physical sequence: draw a thermal
realization (positions fix the blockade shift, velocities the Doppler
detunings), apply optical-pumping and trap-loss imperfections, propagate
the pulse train with stochastic intermediate-state scattering, then read
the pair out destructively in one of the two blow-away modes.

Readout attribution follows the experiment's conventions.  With push-out
detection an absent atom is indistinguishable from one that was blown
away, so per mode every pattern maps to a computational outcome; the
assembled table takes each cell from the modes able to see it:

    P(00) = f_A(present, present)          A = blow away |1>
    P(11) = f_B(present, present)          B = blow away |0>
    P(01) = [f_A(present, absent) + f_B(absent, present)] / 2
    P(10) = [f_A(absent, present) + f_B(present, absent)] / 2

and the remainder of each row is unattributable loss (double-absent
patterns inconsistent with the mode's blow-away).  Both-present cells pay
the full two-atom background survival; single-absent cells are partially
contaminated by losses, exactly as the raw experimental numbers are.

Determinism: shots are processed in fixed chunks of 256, and the random
stream of chunk i of experiment "label" derives from (master seed,
crc32(label), i).  Aggregation sums integer counts, so results are
identical for any worker count.  Channel randomness is drawn in a fixed
order whether or not a channel is enabled, which couples runs that differ
only in channel switches (used by the monotonicity tests).
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from . import qcore, thermal
from ._kernel import apply_rydberg
from .noise import NoiseConfig, ac_stark_phase, doppler_k_eff, se_rate
from .qcore import AtomLevel, ReadoutMode, TwoAtomState
from .sequence import (INPUT_LABELS, PhysicalParams, PulseSpec, Transition,
                       bell_prep_sequence, cnot_sequence,
                       parity_analysis_pulses, rabi_scan)
from .thermal import BlockadeModel, ThermalSample, TrapConfig

CHUNK = 256

IDEAL_BLOCKADE_RATIO = 1e4  # B/Omega used when the blockade is idealized

_CTRL_R = (6, 7, 8)
_TGT_R = (2, 5, 8)


# ---------------------------------------------------------------------------
# sequence compilation


@dataclass
class _Step:
    pulse: PulseSpec
    duration: float
    ground_u: np.ndarray | None = None        # unmasked propagator
    masked_cache: dict = field(default_factory=dict)
    p_se: tuple[float, float] = (0.0, 0.0)    # nominal scattering per atom


@dataclass
class CompiledSequence:
    steps: list[_Step]
    params: PhysicalParams
    xi_total: float

    def se_probability(self) -> float:
        """Summed nominal scattering probability over pulses and atoms."""
        return float(sum(s.p_se[0] + s.p_se[1] for s in self.steps))


def _ground_unitary(pulse: PulseSpec, params: PhysicalParams,
                    masked: tuple[bool, bool] = (False, False)) -> np.ndarray:
    om = [pulse.targets[i] * params.omega_g * (0.0 if masked[i] else 1.0)
          for i in range(2)]
    h = qcore.ground_hamiltonian((om[0], om[1]), pulse.phases)
    w, v = np.linalg.eigh(h)
    t = pulse.duration(params)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def compile_sequence(pulses: list[PulseSpec], params: PhysicalParams,
                     cfg: NoiseConfig) -> CompiledSequence:
    """Precompute everything shot-independent about a pulse train."""
    rate = se_rate(params, cfg)
    steps = []
    for p in pulses:
        s = _Step(pulse=p, duration=p.duration(params))
        if p.area > 0 and p.transition is Transition.GROUND:
            s.ground_u = _ground_unitary(p, params)
        if p.area > 0 and p.transition is Transition.RYDBERG:
            s.p_se = tuple(rate * s.duration * sc * sc for sc in p.targets)
        steps.append(s)
    xi = ac_stark_phase(params) if cfg.enable_ac_stark else 0.0
    return CompiledSequence(steps=steps, params=params, xi_total=xi)


# ---------------------------------------------------------------------------
# single-shot execution


@dataclass
class ShotRecord:
    """Everything that happened in one experimental repetition."""

    input_label: str
    thermal: ThermalSample | None
    se_events: list[tuple[int, int]]          # (step index, atom)
    loss_flags: tuple[str, str]               # none / before / after
    mispumped: tuple[bool, bool]
    outcome: tuple[bool, bool]                # present flags
    readout_mode: ReadoutMode


def _collapse(psi: np.ndarray, atom: int, level: int,
              rng: np.random.Generator) -> np.ndarray:
    """Depolarizing reset of one atom; the partner keeps its reduced state.

    The partner's state is sampled from the eigenvectors of its reduced
    density matrix, a valid unraveling of "coherence with the partner
    destroyed".
    """
    a = psi.reshape(3, 3)
    rho = a @ a.conj().T if atom == 1 else a.T @ a.conj()
    w, v = np.linalg.eigh(rho)
    w = np.clip(w.real, 0.0, None)
    total = w.sum()
    if total <= 0:
        partner_vec = np.array([1.0, 0.0, 0.0], complex)
    else:
        u = rng.random() * total
        k = 0
        acc = 0.0
        for k in range(3):
            acc += w[k]
            if u < acc:
                break
        partner_vec = v[:, k]
    new = np.zeros(9, complex)
    if atom == 0:
        new[3 * level: 3 * level + 3] = partner_vec
    else:
        new[level::3] = partner_vec
    return new


def _execute(comp: CompiledSequence, levels: tuple[int, int],
             blockade: float, dets: tuple[float, float],
             lost_before: tuple[bool, bool], mispumped: tuple[bool, bool],
             cfg: NoiseConfig, rng: np.random.Generator
             ) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Propagate one shot through the compiled sequence.

    Returns the final amplitudes and the scattering events.  A lost atom
    is never driven, detuned or scattered; a mis-pumped atom keeps its
    ground drive but cannot reach the Rydberg state (until a scattering
    event resets it into the qubit manifold).
    """
    psi = np.zeros(9, complex)
    psi[3 * levels[0] + levels[1]] = 1.0
    buf = np.empty(9, complex)
    mis = list(mispumped)
    se_events = []

    for step_idx, s in enumerate(comp.steps):
        p = s.pulse
        if p.pre_gap > 0:
            for atom, idxs in ((0, _CTRL_R), (1, _TGT_R)):
                if dets[atom] != 0.0 and not lost_before[atom]:
                    ph = np.exp(-1j * dets[atom] * p.pre_gap)
                    for i in idxs:
                        psi[i] *= ph
        if p.area == 0:
            continue

        if p.transition is Transition.GROUND:
            if lost_before == (False, False):
                u = s.ground_u
            else:
                u = s.masked_cache.get(lost_before)
                if u is None:
                    u = _ground_unitary(p, comp.params, masked=lost_before)
                    s.masked_cache[lost_before] = u
            psi = u @ psi
            continue

        # Rydberg pulse: per-atom couplings, detunings, light-shift phase
        om = [0.0, 0.0]
        det = [0.0, 0.0]
        stark = [0.0, 0.0]
        fired = []
        for atom in range(2):
            sc = p.targets[atom]
            if sc > 0:
                u_se = rng.random()
                if (cfg.enable_se and not lost_before[atom]
                        and u_se < s.p_se[atom]):
                    fired.append((atom, rng.random()))
            if lost_before[atom]:
                continue
            stark[atom] = (comp.xi_total * p.stark_frac[atom] / s.duration
                           if s.duration > 0 else 0.0)
            if sc > 0:
                det[atom] = dets[atom]
                if not mis[atom]:
                    om[atom] = sc * comp.params.omega_ryd

        fired.sort(key=lambda e: e[1])
        t0 = 0.0
        for atom, frac in fired:
            if frac > t0:
                apply_rydberg(psi, buf, om[0], om[1], det[0], det[1],
                              blockade, stark[0], stark[1],
                              s.duration * (frac - t0))
                psi, buf = buf, psi
            branch = 0 if rng.random() < cfg.se_branch_p0 else 1
            psi = _collapse(psi, atom, branch, rng)
            mis[atom] = False
            se_events.append((step_idx, atom))
            t0 = frac
        if t0 < 1.0:
            apply_rydberg(psi, buf, om[0], om[1], det[0], det[1],
                          blockade, stark[0], stark[1],
                          s.duration * (1.0 - t0))
            psi, buf = buf, psi
    return psi, se_events


def _ideal_blockade(params: PhysicalParams, cfg: NoiseConfig) -> float:
    if cfg.fixed_blockade is not None:
        return cfg.fixed_blockade
    return IDEAL_BLOCKADE_RATIO * params.omega_ryd


def run_shot(input_label: str, pulses: list[PulseSpec],
             params: PhysicalParams, trap: TrapConfig,
             model: BlockadeModel | None, cfg: NoiseConfig,
             rng: np.random.Generator,
             mode: ReadoutMode = ReadoutMode.BLOW_ONE,
             sample: ThermalSample | None = None,
             comp: CompiledSequence | None = None) -> ShotRecord:
    """One experimental repetition; all stochastic draws come from rng."""
    if comp is None:
        comp = compile_sequence(pulses, params, cfg)
    if sample is None:
        if model is not None:
            sample = thermal.draw_shot_sample(
                trap, model, params.mass, rng,
                velocity_temperature=cfg.temperature)
        else:
            vel = thermal.sample_velocities(cfg.temperature, params.mass,
                                            2, rng)
            sample = ThermalSample(positions=np.zeros((2, 3)),
                                   velocities=vel,
                                   separation=trap.separation_x,
                                   blockade=_ideal_blockade(params, cfg))

    u_pump = (rng.random(), rng.random())
    u_loss = (rng.random(), rng.random())
    u_before = (rng.random(), rng.random())

    mispumped = tuple(cfg.enable_pumping and u < cfg.p_pump_err
                      for u in u_pump)
    lost = tuple(cfg.enable_loss and u > cfg.p_bg_single for u in u_loss)
    before = tuple(lost[i] and u_before[i] < cfg.loss_before_frac
                   for i in range(2))
    after = tuple(lost[i] and not before[i] for i in range(2))

    levels = [int(input_label[0]), int(input_label[1])]
    for i in range(2):
        if mispumped[i]:
            levels[i] = int(AtomLevel.G1)

    blockade = (sample.blockade if cfg.enable_thermal_blockade
                else _ideal_blockade(params, cfg))
    if cfg.enable_doppler:
        k = doppler_k_eff(params)
        dets = (k * sample.velocities[0, cfg.doppler_axis],
                k * sample.velocities[1, cfg.doppler_axis])
    else:
        dets = (0.0, 0.0)

    psi, se_events = _execute(comp, (levels[0], levels[1]), blockade, dets,
                              before, mispumped, cfg, rng)
    state = TwoAtomState(psi, lost=(before[0] or after[0],
                                    before[1] or after[1]))
    outcome = qcore.measure(state, rng, mode)
    flags = tuple("before" if before[i] else ("after" if after[i] else "none")
                  for i in range(2))
    return ShotRecord(input_label=input_label, thermal=sample,
                      se_events=se_events, loss_flags=(flags[0], flags[1]),
                      mispumped=(mispumped[0], mispumped[1]),
                      outcome=outcome, readout_mode=mode)


# ---------------------------------------------------------------------------
# chunked deterministic counting engine

_PAYLOADS: dict = {}


def _set_payloads(payloads: dict):
    global _PAYLOADS
    _PAYLOADS = payloads


def _chunk_counts(task: tuple) -> tuple[str, np.ndarray]:
    """Pattern counts (pp, pa, ap, aa) for one chunk of one experiment."""
    key, chunk_idx, start, count = task
    (pulses, input_label, mode, params, trap, model, cfg, master_seed,
     comp) = _PAYLOADS[key]
    exp_id = zlib.crc32(key.encode())
    rng = np.random.default_rng(
        np.random.SeedSequence([master_seed, exp_id, chunk_idx]))

    if model is not None:
        samples = thermal.draw_shot_samples(
            trap, model, params.mass, count, rng,
            velocity_temperature=cfg.temperature)
    else:
        vels = thermal.sample_velocities(cfg.temperature, params.mass,
                                         2 * count, rng)
        blk = _ideal_blockade(params, cfg)
        samples = [ThermalSample(positions=np.zeros((2, 3)),
                                 velocities=vels[2 * i: 2 * i + 2],
                                 separation=trap.separation_x, blockade=blk)
                   for i in range(count)]

    counts = np.zeros(4, dtype=np.int64)
    for i in range(count):
        rec = run_shot(input_label, pulses, params, trap, model, cfg, rng,
                       mode=mode, sample=samples[i], comp=comp)
        k = (0 if rec.outcome[0] else 2) + (0 if rec.outcome[1] else 1)
        counts[k] += 1
    return key, counts


def _run_experiments(jobs: dict, shots_per_mode: int, master_seed: int,
                     workers: int) -> dict[str, np.ndarray]:
    """Run pattern counting for named jobs, deterministically in workers.

    jobs maps a unique label to (pulses, input_label, mode, params, trap,
    model, cfg).  Returns label -> int64 counts over the four patterns.
    """
    payloads = {}
    tasks = []
    for key, (pulses, input_label, mode, params, trap, model, cfg) in \
            jobs.items():
        comp = compile_sequence(pulses, params, cfg)
        payloads[key] = (pulses, input_label, mode, params, trap, model,
                         cfg, master_seed, comp)
        n_chunks = (shots_per_mode + CHUNK - 1) // CHUNK
        for ci in range(n_chunks):
            start = ci * CHUNK
            tasks.append((key, ci, start,
                          min(CHUNK, shots_per_mode - start)))

    results: dict[str, np.ndarray] = {
        key: np.zeros(4, dtype=np.int64) for key in jobs}
    if workers <= 1:
        _set_payloads(payloads)
        for task in tasks:
            key, counts = _chunk_counts(task)
            results[key] += counts
    else:
        with Pool(workers, initializer=_set_payloads,
                  initargs=(payloads,)) as pool:
            for key, counts in pool.map(_chunk_counts, tasks,
                                        chunksize=max(1, len(tasks)
                                                      // (4 * workers))):
                results[key] += counts
    return results


# ---------------------------------------------------------------------------
# assembled measurements

_W_PARITY = np.array([1.0, -0.5, -0.5, 0.0])


def _cells_from_counts(c_a: np.ndarray, c_b: np.ndarray
                       ) -> tuple[dict[str, float], float,
                                  dict[str, float], float, float]:
    """Outcome probabilities, loss, errors and parity from mode counts."""
    n_a, n_b = int(c_a.sum()), int(c_b.sum())
    f_a, f_b = c_a / n_a, c_b / n_b

    def se(f, n):
        return np.sqrt(np.clip(f * (1 - f), 0, None) / n)

    se_a, se_b = se(f_a, n_a), se(f_b, n_b)
    # pattern order per mode: pp, pa, ap, aa.  In mode A (blow |1>) pa reads
    # 01 and ap reads 10; in mode B (blow |0>) the attributions swap.
    cells = {
        "00": f_a[0],
        "01": 0.5 * (f_a[1] + f_b[2]),
        "10": 0.5 * (f_a[2] + f_b[1]),
        "11": f_b[0],
    }
    errs = {
        "00": se_a[0],
        "01": 0.5 * math.hypot(se_a[1], se_b[2]),
        "10": 0.5 * math.hypot(se_a[2], se_b[1]),
        "11": se_b[0],
    }
    loss = 1.0 - sum(cells.values())
    parity = float(_W_PARITY @ f_a + _W_PARITY @ f_b)

    def par_var(f, n):
        mean = float(_W_PARITY @ f)
        return (float(_W_PARITY ** 2 @ f) - mean * mean) / n

    parity_se = math.sqrt(par_var(f_a, n_a) + par_var(f_b, n_b))
    return cells, loss, errs, parity, parity_se


@dataclass
class TruthTable:
    """Measured outcome probabilities over computational inputs.

    probs holds the detector-level estimates: the 00 and 11 columns come
    from both-present patterns and carry the two-atom background survival,
    the 01 and 10 columns from single-present patterns and carry one
    atom's.  background_corrected() divides each column by its own
    retention exposure, which is why the raw/corrected fidelity pair is
    related through the two-atom retention exactly as in the lab
    bookkeeping (raw = corrected x retention).
    """

    inputs: tuple[str, ...]
    probs: np.ndarray                    # (n_inputs, 4), columns 00 01 10 11
    loss: np.ndarray                     # (n_inputs,)
    errors: np.ndarray                   # (n_inputs, 4)
    shots_per_mode: int

    def background_corrected(self, p_bg_single: float) -> "TruthTable":
        """Divide every cell by the survival its estimator was exposed to."""
        if not 0.0 < p_bg_single <= 1.0:
            raise ValueError("single-atom retention must be in (0, 1]")
        factors = np.array([p_bg_single ** 2, p_bg_single, p_bg_single,
                            p_bg_single ** 2])
        probs = np.clip(self.probs / factors, 0.0, 1.0)
        errors = self.errors / factors
        loss = np.clip(1.0 - probs.sum(axis=1), 0.0, None)
        return TruthTable(inputs=self.inputs, probs=probs, loss=loss,
                          errors=errors, shots_per_mode=self.shots_per_mode)


def truth_table(shots_per_input: int, params: PhysicalParams,
                trap: TrapConfig, model: BlockadeModel | None,
                cfg: NoiseConfig, pulses: list[PulseSpec] | None = None,
                seed: int = 0, workers: int = 1,
                label: str = "truth") -> TruthTable:
    """Measure the CNOT (or a custom sequence) over all four inputs.

    shots_per_input is split 50/50 between the two readout modes; both are
    needed to resolve all four outcomes.  Passing an empty pulse list
    measures state preparation itself.
    """
    if shots_per_input < 1:
        raise ValueError("need at least one shot per input")
    if pulses is None:
        pulses = cnot_sequence(params)
    per_mode = max(1, shots_per_input // 2)
    jobs = {}
    for lab in INPUT_LABELS:
        for mode in (ReadoutMode.BLOW_ONE, ReadoutMode.BLOW_ZERO):
            key = f"{label}:{lab}:m{int(mode)}"
            jobs[key] = (pulses, lab, mode, params, trap, model, cfg)
    counts = _run_experiments(jobs, per_mode, seed, workers)

    probs = np.zeros((4, 4))
    loss = np.zeros(4)
    errors = np.zeros((4, 4))
    for i, lab in enumerate(INPUT_LABELS):
        c_a = counts[f"{label}:{lab}:m{int(ReadoutMode.BLOW_ONE)}"]
        c_b = counts[f"{label}:{lab}:m{int(ReadoutMode.BLOW_ZERO)}"]
        cells, row_loss, errs, _, _ = _cells_from_counts(c_a, c_b)
        for j, out in enumerate(INPUT_LABELS):
            probs[i, j] = cells[out]
            errors[i, j] = errs[out]
        loss[i] = row_loss
    return TruthTable(inputs=INPUT_LABELS, probs=probs, loss=loss,
                      errors=errors, shots_per_mode=per_mode)


@dataclass
class BellResult:
    """Joint populations after Bell-state preparation."""

    target_input: AtomLevel
    populations: dict[str, float]
    errors: dict[str, float]
    loss: float
    shots_per_mode: int

    def pop_sum(self, *labels: str) -> float:
        return sum(self.populations[lab] for lab in labels)


def bell_experiment(target_input: AtomLevel, shots: int,
                    params: PhysicalParams, trap: TrapConfig,
                    model: BlockadeModel | None, cfg: NoiseConfig,
                    seed: int = 0, workers: int = 1,
                    label: str = "bell") -> BellResult:
    """Populations of the entangled state prepared by pi/2 + CNOT."""
    pulses = bell_prep_sequence(params, target_input)
    input_label = "1" + str(int(target_input))
    per_mode = max(1, shots // 2)
    jobs = {}
    for mode in (ReadoutMode.BLOW_ONE, ReadoutMode.BLOW_ZERO):
        key = f"{label}:t{int(target_input)}:m{int(mode)}"
        jobs[key] = (pulses, input_label, mode, params, trap, model, cfg)
    counts = _run_experiments(jobs, per_mode, seed, workers)
    c_a = counts[f"{label}:t{int(target_input)}:m0"]
    c_b = counts[f"{label}:t{int(target_input)}:m1"]
    cells, loss, errs, _, _ = _cells_from_counts(c_a, c_b)
    return BellResult(target_input=target_input, populations=cells,
                      errors=errs, loss=loss, shots_per_mode=per_mode)


@dataclass
class ParityCurve:
    """Parity P00+P11-P01-P10 versus analysis-pulse gap."""

    gaps: np.ndarray
    parity: np.ndarray
    errors: np.ndarray
    shots_per_mode: int


def parity_scan(gaps, shots_per_gap: int, params: PhysicalParams,
                trap: TrapConfig, model: BlockadeModel | None,
                cfg: NoiseConfig, target_input: AtomLevel = AtomLevel.G1,
                seed: int = 0, workers: int = 1,
                label: str = "parity") -> ParityCurve:
    """Bell preparation followed by analysis pulses at each gap."""
    gaps = np.asarray(list(gaps), dtype=float)
    input_label = "1" + str(int(target_input))
    per_mode = max(1, shots_per_gap // 2)
    jobs = {}
    for gi, gap in enumerate(gaps):
        pulses = (bell_prep_sequence(params, target_input)
                  + parity_analysis_pulses(params, float(gap)))
        for mode in (ReadoutMode.BLOW_ONE, ReadoutMode.BLOW_ZERO):
            jobs[f"{label}:g{gi}:m{int(mode)}"] = (
                pulses, input_label, mode, params, trap, model, cfg)
    counts = _run_experiments(jobs, per_mode, seed, workers)
    parity = np.zeros(len(gaps))
    errors = np.zeros(len(gaps))
    for gi in range(len(gaps)):
        _, _, _, p, p_se = _cells_from_counts(
            counts[f"{label}:g{gi}:m0"], counts[f"{label}:g{gi}:m1"])
        parity[gi] = p
        errors[gi] = p_se
    return ParityCurve(gaps=gaps, parity=parity, errors=errors,
                       shots_per_mode=per_mode)


@dataclass
class RabiCurve:
    """Present-state probability of each site versus drive duration."""

    durations: np.ndarray
    targeted: np.ndarray
    neighbor: np.ndarray
    targeted_err: np.ndarray
    neighbor_err: np.ndarray
    shots: int


def rabi_experiment(transition: Transition, atom: int, durations,
                    shots_per_duration: int, params: PhysicalParams,
                    trap: TrapConfig, model: BlockadeModel | None,
                    cfg: NoiseConfig, neighbor_blocked: bool = False,
                    seed: int = 0, workers: int = 1,
                    label: str = "rabi") -> RabiCurve:
    """Rabi flopping of one site, watching the neighbor's crosstalk.

    Both atoms start in |1> and are read out with |0> blown away, so
    "present" tracks the |1> population directly (a Rydberg atom is
    anti-trapped and also reads absent).
    """
    durations = np.asarray(list(durations), dtype=float)
    sequences = rabi_scan(params, transition, atom, list(durations),
                          neighbor_blocked=neighbor_blocked)
    jobs = {}
    for di, pulses in enumerate(sequences):
        jobs[f"{label}:d{di}"] = (pulses, "11", ReadoutMode.BLOW_ZERO,
                                  params, trap, model, cfg)
    counts = _run_experiments(jobs, shots_per_duration, seed, workers)
    n = len(durations)
    targeted = np.zeros(n)
    neigh = np.zeros(n)
    t_err = np.zeros(n)
    n_err = np.zeros(n)
    for di in range(n):
        c = counts[f"{label}:d{di}"]
        total = c.sum()
        p_ctrl = (c[0] + c[1]) / total     # control read present
        p_tgt = (c[0] + c[2]) / total
        site = (p_ctrl, p_tgt)
        err = tuple(math.sqrt(max(p * (1 - p), 0.0) / total) for p in site)
        targeted[di] = site[atom]
        neigh[di] = site[1 - atom]
        t_err[di] = err[atom]
        n_err[di] = err[1 - atom]
    return RabiCurve(durations=durations, targeted=targeted, neighbor=neigh,
                     targeted_err=t_err, neighbor_err=n_err,
                     shots=int(shots_per_duration))


def simulate_sequence(input_label: str, pulses: list[PulseSpec],
                      params: PhysicalParams, cfg: NoiseConfig,
                      blockade: float | None = None,
                      dets: tuple[float, float] = (0.0, 0.0)
                      ) -> TwoAtomState:
    """Deterministic propagation with all stochastic channels quiet.

    The workhorse for noiseless oracles: exact output amplitudes for a
    given blockade shift and fixed per-atom Doppler detunings.
    """
    comp = compile_sequence(pulses, params, cfg)
    blk = blockade if blockade is not None else _ideal_blockade(params, cfg)
    quiet = cfg.disabled("se")
    psi, _ = _execute(comp, (int(input_label[0]), int(input_label[1])), blk,
                      dets, (False, False), (False, False), quiet,
                      np.random.default_rng(0))
    return TwoAtomState(psi)
