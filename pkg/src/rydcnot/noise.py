"""Analytic error formulas and stochastic noise channels.

Covers the intrinsic controlled-phase error, motional (Doppler) dephasing
of the Rydberg interrogation, the differential light-shift phase between
|00> and |11>, spontaneous emission from the intermediate state, trap-loss
channels, and the quadrature error budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

from .qcore import TwoAtomState
from .sequence import PhysicalParams, PulseSpec, Transition

K_B = constants.Boltzmann

# Rydberg pulse area of one CNOT (pi + 2pi + pi); the spontaneous-emission
# rate is calibrated against the interrogation time this area implies.
CNOT_RYDBERG_AREA = 4.0 * math.pi


@dataclass(frozen=True)
class NoiseConfig:
    """Noise-channel switches and strengths.

    temperature drives the velocity sampling (Doppler detunings and the
    stochastic interrogation phase); position sampling uses the trap
    configuration's own temperature.  p_bg_single is the per-atom
    probability of SURVIVING the background-collision window between
    preparation and readout; loss_before_frac says which fraction of the
    losses happen early enough to disturb the gate rather than only the
    readout.  p_pump_err is per atom; a mis-pumped atom starts in |1> and
    does not Rydberg-couple.
    """

    temperature: float = 175e-6
    p_bg_single: float = 0.90
    p_pump_err: float = 0.01
    p_se_total: float = 0.04
    loss_before_frac: float = 0.1
    se_branch_p0: float = 0.5
    doppler_axis: int = 2
    enable_doppler: bool = True
    enable_loss: bool = True
    enable_pumping: bool = True
    enable_se: bool = True
    enable_ac_stark: bool = True
    enable_thermal_blockade: bool = True
    fixed_blockade: float | None = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        for name in ("p_bg_single", "p_pump_err", "p_se_total",
                     "loss_before_frac", "se_branch_p0"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1]")
        if self.doppler_axis not in (0, 1, 2):
            raise ValueError("doppler_axis must be 0, 1 or 2")

    @classmethod
    def noiseless(cls) -> "NoiseConfig":
        """Every channel off; the blockade defaults to the ideal limit."""
        return cls(temperature=0.0, p_bg_single=1.0, p_pump_err=0.0,
                   p_se_total=0.0, enable_doppler=False, enable_loss=False,
                   enable_pumping=False, enable_se=False,
                   enable_ac_stark=False, enable_thermal_blockade=False)

    def disabled(self, *channels: str) -> "NoiseConfig":
        """Copy with the named channels switched off."""
        return replace(self, **{f"enable_{c}": False for c in channels})


def intrinsic_gate_error(omega: float, tau: float, blockade: float,
                         omega_10: float) -> float:
    """Intrinsic controlled-phase error for square-pulse blockade gates.

    E = (7 pi / 4 Omega tau) (1 + Omega^2/omega_10^2 + Omega^2/(7 B^2))
        + (Omega^2 / 8 B^2) (1 + 6 B^2/omega_10^2)

    The first group is the finite-lifetime cost of the interrogation, the
    second the blockade leakage; all arguments in rad/s except tau in s.
    """
    if omega <= 0 or tau <= 0 or blockade <= 0 or omega_10 <= 0:
        raise ValueError("all arguments must be positive")
    o2 = omega * omega
    b2 = blockade * blockade
    w2 = omega_10 * omega_10
    lifetime = (7 * math.pi / (4 * omega * tau)) * (1 + o2 / w2 + o2 / (7 * b2))
    leakage = (o2 / (8 * b2)) * (1 + 6 * b2 / w2)
    return lifetime + leakage


def doppler_k_eff(params: PhysicalParams) -> float:
    """Two-photon momentum mismatch |k| = 2 pi (1/lambda_480 - 1/lambda_780)."""
    return 2 * math.pi * (1 / params.lambda_480 - 1 / params.lambda_780)


def doppler_phase(velocity: float, t_gap: float,
                  params: PhysicalParams) -> float:
    """Stochastic phase k_eff * v * t picked up by a moving Rydberg atom."""
    return doppler_k_eff(params) * velocity * t_gap


def dephasing_factor(temperature: float, t_gap: float,
                     params: PhysicalParams) -> float:
    """Thermal average <e^{i phi}> of the motional interrogation phase.

    For a 1-D Maxwell-Boltzmann velocity distribution the average is
    Gaussian: exp(-k_eff^2 (k_B T / m) t^2 / 2).
    """
    if temperature < 0 or t_gap < 0:
        raise ValueError("temperature and gap must be non-negative")
    k = doppler_k_eff(params)
    return math.exp(-0.5 * k * k * (K_B * temperature / params.mass)
                    * t_gap * t_gap)


def max_fidelity_from_dephasing(factor: float) -> float:
    """Bell fidelity when the stochastic phase is the only error.

    Perfect populations contribute 1/2 and the surviving coherence
    factor/2, so F = (1 + factor)/2: fully dephased sits exactly at the
    0.5 entanglement threshold.
    """
    if not 0.0 <= factor <= 1.0:
        raise ValueError("dephasing factor must lie in [0, 1]")
    return 0.5 * (1.0 + factor)


def ac_stark_phase(params: PhysicalParams) -> float:
    """Differential light-shift phase between |00> and |11> over one CNOT.

    xi = -2 pi (Omega_780/Omega_480) (omega_10 / Delta_f1), accumulated by
    the undriven qubit-0 level across the three Rydberg pulses.
    """
    if params.delta_f1 == 0:
        raise ZeroDivisionError("delta_f1 vanishes; phase is singular")
    return (-2 * math.pi * (params.omega_780 / params.omega_480)
            * (params.omega_10 / params.delta_f1))


def se_rate(params: PhysicalParams, cfg: NoiseConfig) -> float:
    """Scattering rate (1/s) calibrated so one CNOT spends cfg.p_se_total.

    The CNOT drives 4 pi of Rydberg pulse area, one atom at a time, so the
    budget divides by the implied total drive time 4 pi / Omega.
    """
    return cfg.p_se_total * params.omega_ryd / CNOT_RYDBERG_AREA


def spontaneous_emission_prob(params: PhysicalParams, pulse: PulseSpec,
                              cfg: NoiseConfig) -> float:
    """Per-atom scattering probability for one Rydberg pulse.

    Linear in the pulse duration.  When the event fires in a shot the atom
    is depolarized: reset to |0> or |1> with probability se_branch_p0 /
    1 - se_branch_p0 and its coherence with the partner destroyed.
    """
    if pulse.transition is not Transition.RYDBERG:
        raise ValueError("spontaneous emission applies to Rydberg pulses")
    return se_rate(params, cfg) * pulse.duration(params)


def apply_losses(state: TwoAtomState, cfg: NoiseConfig,
                 rng: np.random.Generator) -> TwoAtomState:
    """Flag each atom lost with probability 1 - p_bg_single, independently.

    Background collisions do not care about the gate, so this is drawn
    once per shot.
    """
    lost = tuple(bool(rng.random() > cfg.p_bg_single) for _ in range(2))
    if lost == (False, False):
        return state
    return TwoAtomState(state.amps.copy(),
                        (state.lost[0] or lost[0], state.lost[1] or lost[1]))


BUDGET_FIELDS = ("optical_pumping", "atom_loss_before_pulses",
                 "blockade_error", "spontaneous_emission",
                 "doppler_broadening")


@dataclass(frozen=True)
class ErrorBudget:
    """Named two-qubit error contributions and their quadrature total."""

    optical_pumping: float
    atom_loss_before_pulses: float
    blockade_error: float
    spontaneous_emission: float
    doppler_broadening: float

    @property
    def total(self) -> float:
        return math.sqrt(sum(getattr(self, f) ** 2 for f in BUDGET_FIELDS))

    def as_dict(self) -> dict[str, float]:
        d = {f: getattr(self, f) for f in BUDGET_FIELDS}
        d["total"] = self.total
        return d


def quadrature_budget(contributions: dict[str, float]) -> ErrorBudget:
    """Build an ErrorBudget from named probabilities (all in [0, 1])."""
    unknown = set(contributions) - set(BUDGET_FIELDS)
    if unknown:
        raise ValueError(f"unknown budget entries: {sorted(unknown)}")
    values = {f: float(contributions.get(f, 0.0)) for f in BUDGET_FIELDS}
    for name, v in values.items():
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be a probability in [0, 1]")
    return ErrorBudget(**values)
