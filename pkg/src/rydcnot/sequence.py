"""Pulse-sequence construction: the five-pulse H-Cz CNOT, Bell-state
preparation, parity analysis pulses, and Rabi-flopping scans.

The CNOT is: ground pi/2 on the target, Rydberg pi on the control, Rydberg
2pi on the target, Rydberg pi on the control, ground pi/2 on the target
pi out of phase with the first.  With that phase choice the target flips
when the control is in |0> (the state that is never Rydberg-excited), so
the truth table has its large off-diagonal entries in the 00/01 block.

Timing: the configured Rydberg interrogation gap ``t24`` is the interval
over which a Rydberg-excited control atom accumulates its motional phase.
The two inter-pulse waits are sized so that wait time plus the effective
in-pulse residence (half of each control pi pulse) equals exactly ``t24``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import constants

from .qcore import AtomLevel

RB87_MASS = 86.909180527 * constants.atomic_mass  # kg

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalParams:
    """Laser and atom constants, SI units (angular frequencies in rad/s).

    Defaults are the experimental operating point this model targets.
    """

    omega_ryd: float = TWO_PI * 0.81e6       # two-photon 1<->r Rabi frequency
    omega_g: float = math.pi / 900e-9        # ground Raman Rabi (pi in 900 ns)
    omega_10: float = TWO_PI * 6.83e9        # qubit splitting
    tau_ryd: float = 300e-6                  # Rydberg radiative lifetime, s
    omega_780: float = TWO_PI * 118e6        # one-photon Rabi, lower leg
    omega_480: float = TWO_PI * 39e6         # one-photon Rabi, upper leg
    delta_f2: float = -TWO_PI * 2e9          # intermediate detuning from f=2
    lambda_780: float = 780e-9
    lambda_480: float = 480e-9
    lambda_trap: float = 1064e-9
    omega_ac: float = TWO_PI * 0.125e6       # analysis-pulse Stark phase rate
    mass: float = RB87_MASS
    gamma_5p: float = TWO_PI * 6.07e6        # intermediate-state linewidth
    t24: float = 2.2e-6                      # Rydberg interrogation gap, s
    crosstalk_ratio: float = 0.02            # neighbor-site Rabi fraction
                                             # (placeholder, not measured)

    def __post_init__(self):
        for name in ("omega_ryd", "omega_g", "omega_10", "tau_ryd",
                     "omega_780", "omega_480", "lambda_780", "lambda_480",
                     "lambda_trap", "omega_ac", "mass", "gamma_5p", "t24"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.crosstalk_ratio < 1:
            raise ValueError("crosstalk_ratio must be in [0, 1)")

    @property
    def delta_f1(self) -> float:
        """Intermediate detuning from f=1, always derived."""
        return self.delta_f2 - self.omega_10


class Transition(Enum):
    GROUND = "ground"
    RYDBERG = "rydberg"


@dataclass(frozen=True)
class PulseSpec:
    """One square pulse (or bare wait) of a sequence.

    targets holds the per-atom drive amplitude as a fraction of the base
    Rabi frequency (1 = addressed, 0 = untouched, in between = crosstalk).
    area is the pulse area seen by a unit-fraction atom; the duration is
    always derived from it.  stark_frac is the fraction of the sequence's
    total differential light-shift phase deposited on each atom's |0>
    level during this pulse.  Rydberg pulses are Doppler sensitive (the
    drive imprints the two-photon momentum), ground Raman pulses are not.
    """

    transition: Transition
    targets: tuple[float, float]
    area: float
    phases: tuple[float, float] = (0.0, 0.0)
    pre_gap: float = 0.0
    doppler_sensitive: bool = False
    stark_frac: tuple[float, float] = (0.0, 0.0)
    label: str = ""

    def base_rabi(self, params: PhysicalParams) -> float:
        if self.transition is Transition.RYDBERG:
            return params.omega_ryd
        return params.omega_g

    def duration(self, params: PhysicalParams) -> float:
        """Pulse length in seconds; exactly area / base Rabi frequency."""
        if self.area == 0.0:
            return 0.0
        return self.area / self.base_rabi(params)


def _wait(gap: float) -> PulseSpec:
    return PulseSpec(Transition.GROUND, (0.0, 0.0), 0.0, pre_gap=gap,
                     label="wait")


def cnot_sequence(params: PhysicalParams) -> list[PulseSpec]:
    """The five-pulse controlled-NOT.

    Pulses 1 and 5 are ground pi/2 rotations of the target, pi out of
    phase; pulses 2 and 4 are Rydberg pi pulses on the control; pulse 3 is
    a Rydberg 2pi pulse on the target.  The waits before pulses 3 and 4
    realize the configured interrogation gap t24 (see module docstring);
    they require t24 > the Rydberg pi time.

    The differential light-shift phase is booked entirely on the control
    atom's pi pulses: a phase on the target between its two pi/2 rotations
    would rotate populations, and the measured truth table shows the
    experiment's phase reference absorbs that share.
    """
    t_pi = math.pi / params.omega_ryd
    wait_total = params.t24 - t_pi
    if wait_total < 0:
        raise ValueError(
            "t24 is shorter than one Rydberg pi pulse; no wait schedule can "
            "realize the requested interrogation gap")
    w = wait_total / 2.0
    return [
        PulseSpec(Transition.GROUND, (0.0, 1.0), math.pi / 2,
                  phases=(0.0, 0.0), label="ground_pi2_target"),
        PulseSpec(Transition.RYDBERG, (1.0, 0.0), math.pi,
                  doppler_sensitive=True, stark_frac=(0.5, 0.0),
                  label="rydberg_pi_control"),
        PulseSpec(Transition.RYDBERG, (0.0, 1.0), 2 * math.pi, pre_gap=w,
                  doppler_sensitive=True, label="rydberg_2pi_target"),
        PulseSpec(Transition.RYDBERG, (1.0, 0.0), math.pi, pre_gap=w,
                  doppler_sensitive=True, stark_frac=(0.5, 0.0),
                  label="rydberg_pi_control"),
        PulseSpec(Transition.GROUND, (0.0, 1.0), math.pi / 2,
                  phases=(0.0, math.pi), label="ground_pi2_target"),
    ]


def bell_prep_sequence(params: PhysicalParams,
                       target_input: AtomLevel = AtomLevel.G1
                       ) -> list[PulseSpec]:
    """Control-atom pi/2 followed by the CNOT.

    Starting from the optically pumped |1 t> with t = target_input, the
    noiseless output is (|00> + |11>)/sqrt(2) for t = |1> and
    (|01> + |10>)/sqrt(2) for t = |0>, up to single-qubit phases.
    """
    if target_input not in (AtomLevel.G0, AtomLevel.G1):
        raise ValueError("target input must be a qubit state")
    prep = PulseSpec(Transition.GROUND, (1.0, 0.0), math.pi / 2,
                     phases=(0.0, 0.0), label="ground_pi2_control")
    return [prep, *cnot_sequence(params)]


def parity_analysis_pulses(params: PhysicalParams,
                           gap: float) -> list[PulseSpec]:
    """Wait for ``gap`` then drive simultaneous pi/2 pulses on both atoms.

    The drive phase tracks the ground-beam Stark shift, phi = omega_ac*gap,
    so scanning the gap scans the analysis phase.
    """
    if gap < 0:
        raise ValueError("gap must be non-negative")
    phi = params.omega_ac * gap
    return [PulseSpec(Transition.GROUND, (1.0, 1.0), math.pi / 2,
                      phases=(phi, phi), pre_gap=gap,
                      label="parity_analysis")]


def rabi_scan(params: PhysicalParams, transition: Transition,
              atom: int, durations: list[float],
              neighbor_blocked: bool = False) -> list[list[PulseSpec]]:
    """One sequence per scan duration, driving ``atom`` (0 = control).

    The untargeted site always sees crosstalk_ratio times the drive.  With
    neighbor_blocked a Rydberg pi pulse excites the neighbor first, so the
    scanned site's flopping is suppressed by the blockade.
    """
    if any(d < 0 for d in durations):
        raise ValueError("durations must be non-negative")
    if atom not in (0, 1):
        raise ValueError("atom must be 0 (control site) or 1 (target site)")
    other = 1 - atom
    ratio = params.crosstalk_ratio

    def scales(addressed: int) -> tuple[float, float]:
        s = [ratio, ratio]
        s[addressed] = 1.0
        return (s[0], s[1])

    base = (params.omega_ryd if transition is Transition.RYDBERG
            else params.omega_g)
    sequences = []
    for d in durations:
        seq = []
        if neighbor_blocked:
            seq.append(PulseSpec(Transition.RYDBERG, scales(other), math.pi,
                                 doppler_sensitive=True,
                                 label="block_neighbor"))
        seq.append(PulseSpec(transition, scales(atom), base * d,
                             doppler_sensitive=(transition is
                                                Transition.RYDBERG),
                             label="scan_pulse"))
        sequences.append(seq)
    return sequences


def total_rydberg_area(pulses: list[PulseSpec]) -> float:
    """Summed area of the Rydberg pulses (4*pi for the CNOT)."""
    return sum(p.area for p in pulses if p.transition is Transition.RYDBERG)


CNOT_PERMUTATION = {"00": "01", "01": "00", "10": "10", "11": "11"}

INPUT_LABELS = ("00", "01", "10", "11")


def ideal_cnot_table() -> np.ndarray:
    """4x4 permutation matrix, rows = inputs, columns = outputs."""
    table = np.zeros((4, 4))
    for i, lab in enumerate(INPUT_LABELS):
        table[i, INPUT_LABELS.index(CNOT_PERMUTATION[lab])] = 1.0
    return table


def label_to_levels(label: str) -> tuple[AtomLevel, AtomLevel]:
    if label not in INPUT_LABELS:
        raise ValueError(f"unknown computational label {label!r}")
    return (AtomLevel(int(label[0])), AtomLevel(int(label[1])))
