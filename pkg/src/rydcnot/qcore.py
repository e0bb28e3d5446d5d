"""Exact state representation and unitary evolution for two three-level atoms.

Each atom lives in {qubit |0>, qubit |1>, Rydberg |r>}; the joint basis index
is 3*(control level) + (target level).  Pulses are square, so propagation is
done exactly by eigendecomposition of the 9x9 Hermitian generator.

Phase conventions (fixed so pulse sequences are reproducible bit for bit):

* ground drive: <0|H|1> = (omega/2) e^{i phase}, hence a pi/2 pulse at
  phase 0 maps |1> -> (|1> - i|0>)/sqrt(2) and a pi pulse maps |0> -> -i|1>;
* Rydberg drive: <1|H|r> = omega/2 (common phase reference, taken real);
* blockade enters as a diagonal energy on |rr>.

A "lost" atom (ejected from its trap) keeps frozen amplitudes: evolution
masks every matrix element that would change its level, and readout always
reports it absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import _kernel

DIM = 9

NORM_TOL = 1e-10
HERMITICITY_RTOL = 1e-12


class AtomLevel(IntEnum):
    """Single-atom levels: the two qubit states and the Rydberg state."""

    G0 = 0
    G1 = 1
    R = 2


class ReadoutMode(IntEnum):
    """Which hyperfine state the push-out light removes before imaging."""

    BLOW_ONE = 0   # |1> removed: an atom reads present iff it is in |0>
    BLOW_ZERO = 1  # |0> removed: present iff in |1>


class NonHermitianError(ValueError):
    """Raised when a propagation step receives a non-Hermitian generator."""


def joint_index(c: AtomLevel | int, t: AtomLevel | int) -> int:
    return 3 * int(c) + int(t)


@dataclass
class TwoAtomState:
    """Nine complex amplitudes plus per-atom trap-loss flags.

    Treated as an immutable value: operations return new instances.  When
    neither atom is lost the amplitudes stay normalized to 1e-10 through
    every pulse.
    """

    amps: np.ndarray
    lost: tuple[bool, bool] = (False, False)

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128).reshape(DIM)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def population(self, c: AtomLevel | int, t: AtomLevel | int) -> float:
        return float(np.abs(self.amps[joint_index(c, t)]) ** 2)

    def populations(self) -> np.ndarray:
        """All nine level populations, indexed by the joint basis."""
        return np.abs(self.amps) ** 2

    def copy(self) -> "TwoAtomState":
        return TwoAtomState(self.amps.copy(), self.lost)


def computational_state(c: AtomLevel, t: AtomLevel) -> TwoAtomState:
    """Product basis state |c t| with unit amplitude and no loss flags."""
    amps = np.zeros(DIM, dtype=np.complex128)
    amps[joint_index(c, t)] = 1.0
    return TwoAtomState(amps)


def product_state(control: np.ndarray, target: np.ndarray) -> TwoAtomState:
    """Tensor product of two normalized three-component atom states."""
    return TwoAtomState(np.kron(np.asarray(control, dtype=np.complex128),
                                np.asarray(target, dtype=np.complex128)))


def rydberg_hamiltonian(targets: tuple[float, float],
                        detunings: tuple[float, float] = (0.0, 0.0),
                        blockade: float = 0.0) -> np.ndarray:
    """Generator of a square 1<->r pulse, in rad/s.

    targets are the per-atom Rabi frequencies (>= 0); detunings sit on each
    atom's |r> projector and blockade on the |rr> projector.
    """
    om_c, om_t = targets
    if om_c < 0 or om_t < 0:
        raise ValueError("Rabi frequencies must be non-negative")
    return _kernel._rydberg_matrix(om_c, om_t, detunings[0], detunings[1],
                                   blockade, 0.0, 0.0)


def ground_hamiltonian(targets: tuple[float, float],
                       phases: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Generator of a square 0<->1 pulse with per-atom drive phases."""
    om_c, om_t = targets
    if om_c < 0 or om_t < 0:
        raise ValueError("Rabi frequencies must be non-negative")
    return _kernel._ground_matrix(om_c, om_t, phases[0], phases[1])


def _check_hermitian(h: np.ndarray):
    scale = max(float(np.max(np.abs(h))), 1.0)
    if float(np.max(np.abs(h - h.conj().T))) > HERMITICITY_RTOL * scale:
        raise NonHermitianError("evolution generator is not Hermitian")


def _mask_lost(h: np.ndarray, lost: tuple[bool, bool]) -> np.ndarray:
    """Zero every element that changes a lost atom's level.

    Residual diagonal phases on the lost atom's branches are unobservable
    (those branches never re-interfere once level changes are blocked).
    """
    h = h.copy()
    idx = np.arange(DIM)
    if lost[0]:
        ctrl = idx[:, None] // 3 != idx[None, :] // 3
        h[ctrl] = 0.0
    if lost[1]:
        tgt = idx[:, None] % 3 != idx[None, :] % 3
        h[tgt] = 0.0
    return h


def evolve(state: TwoAtomState, h: np.ndarray, t: float) -> TwoAtomState:
    """Return exp(-i h t) applied to the state.

    h must be Hermitian (checked to 1e-12 relative) and t non-negative.
    Lost atoms are untouched apart from unobservable phases.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    h = np.ascontiguousarray(h, dtype=np.complex128)
    _check_hermitian(h)
    if any(state.lost):
        h = _mask_lost(h, state.lost)
    out = np.empty(DIM, dtype=np.complex128)
    _kernel.expm_apply(h, t, state.amps, out)
    return TwoAtomState(out, state.lost)


_PRESENT_LEVEL = {ReadoutMode.BLOW_ONE: AtomLevel.G0,
                  ReadoutMode.BLOW_ZERO: AtomLevel.G1}


def outcome_probabilities(state: TwoAtomState,
                          mode: ReadoutMode) -> np.ndarray:
    """2x2 joint probabilities of (control, target) reading present.

    Population in the blown-away qubit state reads absent, Rydberg
    population reads absent (the atom is anti-trapped), and a lost atom is
    absent with certainty.  Index 0 = present, 1 = absent.
    """
    keep = int(_PRESENT_LEVEL[mode])
    pops = state.populations().reshape(3, 3)
    total = pops.sum()
    row_keep = pops[keep, :].sum()
    col_keep = pops[:, keep].sum()
    pp = pops[keep, keep]
    probs = np.array([[pp, row_keep - pp],
                      [col_keep - pp, total - row_keep - col_keep + pp]])
    if state.lost[0]:
        probs = np.vstack([np.zeros(2), probs.sum(axis=0)])
    if state.lost[1]:
        probs = np.column_stack([np.zeros(2), probs.sum(axis=1)])
    return probs


def measure(state: TwoAtomState, rng: np.random.Generator,
            mode: ReadoutMode = ReadoutMode.BLOW_ONE) -> tuple[bool, bool]:
    """Sample one joint present/absent readout outcome."""
    probs = outcome_probabilities(state, mode).reshape(4)
    total = probs.sum()
    if not np.isfinite(total) or total <= 0:
        raise ValueError("state has no probability mass to measure")
    u = rng.random() * total
    acc = 0.0
    k = 3
    for i in range(4):
        acc += probs[i]
        if u < acc:
            k = i
            break
    return (k // 2 == 0, k % 2 == 0)
