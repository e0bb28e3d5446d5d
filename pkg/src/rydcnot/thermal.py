"""Thermal sampling in the Gaussian-beam dipole traps and the calibrated
van-der-Waals blockade model.

Atoms sit in two focused-beam traps separated along x.  Positions follow
the Boltzmann distribution in the full beam potential

    U(r, z) = -U0 / (1 + (z/z_R)^2) * exp(-2 r^2 / w(z)^2),
    w(z) = w sqrt(1 + (z/z_R)^2),

sampled by rejection against the harmonic-approximation Gaussian inflated
by 1.5x in every sigma.  The distribution is truncated to the cylinder
r <= 6 sigma_r, |z| <= 6 sigma_z (harmonic sigmas): the Boltzmann weight
there is below e^-10 of the peak for T/U <= 0.05, and inside the cylinder
the inflated Gaussian dominates the anharmonic tails, keeping the
rejection bound of order one.
Velocities are Maxwell-Boltzmann.  The two-atom blockade shift follows a
1/R^6 law whose prefactor is calibrated so the thermally averaged intrinsic
gate error matches the error at a chosen effective shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import constants

from .noise import intrinsic_gate_error
from .sequence import PhysicalParams

K_B = constants.Boltzmann

ENVELOPE_INFLATION = 1.5
BOX_SIGMA = 6.0
MAX_PROPOSALS_PER_SAMPLE = 1_000_000


class SamplingError(RuntimeError):
    """Rejection sampling failed; temperature is too close to trap depth."""


@dataclass(frozen=True)
class TrapConfig:
    """Dipole-trap geometry and atom temperature (SI units, depth in K)."""

    depth: float = 4.5e-3
    waist: float = 3.2e-6
    trap_wavelength: float = 1064e-9
    separation_x: float = 8.7e-6
    temperature: float = 175e-6

    def __post_init__(self):
        if min(self.depth, self.waist, self.trap_wavelength,
               self.separation_x) <= 0:
            raise ValueError("trap parameters must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.temperature >= self.depth:
            raise ValueError("temperature must be below the trap depth")

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist ** 2 / self.trap_wavelength

    @property
    def sigma_radial(self) -> float:
        """Harmonic-approximation transverse spread (w/2) sqrt(kT/U)."""
        return 0.5 * self.waist * math.sqrt(self.temperature / self.depth)

    @property
    def sigma_axial(self) -> float:
        """Harmonic-approximation axial spread z_R sqrt(kT/2U)."""
        return self.rayleigh_range * math.sqrt(
            0.5 * self.temperature / self.depth)


@dataclass(frozen=True)
class BlockadeModel:
    """Two-atom blockade shift b0 (r0/r)^6, van-der-Waals scaling."""

    b0: float
    r0: float

    def __post_init__(self):
        if self.b0 <= 0 or self.r0 <= 0:
            raise ValueError("blockade model parameters must be positive")

    def blockade(self, r) -> float | np.ndarray:
        return self.b0 * (self.r0 / r) ** 6


@dataclass(frozen=True)
class ThermalSample:
    """One shot's positions (m), velocities (m/s), separation and shift."""

    positions: np.ndarray    # (2, 3), relative to each trap center
    velocities: np.ndarray   # (2, 3)
    separation: float
    blockade: float


def sample_velocity(temperature: float, mass: float,
                    rng: np.random.Generator) -> np.ndarray:
    """One 3-vector with independent Gaussian components of variance kT/m."""
    return sample_velocities(temperature, mass, 1, rng)[0]


def sample_velocities(temperature: float, mass: float, n: int,
                      rng: np.random.Generator) -> np.ndarray:
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    sigma = math.sqrt(K_B * temperature / mass)
    return rng.normal(scale=sigma, size=(n, 3)) if sigma > 0 else \
        np.zeros((n, 3))


def _boltzmann_log_weight(trap: TrapConfig, x, y, z, temperature):
    """log of exp(-(U - U_min)/kT) in the full beam potential."""
    zr2 = trap.rayleigh_range ** 2
    axial = 1.0 / (1.0 + z * z / zr2)
    w2 = trap.waist ** 2 / axial
    u_rel = 1.0 - axial * np.exp(-2.0 * (x * x + y * y) / w2)  # (U-U_min)/U0
    return -u_rel * trap.depth / temperature


@lru_cache(maxsize=32)
def _envelope_log_bound(trap: TrapConfig, temperature: float) -> float:
    """log of the max target/proposal density ratio over the truncation box."""
    sr = 0.5 * trap.waist * math.sqrt(temperature / trap.depth)
    sz = trap.rayleigh_range * math.sqrt(0.5 * temperature / trap.depth)
    er, ez = ENVELOPE_INFLATION * sr, ENVELOPE_INFLATION * sz
    r = np.linspace(0, BOX_SIGMA * sr, 301)
    z = np.linspace(0, BOX_SIGMA * sz, 301)
    rr, zz = np.meshgrid(r, z, indexing="ij")
    log_ratio = (_boltzmann_log_weight(trap, rr, 0.0, zz, temperature)
                 + 0.5 * (rr / er) ** 2 + 0.5 * (zz / ez) ** 2)
    return float(log_ratio.max()) + math.log(1.05)


def sample_positions(trap: TrapConfig, n: int, rng: np.random.Generator,
                     temperature: float | None = None) -> np.ndarray:
    """n positions (m) drawn from the Boltzmann distribution in one trap."""
    T = trap.temperature if temperature is None else temperature
    if T <= 0:
        return np.zeros((n, 3))
    sr = 0.5 * trap.waist * math.sqrt(T / trap.depth)
    sz = trap.rayleigh_range * math.sqrt(0.5 * T / trap.depth)
    er, ez = ENVELOPE_INFLATION * sr, ENVELOPE_INFLATION * sz
    bound = _envelope_log_bound(trap, T)

    out = np.empty((n, 3))
    filled = 0
    proposals = 0
    budget = MAX_PROPOSALS_PER_SAMPLE * n
    accept_rate = 0.25  # refined after the first round
    while filled < n:
        m = max(128, int(1.2 * (n - filled) / accept_rate))
        m = min(m, budget - proposals)
        if m <= 0:
            raise SamplingError(
                "position rejection sampling exhausted its proposal budget; "
                "temperature is too close to the trap depth")
        proposals += m
        xyz = rng.normal(size=(m, 3)) * np.array([er, er, ez])
        inside = ((xyz[:, 0] ** 2 + xyz[:, 1] ** 2 < (BOX_SIGMA * sr) ** 2)
                  & (np.abs(xyz[:, 2]) < BOX_SIGMA * sz))
        log_t = _boltzmann_log_weight(trap, xyz[:, 0], xyz[:, 1], xyz[:, 2], T)
        log_q = -0.5 * ((xyz[:, 0] / er) ** 2 + (xyz[:, 1] / er) ** 2
                        + (xyz[:, 2] / ez) ** 2)
        accept = inside & (np.log(rng.random(m)) < log_t - log_q - bound)
        n_acc = int(accept.sum())
        accept_rate = max(n_acc / m, 0.01)
        take = min(n_acc, n - filled)
        out[filled:filled + take] = xyz[accept][:take]
        filled += take
    return out


def sample_position(trap: TrapConfig,
                    rng: np.random.Generator) -> np.ndarray:
    """One position sample (requires temperature below the trap depth)."""
    return sample_positions(trap, 1, rng)[0]


def pair_separations(trap: TrapConfig, pos_a: np.ndarray,
                     pos_b: np.ndarray) -> np.ndarray:
    """3-D distances between atoms in traps offset by separation_x."""
    delta = pos_a - pos_b
    delta[:, 0] += trap.separation_x
    return np.sqrt(np.sum(delta ** 2, axis=1))


@dataclass(frozen=True)
class SeparationDistribution:
    """Binned axial and 3-D separation statistics of sampled atom pairs."""

    axial_centers: np.ndarray
    axial_density: np.ndarray
    full_centers: np.ndarray
    full_density: np.ndarray
    axial_std: float
    mean_separation: float
    n: int

    def to_text(self, which: str = "axial") -> str:
        """Two-column text: bin center in micrometers, probability density."""
        if which == "axial":
            centers, dens = self.axial_centers, self.axial_density
        elif which == "full":
            centers, dens = self.full_centers, self.full_density
        else:
            raise ValueError("which must be 'axial' or 'full'")
        lines = ["# bin_center_um probability_density_per_um"]
        lines += [f"{c * 1e6} {d / 1e6}" for c, d in zip(centers, dens)]
        return "\n".join(lines) + "\n"


def separation_distribution(trap: TrapConfig, n: int,
                            rng: np.random.Generator,
                            bin_width: float = 0.25e-6
                            ) -> SeparationDistribution:
    """Sample n independent atom pairs and bin |z1-z2| and the 3-D distance."""
    if n < 1000:
        raise ValueError("need at least 1000 pairs for a stable histogram")
    pos_a = sample_positions(trap, n, rng)
    pos_b = sample_positions(trap, n, rng)
    dz = np.abs(pos_a[:, 2] - pos_b[:, 2])
    sep = pair_separations(trap, pos_a, pos_b)

    def hist(values):
        top = max(values.max(), bin_width)
        edges = np.arange(0.0, top + bin_width, bin_width)
        density, edges = np.histogram(values, bins=edges, density=True)
        return 0.5 * (edges[:-1] + edges[1:]), density

    zc, zd = hist(dz)
    sc, sd = hist(sep)
    return SeparationDistribution(
        axial_centers=zc, axial_density=zd, full_centers=sc, full_density=sd,
        axial_std=float(np.std(pos_a[:, 2] - pos_b[:, 2])),
        mean_separation=float(sep.mean()), n=n)


def mean_intrinsic_error(model: BlockadeModel, separations: np.ndarray,
                         params: PhysicalParams) -> float:
    """Thermal average of the intrinsic gate error over sampled separations.

    Each per-shot error is capped at 1 (it is a probability): the formula
    is perturbative and blows up for the rare far-separation samples with
    shift below the Rabi frequency.
    """
    shifts = np.asarray(model.blockade(np.asarray(separations)))
    o2 = params.omega_ryd ** 2
    w2 = params.omega_10 ** 2
    b2 = shifts ** 2
    errs = ((7 * math.pi / (4 * params.omega_ryd * params.tau_ryd))
            * (1 + o2 / w2 + o2 / (7 * b2))
            + (o2 / (8 * b2)) * (1 + 6 * b2 / w2))
    return float(np.minimum(errs, 1.0).mean())


def calibrate_blockade(trap: TrapConfig, params: PhysicalParams,
                       target_mean: float, n: int,
                       rng: np.random.Generator) -> BlockadeModel:
    """Fix the 1/R^6 prefactor by matching the thermal mean gate error.

    Chooses b0 (at reference r0 = separation_x) so that the average of the
    intrinsic gate error over n sampled two-atom separations equals the
    error evaluated at the single effective shift target_mean.  The
    average is strictly monotone in b0, so bisection has a unique root
    (relative tolerance 1e-3).
    """
    if target_mean <= 0:
        raise ValueError("target_mean must be positive")
    if trap.temperature == 0:
        seps = np.full(max(n, 1), trap.separation_x)
    else:
        pos_a = sample_positions(trap, n, rng)
        pos_b = sample_positions(trap, n, rng)
        seps = pair_separations(trap, pos_a, pos_b)
    target_error = intrinsic_gate_error(params.omega_ryd, params.tau_ryd,
                                        target_mean, params.omega_10)

    def mean_error(b0: float) -> float:
        return mean_intrinsic_error(BlockadeModel(b0, trap.separation_x),
                                    seps, params)

    lo, hi = target_mean * 1e-3, target_mean * 1e3
    if not (mean_error(lo) > target_error > mean_error(hi)):
        raise RuntimeError("calibration root is not bracketed")
    while hi / lo > 1 + 1e-3:
        mid = math.sqrt(lo * hi)
        if mean_error(mid) > target_error:
            lo = mid
        else:
            hi = mid
    return BlockadeModel(b0=math.sqrt(lo * hi), r0=trap.separation_x)


def double_excitation_prob(omega: float, blockade: float) -> float:
    """Leading-order blockade leakage Omega^2 / (2 B^2)."""
    if blockade <= 0:
        raise ValueError("blockade must be positive")
    return omega * omega / (2.0 * blockade * blockade)


def draw_shot_samples(trap: TrapConfig, model: BlockadeModel, mass: float,
                      n: int, rng: np.random.Generator,
                      velocity_temperature: float | None = None
                      ) -> list[ThermalSample]:
    """n per-shot draws of positions, velocities, separation and shift.

    Positions use the trap temperature; velocities use
    velocity_temperature when given (both are the atom temperature in a
    real run).  Sampled once per shot: the sequence is far shorter than a
    trap oscillation period.
    """
    v_temp = trap.temperature if velocity_temperature is None \
        else velocity_temperature
    pos_a = sample_positions(trap, n, rng)
    pos_b = sample_positions(trap, n, rng)
    vel_a = sample_velocities(v_temp, mass, n, rng)
    vel_b = sample_velocities(v_temp, mass, n, rng)
    seps = pair_separations(trap, pos_a, pos_b)
    shifts = model.blockade(seps)
    return [ThermalSample(positions=np.array([pos_a[i], pos_b[i]]),
                          velocities=np.array([vel_a[i], vel_b[i]]),
                          separation=float(seps[i]),
                          blockade=float(shifts[i]))
            for i in range(n)]


def draw_shot_sample(trap: TrapConfig, model: BlockadeModel, mass: float,
                     rng: np.random.Generator,
                     velocity_temperature: float | None = None
                     ) -> ThermalSample:
    """One per-shot thermal draw."""
    return draw_shot_samples(trap, model, mass, 1, rng,
                             velocity_temperature)[0]
