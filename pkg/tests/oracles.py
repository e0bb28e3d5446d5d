"""Independent reference computations for the tests.

Everything here is deliberately written without touching the package's
propagation path: a fixed-step integrator, closed-form two-level dynamics,
the analytic parity signal, and quadrature of the trap Boltzmann marginals.
"""

import math

import numpy as np
from scipy import integrate


def rk4_evolve(h, t, psi, dt=1e-9):
    """Fourth-order fixed-step integration of psi' = -i h psi."""
    steps = max(1, int(round(t / dt)))
    step = t / steps
    psi = np.asarray(psi, dtype=complex).copy()
    for _ in range(steps):
        k1 = -1j * (h @ psi)
        k2 = -1j * (h @ (psi + 0.5 * step * k1))
        k3 = -1j * (h @ (psi + 0.5 * step * k2))
        k4 = -1j * (h @ (psi + step * k3))
        psi = psi + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def two_level_population(omega, t):
    """Ground-state survival cos^2(omega t / 2) of a resonant drive."""
    return math.cos(0.5 * omega * t) ** 2


def parity_signal(abs_c1, xi, re_c2, phi):
    """P = 2 Re C2 - 2 |C1| cos(2 phi + xi)."""
    return 2 * re_c2 - 2 * abs_c1 * np.cos(2 * phi + xi)


def boltzmann_sigma_axial(trap):
    """Exact axial marginal std of the 3-D Boltzmann distribution."""
    beta_u = trap.depth / trap.temperature
    zr = trap.rayleigh_range
    w = trap.waist

    def z_weight(z):
        axial = 1.0 / (1.0 + (z / zr) ** 2)
        w2 = w * w / axial

        def rad(r):
            u_rel = 1.0 - axial * np.exp(-2 * r * r / w2)
            return 2 * math.pi * r * math.exp(-beta_u * u_rel)

        val, _ = integrate.quad(rad, 0.0, 8 * w, limit=200)
        return val

    z_max = 7.0 * zr * math.sqrt(0.5 / beta_u)
    zs = np.linspace(0.0, z_max, 400)
    dens = np.array([z_weight(z) for z in zs])
    norm = np.trapezoid(dens, zs)
    return math.sqrt(np.trapezoid(zs ** 2 * dens, zs) / norm)


def boltzmann_sigma_radial(trap):
    """Exact per-axis transverse std, sqrt(<r^2>/2)."""
    beta_u = trap.depth / trap.temperature
    zr = trap.rayleigh_range
    w = trap.waist

    def r_weight(r):
        def ax(z):
            axial = 1.0 / (1.0 + (z / zr) ** 2)
            w2 = w * w / axial
            return math.exp(-beta_u * (1.0 - axial
                                       * math.exp(-2 * r * r / w2)))

        val, _ = integrate.quad(ax, -6 * zr, 6 * zr, limit=200)
        return val

    r_max = 6.0 * 0.5 * w * math.sqrt(1.0 / beta_u)
    rs = np.linspace(0.0, r_max, 300)
    dens = np.array([r_weight(r) for r in rs]) * 2 * math.pi * rs
    norm = np.trapezoid(dens, rs)
    return math.sqrt(np.trapezoid(rs ** 2 * dens, rs) / norm / 2.0)
