"""Estimation layer: parity-curve fitting, coherence extraction, fidelity
formulas and loss corrections.

The parity signal after the analysis pulses varies as

    P(t) = 2 Re(C2) - 2 |C1| cos(2 w t + xi),

where C2 is the 01/10 coherence and C1 = |C1| e^{i xi} the 00/11
coherence.  fit_parity recovers (Re C2, |C1|, xi, w) by a frequency grid
search with a linear solve at each grid point, followed by Gauss-Newton
refinement; the sign degeneracy is resolved by |C1| >= 0 and xi in
[0, 2 pi).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

GRID_POINTS = 200
GRID_SPAN = 0.2
GN_TOL = 1e-8
GN_MAX_ITER = 100


class FitError(RuntimeError):
    """Gauss-Newton refinement failed; carries the best grid solution."""

    def __init__(self, message: str, best: "ParityFit | RabiFit | None"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class ParityFit:
    """Fitted parity-oscillation parameters.

    re_c2 and abs_c1 are bounded by 0.5 for any physical two-qubit state;
    noisy fits may exceed that slightly (a warning is emitted past 0.55).
    """

    re_c2: float
    abs_c1: float
    xi: float                         # radians, [0, 2 pi)
    omega_fit: float                  # rad/s; the signal oscillates at 2w
    covariance: np.ndarray            # 4x4, order (re_c2, abs_c1, xi, omega)
    residual_rms: float

    def __post_init__(self):
        if self.abs_c1 < 0:
            raise ValueError("abs_c1 must be non-negative")
        if self.abs_c1 > 0.55 or abs(self.re_c2) > 0.55:
            warnings.warn("fitted coherence exceeds the physical bound 0.5")


@dataclass(frozen=True)
class RabiFit:
    """Fitted flopping curve p(t) = offset + amplitude * cos(w t + phase)."""

    offset: float
    amplitude: float
    phase: float
    omega_fit: float
    residual_rms: float

    @property
    def pi_time(self) -> float:
        return math.pi / self.omega_fit

    @property
    def peak_to_peak(self) -> float:
        return 2.0 * abs(self.amplitude)


def _weights(errors, n) -> np.ndarray:
    if errors is None:
        return np.ones(n)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return np.ones(n)
    return 1.0 / errors


def _harmonic_fit(t, y, w, omega_nominal, harmonic):
    """Grid + Gauss-Newton fit of y = b0 + b1 cos(k w t) + b2 sin(k w t).

    Returns (beta, omega, covariance of (b0, b1, b2, omega), rms, ok).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    k = harmonic

    def design(om):
        return np.column_stack([np.ones_like(t), np.cos(k * om * t),
                                np.sin(k * om * t)])

    def linear_solve(om):
        x = design(om) * w[:, None]
        beta, *_ = np.linalg.lstsq(x, y * w, rcond=None)
        resid = (design(om) @ beta - y) * w
        return beta, float(resid @ resid)

    grid = omega_nominal * np.linspace(1 - GRID_SPAN, 1 + GRID_SPAN,
                                       GRID_POINTS)
    costs = [linear_solve(om)[1] for om in grid]
    omega = grid[int(np.argmin(costs))]
    beta, _ = linear_solve(omega)

    theta = np.array([beta[0], beta[1], beta[2], omega])
    scale = np.array([1.0, 1.0, 1.0, omega_nominal])
    ok = False
    for _ in range(GN_MAX_ITER):
        b0, b1, b2, om = theta
        c = np.cos(k * om * t)
        s = np.sin(k * om * t)
        model = b0 + b1 * c + b2 * s
        jac = np.column_stack([np.ones_like(t), c, s,
                               k * t * (-b1 * s + b2 * c)])
        r = (y - model) * w
        jw = jac * w[:, None]
        jtj = jw.T @ jw
        try:
            delta = np.linalg.solve(jtj, jw.T @ r)
        except np.linalg.LinAlgError:
            break
        theta = theta + delta
        if np.max(np.abs(delta) / scale) < GN_TOL:
            ok = True
            break

    b0, b1, b2, om = theta
    c = np.cos(k * om * t)
    s = np.sin(k * om * t)
    model = b0 + b1 * c + b2 * s
    resid = y - model
    rms = float(np.sqrt(np.mean(resid ** 2)))
    jac = np.column_stack([np.ones_like(t), c, s,
                           k * t * (-b1 * s + b2 * c)])
    jw = jac * w[:, None]
    jtj = jw.T @ jw
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.full((4, 4), np.nan)
    if np.allclose(w, 1.0) and len(t) > 4:
        cov = cov * (resid @ resid) / (len(t) - 4)
    return theta, cov, rms, ok


def fit_parity(curve, omega_nominal: float) -> ParityFit:
    """Weighted least squares of a measured parity curve.

    curve provides gaps (s), parity values and standard errors (zero or
    missing errors fall back to unit weights); omega_nominal anchors the
    +-20 % frequency grid.  Needs at least 8 points spanning a full
    oscillation period pi/omega_nominal.
    """
    t = np.asarray(curve.gaps, dtype=float)
    y = np.asarray(curve.parity, dtype=float)
    if len(t) < 8:
        raise ValueError("need at least 8 parity points")
    if t.max() - t.min() < math.pi / omega_nominal:
        raise ValueError("gaps must span at least one oscillation period")
    w = _weights(getattr(curve, "errors", None), len(t))

    theta, cov_lin, rms, ok = _harmonic_fit(t, y, w, omega_nominal,
                                            harmonic=2)
    b0, b1, b2, om = theta
    # P = 2a - 2b cos(2wt + xi) maps onto b0 = 2a, b1 = -2b cos xi,
    # b2 = 2b sin xi
    a = 0.5 * b0
    u = -0.5 * b1
    v = 0.5 * b2
    b = math.hypot(u, v)
    xi = math.atan2(v, u) % (2 * math.pi)

    # covariance of (a, u, v, w) then of (a, b, xi, w)
    t_lin = np.diag([0.5, -0.5, 0.5, 1.0])
    cov_auv = t_lin @ cov_lin @ t_lin.T
    if b > 0:
        t_pol = np.array([[1, 0, 0, 0],
                          [0, u / b, v / b, 0],
                          [0, -v / b ** 2, u / b ** 2, 0],
                          [0, 0, 0, 1]])
        cov = t_pol @ cov_auv @ t_pol.T
    else:
        cov = np.full((4, 4), np.nan)

    fit = ParityFit(re_c2=a, abs_c1=b, xi=xi, omega_fit=float(om),
                    covariance=cov, residual_rms=rms)
    if not ok:
        raise FitError("parity fit did not converge within "
                       f"{GN_MAX_ITER} Gauss-Newton iterations", fit)
    return fit


def fit_rabi(durations, populations, omega_nominal: float,
             errors=None) -> RabiFit:
    """Sinusoid fit of a flopping curve p(t) = a + b cos(w t + phase)."""
    t = np.asarray(durations, dtype=float)
    y = np.asarray(populations, dtype=float)
    w = _weights(errors, len(t))
    theta, _, rms, ok = _harmonic_fit(t, y, w, omega_nominal, harmonic=1)
    b0, b1, b2, om = theta
    amp = math.hypot(b1, b2)
    phase = math.atan2(-b2, b1) % (2 * math.pi)
    fit = RabiFit(offset=b0, amplitude=amp, phase=phase, omega_fit=float(om),
                  residual_rms=rms)
    if not ok:
        raise FitError("flopping fit did not converge", fit)
    return fit


def entanglement_fidelity(p00: float, p11: float, abs_c1: float) -> float:
    """Bell fidelity F = (P00 + P11)/2 + |C1|.

    F > 0.5 is sufficient (not necessary) for entanglement.  Inputs are
    statistical estimates, so physicality violations (population sum above
    one, coherence above (P00+P11)/2 plus the 0.02 allowance) warn rather
    than raise.
    """
    if p00 + p11 > 1.0 + 0.02:
        warnings.warn("population sum exceeds unity beyond the statistical "
                      "allowance; estimates are inconsistent")
    if abs_c1 > 0.5 * (p00 + p11) + 0.02:
        warnings.warn("coherence exceeds the population bound; "
                      "estimates are inconsistent beyond tolerance")
    return 0.5 * (p00 + p11) + abs_c1


def truth_table_fidelity(measured, ideal) -> float:
    """Mean overlap 1/4 Tr[|ideal|^T |measured|] of two outcome tables.

    For probability tables against a permutation this is the mean of the
    four ideal-position entries.
    """
    m = np.abs(np.asarray(getattr(measured, "probs", measured), dtype=float))
    i = np.abs(np.asarray(getattr(ideal, "probs", ideal), dtype=float))
    if m.shape != (4, 4) or i.shape != (4, 4):
        raise ValueError("tables must be 4x4")
    return 0.25 * float(np.trace(i.T @ m))


def correct_background(value: float, retention: float) -> float:
    """Undo background-collision loss: value / retention, clamped to [0,1].

    retention is the probability that the relevant atoms survived the
    preparation-to-readout window (two-atom product for pair quantities).
    """
    if retention <= 0 or retention > 1:
        raise ValueError("retention must be in (0, 1]")
    corrected = value / retention
    if corrected > 1.0:
        warnings.warn("background correction clamped at 1")
        return 1.0
    return max(corrected, 0.0)


def correct_trace(value: float, trace_retention: float) -> float:
    """Undo gate trace loss (population left outside the qubit space)."""
    return correct_background(value, trace_retention)


@dataclass(frozen=True)
class FidelityReport:
    """Raw and corrected fidelities plus the numbers that produced them."""

    raw: float
    background_corrected: float
    trace_corrected: float
    inputs: dict

    def __post_init__(self):
        if not (self.raw <= self.background_corrected + 1e-12
                <= self.trace_corrected + 2e-12):
            warnings.warn("corrections decreased a fidelity; check the "
                          "retention factors")


def bell_fidelity_report(p00: float, p11: float, abs_c1: float,
                         pair_retention: float,
                         trace_retention: float = 1.0) -> FidelityReport:
    """Assemble raw/corrected Bell fidelities from measured quantities.

    The population and coherence estimators all carry the full two-atom
    background survival, so the corrected fidelity is the raw one divided
    by pair_retention (and then by trace_retention).
    """
    raw = entanglement_fidelity(p00, p11, abs_c1)
    bg = correct_background(raw, pair_retention)
    tr = correct_trace(bg, trace_retention)
    return FidelityReport(raw=raw, background_corrected=bg,
                          trace_corrected=tr,
                          inputs={"p00": p00, "p11": p11, "abs_c1": abs_c1,
                                  "pair_retention": pair_retention,
                                  "trace_retention": trace_retention})


def cnot_fidelity_report(table, ideal, p_bg_single: float,
                         trace_retention: float = 1.0) -> FidelityReport:
    """Assemble raw/corrected CNOT fidelities from a measured TruthTable.

    The corrected fidelity scores the per-cell retention-corrected table;
    the raw one follows the lab convention of carrying the full two-atom
    background survival (raw = corrected x retention^2), which makes
    correct_background(raw, retention^2) recover the corrected value
    exactly.
    """
    corrected_table = table.background_corrected(p_bg_single)
    bg = truth_table_fidelity(corrected_table, ideal)
    raw = bg * p_bg_single ** 2
    tr = correct_trace(bg, trace_retention)
    return FidelityReport(raw=raw, background_corrected=bg,
                          trace_corrected=tr,
                          inputs={"measured_trace":
                                  truth_table_fidelity(table, ideal),
                                  "p_bg_single": p_bg_single,
                                  "trace_retention": trace_retention})


def unwind_phase(fitted_xi: float, expected_xi: float) -> float:
    """Add the 2 pi winding a cosine fit cannot see to a fitted phase."""
    two_pi = 2 * math.pi
    return fitted_xi + two_pi * round((expected_xi - fitted_xi) / two_pi)
