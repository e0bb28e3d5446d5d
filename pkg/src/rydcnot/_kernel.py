"""Propagation backend selection.

The compiled extension (`rydcnot._core`) and the NumPy implementation below
expose the same three kernels:

    expm_apply(h, t, psi, out)      out = exp(-i h t) psi
    apply_rydberg(psi, out, ...)    square 1<->r pulse
    apply_ground(psi, out, ...)     square 0<->1 pulse

The extension is used when importable unless RYDCNOT_PURE_PYTHON=1 is set.
`BACKEND` records which one won.
"""

import os

import numpy as np

_DIM = 9

# joint index = 3*control_level + target_level, levels (0, 1, r)
_CTRL_R = [6, 7, 8]       # control in r
_TGT_R = [2, 5, 8]        # target in r
_CTRL_0 = [0, 1, 2]
_TGT_0 = [0, 3, 6]


def _expm_apply_np(h, t, psi, out):
    w, v = np.linalg.eigh(h)
    out[:] = (v * np.exp(-1j * w * t)) @ (v.conj().T @ psi)


def _rydberg_matrix(om_c, om_t, det_c, det_t, blockade, stark_c, stark_t):
    h = np.zeros((_DIM, _DIM), dtype=np.complex128)
    for k in range(3):
        h[3 + k, 6 + k] = 0.5 * om_c
        h[6 + k, 3 + k] = 0.5 * om_c
        h[3 * k + 1, 3 * k + 2] = 0.5 * om_t
        h[3 * k + 2, 3 * k + 1] = 0.5 * om_t
    for i in _CTRL_R:
        h[i, i] += det_c
    for i in _TGT_R:
        h[i, i] += det_t
    for i in _CTRL_0:
        h[i, i] += stark_c
    for i in _TGT_0:
        h[i, i] += stark_t
    h[8, 8] += blockade
    return h


def _ground_matrix(om_c, om_t, ph_c, ph_t):
    h = np.zeros((_DIM, _DIM), dtype=np.complex128)
    cc = 0.5 * om_c * np.exp(1j * ph_c)
    ct = 0.5 * om_t * np.exp(1j * ph_t)
    for k in range(3):
        h[k, 3 + k] = cc
        h[3 + k, k] = np.conj(cc)
        h[3 * k, 3 * k + 1] = ct
        h[3 * k + 1, 3 * k] = np.conj(ct)
    return h


def _apply_rydberg_np(psi, out, om_c, om_t, det_c, det_t, blockade,
                      stark_c, stark_t, t):
    h = _rydberg_matrix(om_c, om_t, det_c, det_t, blockade, stark_c, stark_t)
    _expm_apply_np(h, t, psi, out)


def _apply_ground_np(psi, out, om_c, om_t, ph_c, ph_t, t):
    h = _ground_matrix(om_c, om_t, ph_c, ph_t)
    _expm_apply_np(h, t, psi, out)


if os.environ.get("RYDCNOT_PURE_PYTHON") == "1":
    _core = None
else:
    try:
        from . import _core
    except ImportError:
        _core = None

if _core is not None:
    BACKEND = "cython"
    expm_apply = _core.expm_apply
    apply_rydberg = _core.apply_rydberg
    apply_ground = _core.apply_ground
else:
    BACKEND = "numpy"
    expm_apply = _expm_apply_np
    apply_rydberg = _apply_rydberg_np
    apply_ground = _apply_ground_np
