#!/usr/bin/env python3
"""Compare the compiled propagation kernel against the NumPy fallback.

Times the raw exp(-iHt) kernel, the pulse kernels, and a full-noise
truth-table run through each backend.  The backend is chosen at import
time, so each one runs in a fresh interpreter.

    python benchmarks/bench_backends.py          # both backends
    python benchmarks/bench_backends.py --this   # just the active one
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time

import numpy as np


def bench_active():
    from rydcnot import _kernel
    from rydcnot.experiment import truth_table
    from rydcnot.noise import NoiseConfig
    from rydcnot.sequence import PhysicalParams
    from rydcnot.thermal import TrapConfig, calibrate_blockade

    rng = np.random.default_rng(0)
    m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    h = np.ascontiguousarray((m + m.conj().T) * 1e6)
    psi = rng.normal(size=9) + 1j * rng.normal(size=9)
    psi = (psi / np.linalg.norm(psi)).astype(complex)
    out = np.empty(9, complex)

    n = 20_000
    start = time.perf_counter()
    for _ in range(n):
        _kernel.expm_apply(h, 1e-6, psi, out)
    expm_us = (time.perf_counter() - start) / n * 1e6

    start = time.perf_counter()
    for _ in range(n):
        _kernel.apply_rydberg(psi, out, 5e6, 0.0, 1e5, 0.0, 3e7, 0.0, 0.0,
                              6e-7)
    pulse_us = (time.perf_counter() - start) / n * 1e6

    params = PhysicalParams()
    trap = TrapConfig()
    model = calibrate_blockade(trap, params, 2 * math.pi * 5.3e6, 20_000,
                               np.random.default_rng(1))
    shots = 4000
    start = time.perf_counter()
    truth_table(shots, params, trap, model, NoiseConfig(), seed=0)
    elapsed = time.perf_counter() - start
    total_shots = shots // 2 * 2 * 4
    return {
        "backend": _kernel.BACKEND,
        "expm_apply_us": round(expm_us, 2),
        "rydberg_pulse_us": round(pulse_us, 2),
        "truth_table_shots_per_s": round(total_shots / elapsed),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--this", action="store_true",
                        help="benchmark only the active backend")
    args = parser.parse_args()

    if args.this:
        print(json.dumps(bench_active()))
        return

    results = []
    for pure in ("0", "1"):
        env = dict(os.environ, RYDCNOT_PURE_PYTHON=pure)
        proc = subprocess.run(
            [sys.executable, __file__, "--this"], env=env,
            capture_output=True, text=True, check=True)
        results.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    print(f"{'metric':<28}" + "".join(f"{r['backend']:>12}"
                                      for r in results))
    for key in ("expm_apply_us", "rydberg_pulse_us",
                "truth_table_shots_per_s"):
        print(f"{key:<28}" + "".join(f"{r[key]:>12}" for r in results))
    if results[0]["backend"] != results[1]["backend"]:
        speedup = (results[1]["expm_apply_us"]
                   / results[0]["expm_apply_us"])
        print(f"\ncompiled kernel speedup on exp(-iHt): {speedup:.1f}x")


if __name__ == "__main__":
    main()
