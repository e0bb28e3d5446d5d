"""Acceptance gate: every criterion at its stated tolerance.

Runs the shared acceptance suite once (module scope) and asserts each
criterion separately, printing one pass/fail line per criterion (visible
with pytest -s or in the failure report).
"""

import pytest

from rydcnot.acceptance import CRITERIA, run_all


@pytest.fixture(scope="module")
def results():
    res = run_all(seed=0)
    for r in res:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail} "
              f"({r.seconds:.1f}s)")
    return {r.name: r for r in res}


@pytest.mark.parametrize("name", [name for name, _ in CRITERIA])
def test_criterion(results, name):
    r = results[name]
    assert r.passed, f"{r.name}: {r.detail}"
