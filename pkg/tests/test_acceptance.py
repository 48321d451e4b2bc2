"""Acceptance criteria at their pinned sizes and tolerances.

Each criterion prints one ``criterion N [PASS|FAIL] ...`` line. Run with
``pytest tests/test_acceptance.py`` (lines appear in the terminal summary) or
``python tests/test_acceptance.py``. The full set takes tens of minutes.
"""

import functools
import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from levydiff.potential import PotentialSpec, find_kappa  # noqa: E402
from levydiff.suites import run_suite  # noqa: E402

SEED = 0
CRITERIA = {}


def criterion(num, title):
    def wrap(fn):
        CRITERIA[num] = (title, fn)
        return fn
    return wrap


@functools.lru_cache(maxsize=None)
def suite(name, workers=1):
    return run_suite(name, seed=SEED, workers=workers)


def rows(table, *names):
    chosen = [r for r in table.rows if r.target is not None and (not names or r.name in names)]
    if names:
        missing = set(names) - {r.name for r in chosen}
        assert not missing, f"rows missing from table: {missing}"
    return chosen


def verdict(chosen):
    ok = all(r.passed for r in chosen)
    detail = "; ".join(f"{r.statistic}={r.value:.6g} vs {r.target:.6g} ({r.tolerance})" for r in chosen)
    return ok, detail


@criterion(1, "Cramer root of (c,a,b)=(1,3,1) and its runtime")
def c01():
    ok, detail = verdict(rows(suite("kappa")))
    spec = PotentialSpec.drift_minus_cp(1.0, 3.0, 1.0)
    best = min(_timed(find_kappa, spec) for _ in range(50))
    return ok and best < 1e-3, f"{detail}; runtime {best * 1e3:.3f} ms (< 1 ms)"


def _timed(fn, *args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


@criterion(2, "K by Monte Carlo, kappa=1.5, N=1e5")
def c02():
    return verdict(rows(suite("K")))


@criterion(3, "A(inf) against 2/gamma_kappa, kappa in {1.5, 3}")
def c03():
    return verdict(rows(suite("dufresne")))


@criterion(4, "A(inf) against the beta-prime density for (1,3,1)")
def c04():
    return verdict(rows(suite("beta-prime")))


@criterion(5, "E_1[Z_1] for delta=3, step 1e-3")
def c05():
    return verdict(rows(suite("moments"), "E_z1_Z_1"))


@criterion(6, "E_0[Z_1^2], equal and distinct branches")
def c06():
    return verdict(rows(suite("moments"), "E_0_Z_1^2_equal", "E_0_Z_1^2_distinct",
                        "second_moment_formula_equal", "second_moment_formula_distinct"))


@criterion(7, "stationary mean (delta=3) and tail (delta=1.5)")
def c07():
    return verdict(rows(suite("stationary")))


@criterion(8, "stable limit, kappa=0.5, r=100")
def c08():
    return verdict(rows(suite("stable-limit")))


@criterion(9, "Gaussian limit, kappa=3, r=500")
def c09():
    return verdict(rows(suite("gaussian-limit")))


@criterion(10, "Cauchy-scale spread, kappa=1, r=200")
def c10():
    return verdict(rows(suite("cauchy-spread")))


@criterion(11, "direct H(r) against I(r), r in {5, 10}")
def c11():
    return verdict(rows(suite("cross-validate")))


@criterion(12, "exponential tail of a hitting time of Z")
def c12():
    return verdict(rows(suite("tail-probe"), "r_squared"))


@criterion(13, "stable-law sampler, inversion and CF")
def c13():
    return verdict(rows(suite("laws")))


@criterion(14, "byte-identical JSON across worker counts")
def c14():
    names = ("tail-probe", "beta-prime")
    same = [suite(n, 1).to_json() == run_suite(n, seed=SEED, workers=2).to_json() for n in names]
    return all(same), ", ".join(f"{n}: {'identical' if s else 'DIFFERENT'}" for n, s in zip(names, same))


def _line(num):
    title, fn = CRITERIA[num]
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    return ok, f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail} [{elapsed:.0f} s]"


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    ok, line = _line(num)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line, flush=True)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
