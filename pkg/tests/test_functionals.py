import math

import numpy as np
import pytest
from scipy import integrate, stats

from levydiff import functionals as fn
from levydiff.potential import PotentialPath, PotentialSpec
from levydiff.stats import ks_two_sample


def linear_path(slope, horizon=2.0, step=0.01):
    x = np.linspace(0.0, horizon, int(round(horizon / step)) + 1)
    return PotentialPath(step, x, slope * x, np.zeros(x.size, dtype=bool), horizon)


def test_scale_function_linear_potential():
    path = linear_path(-1.0)
    x = np.array([0.0, 0.37, 1.0, 2.0])
    # trapezoid error on exp(-x) with h = 0.01 is below 1e-5
    assert np.allclose(fn.scale_function(path, x), 1.0 - np.exp(-x), atol=1e-5)
    assert np.allclose(fn.inverse_clock(path, x), np.expm1(x), atol=1e-4)


def test_scale_function_jump_split():
    x = np.array([0.0, 1.0, 1.0, 2.0])
    v = np.array([0.0, 0.0, -1.0, -1.0])
    path = PotentialPath(1.0, x, v, np.array([False, False, True, False]), 2.0)
    assert fn.scale_function(path, 2.0) == pytest.approx(1.0 + math.exp(-1.0))
    assert fn.scale_function(path, 1.5) == pytest.approx(1.0 + 0.5 * math.exp(-1.0))


def test_scale_function_domain():
    with pytest.raises(ValueError):
        fn.scale_function(linear_path(-1.0), 3.0)


def test_exact_K_values():
    assert fn.exact_K(PotentialSpec.drifted_brownian(1.5)) == pytest.approx(1.5957691216, rel=1e-9)
    assert fn.exact_K(PotentialSpec.drifted_brownian(1.0)) == pytest.approx(1.0)
    # K = E[A^(kappa-1)] for the beta-prime law, kappa = 2 gives E[A]
    spec = PotentialSpec.drift_minus_cp(1.0, 3.0, 1.0)
    mean, _ = integrate.quad(lambda x: x * fn.cp_density(spec, x), 0, np.inf)
    assert fn.exact_K(spec) == pytest.approx(mean, rel=1e-8)
    assert fn.exact_K(PotentialSpec.mixed(1.0, -1.0, 1.0, 1.0)) is None


def test_cp_law_closed_form():
    spec = PotentialSpec.drift_minus_cp(1.0, 3.0, 1.0)
    x = np.array([0.01, 0.5, 1.0, 4.0, 50.0])
    assert np.allclose(fn.cp_density(spec, x), 6 * x / (1 + x) ** 4)
    assert np.allclose(fn.cp_cdf(spec, x), 1 - (1 + 3 * x) / (1 + x) ** 3)
    assert np.allclose(fn.cp_cdf(spec, fn.cp_ppf(spec, [0.1, 0.5, 0.9])), [0.1, 0.5, 0.9])
    total, _ = integrate.quad(lambda t: fn.cp_density(spec, t), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_A_infinity_single_sample(rng):
    s = fn.sample_A_infinity(PotentialSpec.drifted_brownian(3.0), 1e-4, rng)
    assert s.value > 0 and s.truncation_horizon > 0
    assert s.error_bound <= 1e-4


def test_A_infinity_matches_dufresne(rng):
    vals, h, bounds = fn.sample_A_infinity(PotentialSpec.drifted_brownian(3.0), 1e-4, rng, n=20_000)
    assert np.all(bounds <= 1e-4)
    ks = ks_two_sample(vals, fn.dufresne_samples(3.0, 20_000, rng))
    assert ks < 1.63 * math.sqrt(2 / 20_000) + 0.01


def test_A_infinity_cp_against_cdf(rng):
    spec = PotentialSpec.drift_minus_cp(1.0, 3.0, 1.0)
    vals, _, _ = fn.sample_A_infinity(spec, 1e-4, rng, n=20_000)
    assert stats.kstest(vals, lambda x: fn.cp_cdf(spec, x)).statistic < 0.02


def test_horizon_cap(rng):
    with pytest.raises(RuntimeError):
        fn.sample_A_infinity(PotentialSpec.drifted_brownian(1.0), 1e-4, rng, n=10, max_horizon=0.5)


def test_estimate_K(rng):
    est = fn.estimate_K(PotentialSpec.drifted_brownian(1.5), 20_000, 1e-4, rng)
    lo, hi = est.interval
    assert lo < 1.5958 < hi + 0.01
    assert est.estimate == pytest.approx(1.5958, rel=0.05)
    with pytest.raises(ValueError):
        fn.estimate_K(PotentialSpec.drifted_brownian(1.5), 50, 1e-4, rng)


def test_K_kappa_one_is_one(rng):
    assert fn.estimate_K(PotentialSpec.drifted_brownian(1.0), 100, 1e-3, rng).estimate == 1.0


def test_tail_constant_A():
    spec = PotentialSpec.drifted_brownian(1.5)
    # P(2/gamma > x) ~ 2^k / Gamma(k+1) x^-k
    assert fn.tail_constant_A(spec, fn.exact_K(spec)) == pytest.approx(2 ** 1.5 / math.gamma(2.5))
