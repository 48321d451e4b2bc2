import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from levydiff import limits as lm
from levydiff.potential import PotentialSpec
from levydiff.stats import ks_distance

S05 = lm.LimitLaw(lm.STABLE, 1.0, 0.5)
S15 = lm.LimitLaw(lm.STABLE, 1.0, 1.5)
CAU = lm.LimitLaw(lm.CAUCHY, 1.0)
GAU = lm.LimitLaw(lm.GAUSSIAN, 1.0)


def test_half_stable_is_inverse_chi_square():
    # the standard law with alpha = 1/2 is that of 1/N^2
    x = np.array([0.01, 0.2, 1.0, 2.198, 15.0, 400.0, 1e4])
    assert np.allclose(lm.cdf_via_cf_inversion(S05, x), special.erfc(1 / np.sqrt(2 * x)), atol=1e-9)
    assert lm.law_median(S05) == pytest.approx(1 / stats.norm.ppf(0.75) ** 2, rel=1e-8)


def test_scaled_law():
    law = lm.LimitLaw(lm.STABLE, 0.25, 0.5)
    assert law.cdf(0.5) == pytest.approx(S05.cdf(2.0), abs=1e-10)


def test_gaussian_inversion():
    law = lm.LimitLaw(lm.GAUSSIAN, math.sqrt(24.0))
    x = np.linspace(-15, 15, 13)
    assert np.allclose(law.cdf(x), stats.norm.cdf(x, scale=math.sqrt(24.0)), atol=1e-9)


@pytest.mark.parametrize("law", [S05, S15, CAU, GAU], ids=["s05", "s15", "cauchy", "gauss"])
def test_cdf_monotone_and_bounded(law):
    grid = np.concatenate([-np.geomspace(1e3, 1e-2, 25), [0.0], np.geomspace(1e-2, 1e3, 25)])
    F = lm.cdf_via_cf_inversion(law, grid)
    assert np.all((F >= 0) & (F <= 1))
    assert np.all(np.diff(F) >= 0)
    assert F[0] < 1e-4


@pytest.mark.parametrize("law", [S15, GAU], ids=["s15", "gauss"])
def test_cdf_reaches_one(law):
    assert law.cdf(1e3) > 1 - 1e-4


@pytest.mark.parametrize("law,alpha", [(S05, 0.5), (CAU, 1.0)], ids=["s05", "cauchy"])
def test_upper_tail_asymptotic(law, alpha):
    # heavy right tails: 1 - F(x) ~ C_alpha x^-alpha with C_1 = 2/pi
    c = 2 / math.pi if alpha == 1 else (1 - alpha) / (math.gamma(2 - alpha) * math.cos(math.pi * alpha / 2))
    for x in (1e3, 1e4):
        assert (1 - law.cdf(x)) * x ** alpha == pytest.approx(c, rel=0.02)


def test_positive_support_for_small_alpha():
    assert S05.cdf(-1.0) < 1e-10


@pytest.mark.parametrize("law", [S05, S15, CAU, GAU], ids=["s05", "s15", "cauchy", "gauss"])
def test_sampler_matches_inversion(law, rng):
    x = law.sample(rng, 20_000)
    assert ks_distance(x, law, grid_size=300) < 1.63 / math.sqrt(20_000) + 0.003
    t = np.array([0.5, 1.0, 2.0])
    assert np.abs(lm.empirical_cf(x, t) - law.cf(t)).max() < 4 / math.sqrt(20_000)


def test_cf_conventions():
    t = np.array([-2.0, -0.5, 0.5, 2.0])
    cf = lm.stable_cf(0.5, 1.0, t)
    assert np.allclose(np.abs(cf), np.exp(-np.sqrt(np.abs(t))))
    assert np.allclose(lm.stable_cf(0.5, 1.0, -t), np.conj(cf))
    assert lm.cauchy_cf(1.0, 0.0) == pytest.approx(1.0)
    assert lm.cauchy_cf(2.0, 1.0) == pytest.approx(np.exp(-(2 + 2j * (2 / math.pi) * math.log(2))))


def test_bad_laws():
    with pytest.raises(ValueError):
        lm.LimitLaw(lm.STABLE, 1.0, 1.0)
    with pytest.raises(ValueError):
        lm.LimitLaw(lm.GAUSSIAN, -1.0)


def test_case_selection():
    assert [lm.select_case(k) for k in (0.5, 1.0, 1.5, 2.0, 3.0)] == ["a", "b", "c", "d", "e"]
    assert lm.select_case(1 + 1e-12) == "b"


def test_constants_case_a():
    spec = PotentialSpec.drifted_brownian(0.5)
    reg = lm.theorem_constants(spec, K=2 ** -0.5 / math.gamma(0.5))
    assert reg.case == "a" and reg.exponent == pytest.approx(2.0)
    assert reg.law.scale == pytest.approx(0.25, rel=1e-9)
    assert reg.law.alpha == pytest.approx(0.5)
    assert lm.theorem_constants(spec).law.scale == pytest.approx(reg.law.scale, rel=1e-12)
    mixed = PotentialSpec.mixed(1.0, -0.1, 0.1, 1.0)
    with pytest.raises(ValueError, match="closed form"):
        lm.theorem_constants(mixed)
    assert lm.theorem_constants(mixed, K=1.0).case == "a"


def test_constants_case_b():
    reg = lm.theorem_constants(PotentialSpec.drifted_brownian(1.0))
    assert reg.case == "b"
    assert reg.law.scale == pytest.approx(2 * math.pi)
    assert reg.cauchy_center_coef == pytest.approx(4.0)
    assert reg.approximate_centering


def test_constants_case_d():
    reg = lm.theorem_constants(PotentialSpec.drift_minus_cp(1, 3, 1))
    assert reg.case == "d" and reg.log_denominator
    assert reg.law.scale == pytest.approx(4 / (0.5 * math.sqrt(2 / 3)), rel=1e-9)
    assert reg.m == pytest.approx(4.0)
    assert lm.theorem_constants(PotentialSpec.drifted_brownian(2.0)).law.scale == pytest.approx(8.0)


def test_constants_case_e():
    reg = lm.theorem_constants(PotentialSpec.drifted_brownian(3.0))
    assert reg.case == "e"
    assert reg.law.scale ** 2 == pytest.approx(24.0)
    assert reg.m == pytest.approx(2.0)


@pytest.mark.parametrize("kappa", [0.3, 0.5, 0.8])
def test_position_tail_constant_identity(kappa):
    spec = PotentialSpec.drifted_brownian(kappa)
    K = 2 ** (kappa - 1) / math.gamma(kappa)
    d = 0.5 * kappa  # Phi'(kappa) for this family
    M = math.pi * kappa ** 2 * K ** 2 / (2 * math.sin(math.pi * kappa / 2) * d)
    scale = lm.theorem_constants(spec, K).law.scale
    C = lm.position_tail_constant(kappa, K, d)
    assert C * M * 2 ** kappa == pytest.approx(1.0, abs=1e-12)
    assert C == pytest.approx(scale ** -kappa, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(delta=st.floats(0.05, 6.0).filter(lambda k: abs(k - 1) > 0.01 and abs(k - 2) > 0.01))
def test_constants_finite_positive(delta):
    spec = PotentialSpec.drifted_brownian(delta)
    reg = lm.theorem_constants(spec, K=2 ** (delta - 1) / math.gamma(delta))
    assert math.isfinite(reg.law.scale) and reg.law.scale > 0
    assert all(math.isfinite(v) for v in reg.constants.values())


def test_normalize_observable():
    reg = lm.theorem_constants(PotentialSpec.drifted_brownian(3.0))
    assert lm.normalize_observable(reg, 2 * 400 + 20, 400.0) == pytest.approx(1.0)
    reg_d = lm.theorem_constants(PotentialSpec.drifted_brownian(2.0))
    r = 100.0
    assert lm.normalize_observable(reg_d, 4 * r, r) == 0.0
    reg_b = lm.theorem_constants(PotentialSpec.drifted_brownian(1.0))
    assert lm.normalize_observable(reg_b, 4 * r * math.log(r) + r, r) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lm.normalize_observable(reg, 1.0, 0.0)


def test_quantiles_roundtrip():
    for law in (S15, CAU):
        for p in (0.1, 0.5, 0.9):
            assert law.cdf(law.quantile(p)) == pytest.approx(p, abs=1e-9)
