import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levydiff import gou
from levydiff.potential import PotentialSpec


def test_besq2_moments(rng):
    u = gou.besq2_step(np.full(100_000, 1.5), 0.7, rng)
    # BESQ(2): E = u + 2t, Var = 4ut + 4t^2
    assert u.mean() == pytest.approx(1.5 + 1.4, rel=0.01)
    assert u.var() == pytest.approx(4 * 1.5 * 0.7 + 4 * 0.49, rel=0.03)
    with pytest.raises(ValueError):
        gou.besq2_step(-1.0, 0.1, rng)


def test_besq2_from_zero_is_exponential(rng):
    u = gou.besq2_step(np.zeros(50_000), 1.0, rng)
    assert u.mean() == pytest.approx(2.0, rel=0.02)
    assert np.mean(u > 2.0) == pytest.approx(math.exp(-1.0), abs=0.01)


def test_closed_forms(db3):
    assert gou.stationary_mean(db3) == pytest.approx(2.0)
    assert gou.mean_Z(db3, 1.0, 1.0) == pytest.approx(2 - math.exp(-1.0))
    assert gou.second_moment_Z0(db3, 1.0) == pytest.approx(16 * (1 - 2 / math.e))
    assert gou.second_moment_Z0(PotentialSpec.drift_minus_cp(1, 4, 1), 1.0) == pytest.approx(4.69218, rel=1e-5)


def test_regime_errors():
    with pytest.raises(gou.RegimeError):
        gou.stationary_mean(PotentialSpec.drifted_brownian(0.8))
    with pytest.raises(gou.RegimeError):
        gou.second_moment_Z0(PotentialSpec.drifted_brownian(1.5), 1.0)


@settings(max_examples=40, deadline=None)
@given(delta=st.floats(2.1, 8.0), t=st.floats(0.05, 3.0))
def test_second_moment_matches_quadrature(delta, t):
    spec = PotentialSpec.drifted_brownian(delta)
    assert gou.second_moment_Z0(spec, t) == pytest.approx(gou.second_moment_Z0_quadrature(spec, t), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(3.2, 8.0), b=st.floats(0.3, 1.0))
def test_second_moment_cp_quadrature(a, b):
    spec = PotentialSpec.drift_minus_cp(1.0, a, b)
    if a - b <= 2.05:
        return
    assert gou.second_moment_Z0(spec, 1.0) == pytest.approx(gou.second_moment_Z0_quadrature(spec, 1.0), rel=1e-7)


def test_equal_branch_is_limit_of_distinct():
    # drifted Brownian with delta = 3 has Phi(1) = Phi(2); nearby delta uses the distinct branch
    near = gou.second_moment_Z0(PotentialSpec.drifted_brownian(3.0 + 1e-6), 1.0)
    assert near == pytest.approx(gou.second_moment_Z0(PotentialSpec.drifted_brownian(3.0), 1.0), rel=1e-5)


def test_mean_Z_simulation(rng, db3):
    final, snaps = gou.simulate_Z_batch(db3, 40_000, 1.0, 1.0, 1e-2, rng, snapshot_times=[0.5])
    se = final.std() / math.sqrt(final.size)
    assert abs(final.mean() - gou.mean_Z(db3, 1.0, 1.0)) < 4 * se + 0.01
    assert abs(snaps[0.5].mean() - gou.mean_Z(db3, 1.0, 0.5)) < 0.03


def test_simulate_Z_path(rng, cp131, tmp_path):
    zp = gou.simulate_Z(cp131, 0.5, 3.0, 0.01, rng)
    assert zp.values[0] == 0.5
    assert np.all(zp.values >= 0)
    jumps = np.flatnonzero(zp.potential.is_jump)
    for j in jumps:
        # a jump of V rescales Z by exp(jump) and leaves U unchanged
        ratio = zp.values[j] / zp.values[j - 1]
        assert ratio == pytest.approx(math.exp(zp.potential.values[j] - zp.potential.values[j - 1]))
    out = tmp_path / "z.csv"
    zp.to_csv(out)
    assert out.read_text().splitlines()[0] == "t,V,a,U,Z"


def test_Z_infinity_mean(rng, db3):
    z = gou.sample_Z_infinity(db3, 1e-4, rng, n=30_000)
    assert z.mean() == pytest.approx(2.0, rel=0.03)
    assert isinstance(gou.sample_Z_infinity(db3, 1e-4, rng), float)


def test_stationary_tail_constant():
    spec = PotentialSpec.drifted_brownian(1.5)
    from levydiff.functionals import exact_K
    assert gou.stationary_tail_constant(spec, exact_K(spec)) == pytest.approx(4 ** 1.5)
