"""Goodness-of-fit and tail statistics used by the experiment harness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate

Z95 = 1.959963984540054


class DegenerateSampleError(ValueError):
    pass


def _clean(samples, name="samples"):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError(f"{name} is empty")
    if np.isnan(x).any():
        raise ValueError(f"{name} contains NaN")
    return x


def ks_two_sample(x, y, one_sided: bool = False) -> float:
    """Sup distance between two empirical CDFs.

    With ``one_sided`` the statistic is ``sup_t (F_x(t) - F_y(t))``, clipped at 0.
    ``inf`` entries are allowed and count as mass beyond every finite point.
    """
    x = np.sort(_clean(x, "x"))
    y = np.sort(_clean(y, "y"))
    pts = np.concatenate([x, y])
    pts = pts[np.isfinite(pts)]
    if pts.size == 0:
        return 0.0
    fx = np.searchsorted(x, pts, side="right") / x.size
    fy = np.searchsorted(y, pts, side="right") / y.size
    d = fx - fy
    return float(max(d.max(), 0.0)) if one_sided else float(np.abs(d).max())


def ks_standard_error(n: int, m: int) -> float:
    return math.sqrt((n + m) / (n * m))


def _law_cdf_at(cdf, sorted_x, grid_size):
    """Target CDF at every sample point, from ``grid_size`` evaluations at sample quantiles."""
    n = sorted_x.size
    if n <= grid_size:
        return np.asarray(cdf(sorted_x), dtype=float)
    probs = np.linspace(0.0, 1.0, grid_size)
    grid = np.unique(np.quantile(sorted_x, probs))
    vals = np.maximum.accumulate(np.clip(np.asarray(cdf(grid), dtype=float), 0.0, 1.0))
    if grid.size < 2:
        return np.full(n, vals[0])
    return np.clip(interpolate.PchipInterpolator(grid, vals)(sorted_x), 0.0, 1.0)


def ks_distance(samples, target, grid_size: int = 2000) -> float:
    """KS distance of ``samples`` to a law (anything with ``.cdf``), a CDF callable, or a second sample.

    Against a law, the target CDF is evaluated on ``grid_size`` sample
    quantiles and interpolated monotonically; this keeps the cost of slow
    CDFs (CF inversion) independent of the sample size.
    """
    x = np.sort(_clean(samples))
    if isinstance(target, (np.ndarray, list, tuple)):
        return ks_two_sample(x, target)
    cdf = target.cdf if hasattr(target, "cdf") else target
    F = _law_cdf_at(cdf, x, grid_size)
    n = x.size
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(n) / n
    return float(min(1.0, max(upper.max(), lower.max(), 0.0)))


def hill_tail_index(samples, top_fraction: float = 0.01) -> float:
    """Hill estimator ``1 / mean(log(X_(i) / X_(k+1)))`` over the top ``k`` order statistics."""
    x = _clean(samples)
    if not 0 < top_fraction < 1:
        raise ValueError("top_fraction must lie in (0, 1)")
    k = int(math.floor(top_fraction * x.size))
    if k < 2:
        raise ValueError("too few order statistics in the top fraction")
    top = np.sort(x)[-(k + 1):]
    if top[0] <= 0:
        raise DegenerateSampleError("top order statistics must be positive")
    spacing = np.log(top[1:] / top[0]).mean()
    if spacing <= 0:
        raise DegenerateSampleError("top order statistics are all equal")
    return float(1.0 / spacing)


@dataclass
class MeanCI:
    mean: float
    half_width: float
    n: int

    def covers(self, target: float) -> bool:
        return abs(self.mean - target) <= self.half_width


def mean_ci(samples, z: float = Z95) -> MeanCI:
    x = _clean(samples)
    if x.size == 1:
        return MeanCI(float(x[0]), math.nan, 1)
    return MeanCI(float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(x.size)), x.size)


def variance_ci(samples, z: float = Z95) -> MeanCI:
    """Sample variance with a normal-approximation CI from the fourth central moment."""
    x = _clean(samples)
    n = x.size
    if n < 4:
        raise ValueError("need at least 4 samples for a variance CI")
    c = x - x.mean()
    s2 = float(c.var(ddof=1))
    m4 = float((c ** 4).mean())
    se = math.sqrt(max(m4 - s2 ** 2, 0.0) / n)
    return MeanCI(s2, z * se, n)


@dataclass
class MomentCheck:
    value: float
    half_width: float
    target: float
    tolerance: float | None
    passed: bool


def moment_check(samples, target: float, rtol: float | None = None, power: int = 1) -> MomentCheck:
    """Compare ``mean(samples**power)`` to ``target``.

    With ``rtol`` the check is ``|value - target| <= rtol * |target|``;
    without it the 95% CI must cover the target.
    """
    x = _clean(samples)
    ci = mean_ci(x ** power)
    if rtol is None:
        ok = ci.covers(target)
    else:
        ok = abs(ci.mean - target) <= rtol * abs(target)
    return MomentCheck(ci.mean, ci.half_width, target, rtol, bool(ok))


def iqr(samples) -> float:
    q1, q3 = np.quantile(_clean(samples), [0.25, 0.75])
    return float(q3 - q1)


def empirical_cf_error(samples, law, t: float) -> float:
    """``|mean(exp(i t X)) - phi(t)|`` for a law exposing ``.cf``."""
    x = _clean(samples)
    emp = np.exp(1j * t * x).mean()
    return float(abs(emp - complex(np.asarray(law.cf(t)))))
