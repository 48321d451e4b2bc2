"""Scale function, clock, the exponential functional A(+inf) and the constant K."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import _engine
from .potential import (DRIFT_MINUS_CP, DRIFTED_BROWNIAN, PotentialPath, PotentialSpec,
                        find_kappa, phi_prime)

DEFAULT_STEP = 1e-2


def _cumulative_exp(path: PotentialPath, sign: float) -> np.ndarray:
    e = np.exp(sign * path.values)
    dx = np.diff(path.x)
    return np.concatenate([[0.0], np.cumsum(0.5 * dx * (e[1:] + e[:-1]))])


def _partial_integral(path: PotentialPath, x, sign: float):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > path.horizon * (1 + 1e-12)):
        raise ValueError(f"x must lie in [0, {path.horizon:g}]")
    cum = _cumulative_exp(path, sign)
    i = np.clip(np.searchsorted(path.x, x, side="right") - 1, 0, len(path.x) - 2)
    x0 = path.x[i]
    v0 = path.values[i]
    vx = np.asarray(path.value_at(x))
    out = cum[i] + 0.5 * (x - x0) * (np.exp(sign * v0) + np.exp(sign * vx))
    return float(out) if out.ndim == 0 else out


def scale_function(path: PotentialPath, x):
    """``A(x) = int_0^x exp(V_y) dy`` by per-cell trapezoids, split exactly at jumps."""
    return _partial_integral(path, x, 1.0)


def inverse_clock(path: PotentialPath, x):
    """``a(x) = int_0^x exp(-V_s) ds``, same quadrature as :func:`scale_function`."""
    return _partial_integral(path, x, -1.0)


@dataclass
class FunctionalSample:
    value: float
    truncation_horizon: float
    error_bound: float


@dataclass
class KEstimate:
    estimate: float
    half_width: float
    n: int
    winsorized: float | None = None

    @property
    def interval(self):
        return self.estimate - self.half_width, self.estimate + self.half_width


def _default_horizon_cap(spec: PotentialSpec, eps: float) -> float:
    drift = abs(spec.mean_increment)
    return 200.0 * (abs(math.log(eps)) + 10.0) / drift


def sample_A_infinity(spec: PotentialSpec, eps: float, rng: np.random.Generator,
                      n: int | None = None, step: float = DEFAULT_STEP,
                      max_horizon: float | None = None):
    """Samples of ``A(+inf) = int_0^inf exp(V_y) dy``.

    Each path is simulated until ``exp(V_h) / delta_half < eps`` with
    ``delta_half = |E V_1| / 2``; the left-over ``exp(V_h) / delta_half`` is
    reported as the truncation error bound. With ``n`` given, returns the
    arrays ``(values, horizons, bounds)`` instead of one
    :class:`FunctionalSample`.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    cap = _default_horizon_cap(spec, eps) if max_horizon is None else max_horizon
    vals, hs, bounds = _engine.a_infinity_batch(spec, 1 if n is None else n, eps, step, rng, cap)
    if n is None:
        return FunctionalSample(float(vals[0]), float(hs[0]), float(bounds[0]))
    return vals, hs, bounds


def exact_K(spec: PotentialSpec) -> float | None:
    """Closed-form K for the two families where the law of A(+inf) is known."""
    if spec.family == DRIFTED_BROWNIAN:
        k = dict(spec.params)["delta"]
        return 2.0 ** (k - 1.0) / math.gamma(k)
    if spec.family == DRIFT_MINUS_CP:
        p = dict(spec.params)
        c, a, b = p["c"], p["a"], p["b"]
        q = a / c
        return math.exp(special.gammaln(q) - (q - b - 1.0) * math.log(c)
                        - special.gammaln(q - b) - special.gammaln(b + 1.0))
    return None


def K_from_samples(a_samples: np.ndarray, kappa: float, z: float = 1.959963984540054) -> KEstimate:
    if abs(kappa - 1.0) < 1e-12:
        return KEstimate(1.0, 0.0, a_samples.size, 1.0)
    v = a_samples ** (kappa - 1.0)
    n = v.size
    est = float(v.mean())
    hw = float(z * v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    lo, hi = np.quantile(v, [0.0005, 0.9995])
    return KEstimate(est, hw, n, float(np.clip(v, lo, hi).mean()))


def estimate_K(spec: PotentialSpec, n: int, eps: float, rng: np.random.Generator,
               step: float = DEFAULT_STEP) -> KEstimate:
    """Monte Carlo mean of ``A(+inf)^(kappa - 1)`` with a 95% normal CI.

    The 99.9% winsorised mean is attached as a diagnostic; for ``kappa < 1``
    small values of A(+inf) dominate the plain mean.
    """
    if n < 100:
        raise ValueError("estimate_K needs n >= 100")
    kappa = find_kappa(spec)
    if abs(kappa - 1.0) < 1e-9:
        return KEstimate(1.0, 0.0, n, 1.0)
    vals, _, _ = sample_A_infinity(spec, eps, rng, n=n, step=step)
    return K_from_samples(vals, kappa)


def tail_constant_A(spec: PotentialSpec, K: float) -> float:
    """``lim x^kappa P(A(+inf) > x) = K / Phi'(kappa)``."""
    if K <= 0:
        raise ValueError("K must be positive")
    return K / phi_prime(spec, find_kappa(spec))


# ---------------------------------------------------------------------------
# known laws of A(+inf), used as oracles


def dufresne_samples(kappa: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``2 / gamma_kappa`` draws."""
    return 2.0 / rng.gamma(kappa, size=n)


def _cp_shape(spec: PotentialSpec):
    p = dict(spec.params)
    c, a, b = p["c"], p["a"], p["b"]
    return c, b + 1.0, a / c - b


def cp_density(spec: PotentialSpec, x):
    """Density ``k(x)`` of A(+inf) for the drift-minus-compound-Poisson family."""
    c, p, q = _cp_shape(spec)
    x = np.asarray(x, dtype=float)
    lognorm = (p * math.log(c) + special.gammaln(p + q) - special.gammaln(q) - special.gammaln(p))
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.exp(lognorm + (p - 1.0) * np.log(x) - (p + q) * np.log1p(c * x)), 0.0)


def cp_cdf(spec: PotentialSpec, x):
    c, p, q = _cp_shape(spec)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return special.betainc(p, q, c * x / (1.0 + c * x))


def cp_ppf(spec: PotentialSpec, u):
    c, p, q = _cp_shape(spec)
    y = special.betaincinv(p, q, np.asarray(u, dtype=float))
    return y / (c * (1.0 - y))


def cp_samples(spec: PotentialSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from ``k``."""
    return cp_ppf(spec, rng.random(n))
