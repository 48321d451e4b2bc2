"""Limit regimes of the hitting time and the laws that appear in them.

Completely asymmetric stable and Cauchy laws are described by their
characteristic functions

    stable:  E exp(itS) = exp(-|t|^alpha (1 - i sgn(t) tan(pi alpha / 2)))
    Cauchy:  E exp(itC) = exp(-(|t| + i t (2/pi) log|t|))

and a law with scale ``s`` is the law of ``s * S``. CDFs come from Gil-Pelaez
inversion of these characteristic functions; samples come from the
Chambers-Mallows-Stuck construction with skewness parameter +1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.integrate import IntegrationWarning

from .functionals import exact_K
from .potential import PotentialSpec, find_kappa, laplace_exponent, phi_prime

STABLE = "stable"
CAUCHY = "cauchy"
GAUSSIAN = "gaussian"

CASE_BOUNDARY_TOL = 1e-9
CF_CUTOFF = 1e-12
LOG_CUTOFF = -math.log(CF_CUTOFF)


class QuadratureError(RuntimeError):
    def __init__(self, x, residual):
        self.x = x
        self.residual = residual
        super().__init__(f"CF inversion did not converge at x={x!r} (error estimate {residual:.3g})")


@dataclass(frozen=True)
class LimitLaw:
    """Target law: ``scale * S`` where S is standard stable/Cauchy/Gaussian."""

    kind: str
    scale: float
    alpha: float | None = None

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.kind == STABLE:
            if self.alpha is None or not (0 < self.alpha < 2) or abs(self.alpha - 1) < 1e-12:
                raise ValueError("stable index must lie in (0,1) or (1,2)")
        elif self.kind not in (CAUCHY, GAUSSIAN):
            raise ValueError(f"unknown law {self.kind!r}")

    def cf(self, t):
        if self.kind == STABLE:
            return stable_cf(self.alpha, self.scale, t)
        if self.kind == CAUCHY:
            return cauchy_cf(self.scale, t)
        t = np.asarray(t, dtype=float)
        return np.exp(-0.5 * (self.scale * t) ** 2) + 0j

    def describe(self) -> str:
        if self.kind == STABLE:
            return f"{self.scale:.6g} * S_ca(alpha={self.alpha:.6g})"
        if self.kind == CAUCHY:
            return f"{self.scale:.6g} * C_ca"
        return f"N(0, {self.scale ** 2:.6g})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "scale": self.scale, "alpha": self.alpha}

    def cdf(self, x):
        return cdf_via_cf_inversion(self, x)

    def quantile(self, p: float) -> float:
        return law_quantile(self, p)

    def sample(self, rng: np.random.Generator, size=None):
        return sample_limit_law(self, rng, size)


def stable_cf(alpha: float, scale: float, t):
    t = np.asarray(t, dtype=float)
    st = scale * t
    return np.exp(-np.abs(st) ** alpha * (1.0 - 1j * np.sign(st) * math.tan(math.pi * alpha / 2.0)))


def cauchy_cf(scale: float, t):
    st = np.asarray(scale * np.asarray(t, dtype=float))
    a = np.abs(st)
    with np.errstate(divide="ignore", invalid="ignore"):
        logterm = np.where(a > 0, st * (2.0 / math.pi) * np.log(np.where(a > 0, a, 1.0)), 0.0)
    return np.exp(-(a + 1j * logterm))


def gaussian_cf(std: float, t):
    return LimitLaw(GAUSSIAN, std).cf(t)


# ---------------------------------------------------------------------------
# Gil-Pelaez inversion


def _t_max(law: LimitLaw) -> float:
    if law.kind == STABLE:
        return LOG_CUTOFF ** (1.0 / law.alpha) / law.scale
    if law.kind == CAUCHY:
        return LOG_CUTOFF / law.scale
    return math.sqrt(2.0 * LOG_CUTOFF) / law.scale


def _power(law: LimitLaw) -> float:
    # substitution t = u^p removes the t^(alpha-1) singularity at the origin
    if law.kind == STABLE:
        return 1.0 / law.alpha
    if law.kind == CAUCHY:
        return 2.0
    return 1.0


def _quad(f, a, b, x, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, **kw)
        except IntegrationWarning:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                val, err = integrate.quad(f, a, b, **kw)
            if not err < 1e-7:
                raise QuadratureError(x, err)
    return val, err


def _gp_direct(law: LimitLaw, x: float) -> float:
    p = _power(law)
    umax = _t_max(law) ** (1.0 / p)

    def f(u):
        if u <= 0:
            return 0.0
        t = u ** p
        val = np.imag(np.exp(-1j * t * x) * law.cf(t))
        return float(val) / t * p * u ** (p - 1.0)

    pts = np.geomspace(umax * 1e-6, umax, 24)[1:-1]
    val, _ = _quad(f, 0.0, umax, x, limit=1000, points=pts, epsabs=1e-12, epsrel=1e-10)
    return 0.5 - val / math.pi


def _gp_far(law: LimitLaw, x: float) -> float:
    """Inversion after ``t = v / |x|``; the oscillating tail goes to QAWF."""
    ax = abs(x)
    sgn = 1.0 if x > 0 else -1.0
    p = _power(law)
    split = 8.0 * math.pi

    def g(v):
        c = law.cf(v / ax)
        return (c.imag * math.cos(v) - sgn * c.real * math.sin(v)) / v

    def g_sub(w):
        if w <= 0:
            return 0.0
        v = w ** p
        return float(g(v)) * p * w ** (p - 1.0) / 1.0

    near, _ = _quad(g_sub, 0.0, split ** (1.0 / p), x, limit=1000, epsabs=1e-12, epsrel=1e-10)
    cos_part, _ = _quad(lambda v: float(law.cf(v / ax).imag) / v, split, np.inf, x,
                        weight="cos", wvar=1.0, limlst=400)
    sin_part, _ = _quad(lambda v: -sgn * float(law.cf(v / ax).real) / v, split, np.inf, x,
                        weight="sin", wvar=1.0, limlst=400)
    return 0.5 - (near + cos_part + sin_part) / math.pi


def _cdf_scalar(law: LimitLaw, x: float) -> float:
    if x == 0.0 or abs(x) <= 4.0 * law.scale:
        val = _gp_direct(law, x)
    else:
        val = _gp_far(law, x)
    return min(1.0, max(0.0, val))


def cdf_via_cf_inversion(law: LimitLaw, x):
    """``F(x) = 1/2 - (1/pi) int_0^inf Im[exp(-itx) phi(t)] / t dt``.

    Values are clamped to [0, 1]; for array input the result is made
    non-decreasing along the sorted evaluation points.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return _cdf_scalar(law, float(arr))
    flat = arr.ravel()
    order = np.argsort(flat, kind="stable")
    vals = np.array([_cdf_scalar(law, float(v)) for v in flat[order]])
    vals = np.maximum.accumulate(vals)
    out = np.empty_like(vals)
    out[order] = vals
    return out.reshape(arr.shape)


def law_quantile(law: LimitLaw, p: float) -> float:
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    lo, hi = -law.scale, law.scale
    while _cdf_scalar(law, lo) > p:
        lo *= 4.0
    while _cdf_scalar(law, hi) < p:
        hi *= 4.0
    return optimize.brentq(lambda v: _cdf_scalar(law, v) - p, lo, hi, xtol=1e-12 * law.scale)


def law_median(law: LimitLaw) -> float:
    return law_quantile(law, 0.5)


# ---------------------------------------------------------------------------
# sampling


def sample_limit_law(law: LimitLaw, rng: np.random.Generator, size=None):
    """Draws of ``scale * S`` (Chambers-Mallows-Stuck, skewness +1)."""
    if law.kind == GAUSSIAN:
        return law.scale * rng.standard_normal(size)
    u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.exponential(1.0, size)
    if law.kind == CAUCHY:
        half = math.pi / 2.0
        x = (2.0 / math.pi) * ((half + u) * np.tan(u)
                                - np.log(half * w * np.cos(u) / (half + u)))
        return law.scale * x
    a = law.alpha
    tan_term = math.tan(math.pi * a / 2.0)
    shift = math.atan(tan_term) / a
    amp = (1.0 + tan_term ** 2) ** (1.0 / (2.0 * a))
    x = (amp * np.sin(a * (u + shift)) / np.cos(u) ** (1.0 / a)
         * (np.cos(u - a * (u + shift)) / w) ** ((1.0 - a) / a))
    return law.scale * x


def empirical_cf(samples, t):
    samples = np.asarray(samples, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(1j * np.outer(t, samples)).mean(axis=1)


# ---------------------------------------------------------------------------
# regimes


@dataclass
class LimitRegime:
    """Normalisation and target law for one regime of the hitting-time limit."""

    case: str
    kappa: float
    exponent: float
    centering: str
    law: LimitLaw
    m: float | None = None
    cauchy_center_coef: float | None = None
    log_denominator: bool = False
    constants: dict = field(default_factory=dict)
    approximate_centering: bool = False

    def to_dict(self) -> dict:
        return {
            "case": self.case, "kappa": self.kappa, "exponent": self.exponent,
            "centering": self.centering, "law": self.law.to_dict(), "m": self.m,
            "log_denominator": self.log_denominator,
            "approximate_centering": self.approximate_centering,
            "constants": dict(self.constants),
        }


def select_case(kappa: float) -> str:
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if abs(kappa - 1.0) < CASE_BOUNDARY_TOL:
        return "b"
    if abs(kappa - 2.0) < CASE_BOUNDARY_TOL:
        return "d"
    if kappa < 1:
        return "a"
    if kappa < 2:
        return "c"
    return "e"


def stable_scale(kappa: float, K: float, dphi_kappa: float) -> float:
    """``2 (pi kappa^2 K^2 / (2 sin(pi kappa / 2) Phi'(kappa)))^(1/kappa)``."""
    M = math.pi * kappa ** 2 * K ** 2 / (2.0 * math.sin(math.pi * kappa / 2.0) * dphi_kappa)
    return 2.0 * M ** (1.0 / kappa)


def position_tail_constant(kappa: float, K: float, dphi_kappa: float) -> float:
    """Constant in front of ``(1/S)^kappa`` in the law of ``X_t / t^kappa`` (kappa < 1)."""
    return (2.0 ** (1.0 - kappa) * math.sin(math.pi * kappa / 2.0) * dphi_kappa
            / (math.pi * kappa ** 2 * K ** 2))


def theorem_constants(spec: PotentialSpec, K: float | None = None) -> LimitRegime:
    """Case, centering and target law of the hitting-time limit law.

    ``K`` defaults to its closed form where one exists.
    """
    kappa = find_kappa(spec)
    case = select_case(kappa)
    p1 = laplace_exponent(spec, 1.0)
    p2 = laplace_exponent(spec, 2.0)
    dk = phi_prime(spec, kappa)
    consts = {"kappa": kappa, "Phi(1)": p1, "Phi(2)": p2, "Phi'(kappa)": dk}
    m = -2.0 / p1 if kappa > 1 + CASE_BOUNDARY_TOL else None
    if m is not None:
        consts["m"] = m
    if case in ("a", "c"):
        K = exact_K(spec) if K is None else K
        if K is None:
            raise ValueError(f"case ({case}) needs the constant K (no closed form for {spec.family})")
        if K <= 0:
            raise ValueError("K must be positive")
        scale = stable_scale(kappa, K, dk)
        consts.update({"K": K, "stable_scale": scale})
        return LimitRegime(case, kappa, 1.0 / kappa, "none" if case == "a" else "m*r",
                           LimitLaw(STABLE, scale, kappa), m, constants=consts)
    if case == "b":
        d1 = phi_prime(spec, 1.0)
        scale = math.pi / d1
        coef = 2.0 / d1
        consts.update({"K": 1.0, "cauchy_scale": scale, "centering_coef": coef})
        return LimitRegime(case, kappa, 1.0, "f(r) ~ (2/Phi'(1)) r log r", LimitLaw(CAUCHY, scale),
                           None, cauchy_center_coef=coef, constants=consts, approximate_centering=True)
    if case == "d":
        coef = -4.0 / (p1 * math.sqrt(phi_prime(spec, 2.0)))
        consts.update({"gaussian_coef": coef})
        return LimitRegime(case, kappa, 0.5, "m*r", LimitLaw(GAUSSIAN, coef), m,
                           log_denominator=True, constants=consts)
    var = 8.0 * (p2 - 4.0 * p1) / (p1 ** 3 * p2)
    consts.update({"variance": var, "std": math.sqrt(var)})
    return LimitRegime(case, kappa, 0.5, "m*r", LimitLaw(GAUSSIAN, math.sqrt(var)), m,
                       constants=consts)


def normalize_observable(regime: LimitRegime, value, r: float):
    """Apply the case's centering and denominator to ``H(r)`` or ``I(r)``."""
    if r <= 0:
        raise ValueError("r must be positive")
    value = np.asarray(value, dtype=float)
    c = regime.case
    if c == "a":
        out = value / r ** (1.0 / regime.kappa)
    elif c == "b":
        out = (value - regime.cauchy_center_coef * r * math.log(r)) / r
    elif c == "c":
        out = (value - regime.m * r) / r ** (1.0 / regime.kappa)
    elif c == "d":
        out = (value - regime.m * r) / math.sqrt(r * math.log(r))
    else:
        out = (value - regime.m * r) / math.sqrt(r)
    return float(out) if out.ndim == 0 else out
