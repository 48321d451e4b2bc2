"""The generalised Ornstein-Uhlenbeck process ``Z_t = exp(V_t) U(a(t))``.

U is a two-dimensional squared Bessel process independent of V and
``a(t) = int_0^t exp(-V_s) ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _engine
from .functionals import DEFAULT_STEP, inverse_clock, sample_A_infinity
from .potential import (PotentialPath, PotentialSpec, _write_rows, find_kappa, laplace_exponent,
                        phi_prime, simulate_path)


class RegimeError(ValueError):
    """A closed-form moment was requested outside the range of kappa where it holds."""


def besq2_step(u, dt, rng: np.random.Generator):
    """Exact BESQ(2) transition: ``(sqrt(u) + g1 sqrt(dt))^2 + (g2 sqrt(dt))^2``."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(np.asarray(dt) <= 0):
        raise ValueError("need u >= 0 and dt > 0")
    out = _engine.besq2_move(np.broadcast_to(u, np.broadcast(u, dt).shape), dt, rng)
    return float(out[0]) if u.ndim == 0 and np.ndim(dt) == 0 else out


@dataclass
class ZPath:
    times: np.ndarray
    values: np.ndarray
    clock: np.ndarray
    potential: PotentialPath

    @property
    def U(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.values * np.exp(-self.potential.values)

    def to_csv(self, dest) -> None:
        rows = zip(self.times, self.potential.values, self.clock, self.U, self.values)
        _write_rows(dest, ["t", "V", "a", "U", "Z"],
                    ([f"{v:.12g}" for v in row] for row in rows))


def simulate_Z(spec: PotentialSpec, z0: float, horizon: float, step: float,
               rng: np.random.Generator) -> ZPath:
    """One path of Z started from ``z0`` on the points of a simulated potential path.

    U is advanced by :func:`besq2_step` over the clock increments of each
    cell; at a jump the clock does not move and Z is multiplied by
    ``exp(jump)``.
    """
    if z0 < 0:
        raise ValueError("z0 must be nonnegative")
    path = simulate_path(spec, horizon, step, rng)
    clock = inverse_clock(path, path.x)
    n = path.x.size
    g = rng.standard_normal((n - 1, 2))
    Z = np.empty(n)
    Z[0] = z0
    # local form of the squared Bessel move, see _engine.z_batch
    dv = np.diff(path.values)
    dx = np.diff(path.x)
    local_clock = 0.5 * dx * (1.0 + np.exp(-dv))
    s = np.sqrt(local_clock)
    growth = np.exp(dv)
    z = float(z0)
    for i in range(n - 1):
        if path.is_jump[i + 1]:
            z *= growth[i]
        else:
            z = growth[i] * ((math.sqrt(z) + g[i, 0] * s[i]) ** 2 + (g[i, 1] * s[i]) ** 2)
        Z[i + 1] = z
    return ZPath(path.x.copy(), Z, clock, path)


def simulate_Z_batch(spec: PotentialSpec, n: int, z0: float, horizon: float, step: float,
                     rng: np.random.Generator, snapshot_times=()):
    """Terminal values (and optional snapshots) of ``n`` independent Z paths."""
    res = _engine.z_batch(spec, n, z0, horizon, step, rng, snapshot_times=snapshot_times)
    return res.final, res.snapshots


def sample_Z_infinity(spec: PotentialSpec, eps: float, rng: np.random.Generator,
                      n: int | None = None, step: float = DEFAULT_STEP):
    """Stationary draws ``U(1) * A(+inf)`` with ``U(1) ~ Exp(mean 2)``."""
    if n is None:
        a = sample_A_infinity(spec, eps, rng, step=step).value
        return float(rng.exponential(2.0) * a)
    a, _, _ = sample_A_infinity(spec, eps, rng, n=n, step=step)
    return rng.exponential(2.0, size=n) * a


def _require_kappa(spec, lower, what):
    kappa = find_kappa(spec)
    if kappa <= lower:
        raise RegimeError(f"{what} requires kappa > {lower:g} (got kappa = {kappa:.6g})")
    return kappa


def stationary_mean(spec: PotentialSpec) -> float:
    """``m = -2 / Phi(1)``, defined when kappa > 1."""
    _require_kappa(spec, 1.0, "the stationary mean m")
    return -2.0 / laplace_exponent(spec, 1.0)


def mean_Z(spec: PotentialSpec, z: float, t: float) -> float:
    """``E_z[Z_t] = m + (z - m) exp(t Phi(1))``."""
    _require_kappa(spec, 1.0, "mean_Z")
    m = stationary_mean(spec)
    return m + (z - m) * math.exp(t * laplace_exponent(spec, 1.0))


def second_moment_Z0(spec: PotentialSpec, t: float, rtol: float = 1e-12) -> float:
    """``E_0[Z_t^2]``; picks the equal-exponent branch when Phi(1) == Phi(2)."""
    _require_kappa(spec, 2.0, "second_moment_Z0")
    p1 = laplace_exponent(spec, 1.0)
    p2 = laplace_exponent(spec, 2.0)
    base = 16.0 * (-math.expm1(t * p2)) / (p1 * p2)
    if abs(p1 - p2) <= rtol * max(abs(p1), abs(p2)):
        return base + 16.0 * t / p1 * math.exp(t * p1)
    return base + 16.0 * (math.exp(t * p2) - math.exp(t * p1)) / (p1 * (p2 - p1))


def stationary_tail_constant(spec: PotentialSpec, K: float) -> float:
    """``lim x^kappa P(Z_inf > x) = 2^kappa Gamma(kappa + 1) K / Phi'(kappa)``."""
    kappa = find_kappa(spec)
    return 2.0 ** kappa * math.gamma(kappa + 1.0) * K / phi_prime(spec, kappa)


def second_moment_Z0_quadrature(spec: PotentialSpec, t: float) -> float:
    """``E_0[Z_t^2]`` as ``16 int_{0<u<v<t} exp(u Phi(2) + (v - u) Phi(1)) du dv``.

    Independent of :func:`second_moment_Z0`: it integrates the two-point
    moment of ``exp(V)`` instead of using the closed form.
    """
    from scipy import integrate

    p1 = float(laplace_exponent(spec, 1.0))
    p2 = float(laplace_exponent(spec, 2.0))
    val, _ = integrate.dblquad(lambda u, v: math.exp(u * p2 + (v - u) * p1), 0.0, t,
                               lambda v: 0.0, lambda v: v, epsabs=1e-13, epsrel=1e-12)
    return 16.0 * val
