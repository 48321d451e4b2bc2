"""Spectrally negative Lévy potentials: Laplace exponents, Cramér root, paths.

Every supported family is a special case of

    V_x = sigma * B_x + drift * x - (compound Poisson with rate ``jump_rate``
          and Exp(``jump_decay``) jump sizes),

so the Laplace exponent is

    Phi(lam) = sigma**2 * lam**2 / 2 + drift * lam - jump_rate * lam / (lam + jump_decay).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

DRIFTED_BROWNIAN = "drifted_brownian"
DRIFT_MINUS_CP = "drift_minus_cp"
MIXED = "mixed"
FAMILIES = (DRIFTED_BROWNIAN, DRIFT_MINUS_CP, MIXED)

LAMBDA_MAX = 1e3


class AssumptionError(ValueError):
    """Raised when a potential violates the transience assumptions."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid potential: " + "; ".join(report.violations))


@dataclass(frozen=True)
class PotentialSpec:
    """A supported potential family together with its parameters.

    Use the constructors :meth:`drifted_brownian`, :meth:`drift_minus_cp`
    and :meth:`mixed` rather than filling the fields by hand.
    """

    family: str
    sigma: float
    drift: float
    jump_rate: float = 0.0
    jump_decay: float = 1.0
    params: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.jump_rate < 0:
            raise ValueError("jump_rate must be nonnegative")
        if self.jump_decay <= 0:
            raise ValueError("jump_decay must be positive")

    @classmethod
    def drifted_brownian(cls, delta: float) -> "PotentialSpec":
        """``V_x = B_x - (delta/2) x``; the Cramér root equals ``delta``."""
        return cls(DRIFTED_BROWNIAN, 1.0, -0.5 * delta, 0.0, 1.0, (("delta", float(delta)),))

    @classmethod
    def drift_minus_cp(cls, c: float, a: float, b: float) -> "PotentialSpec":
        """``V_x = c x - tau_x`` with ``nu[x, inf) = a exp(-b x)``."""
        if c <= 0 or a <= 0 or b <= 0:
            raise ValueError("c, a, b must be positive")
        return cls(DRIFT_MINUS_CP, 0.0, float(c), float(a), float(b),
                   (("c", float(c)), ("a", float(a)), ("b", float(b))))

    @classmethod
    def mixed(cls, sigma: float, d: float, a: float, b: float) -> "PotentialSpec":
        return cls(MIXED, float(sigma), float(d), float(a), float(b),
                   (("sigma", float(sigma)), ("d", float(d)), ("a", float(a)), ("b", float(b))))

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialSpec":
        family = data["family"]
        if family == DRIFTED_BROWNIAN:
            return cls.drifted_brownian(float(data["delta"]))
        if family == DRIFT_MINUS_CP:
            return cls.drift_minus_cp(float(data["c"]), float(data["a"]), float(data["b"]))
        if family == MIXED:
            return cls.mixed(float(data["sigma"]), float(data["d"]),
                             float(data.get("a", 0.0)), float(data.get("b", 1.0)))
        raise ValueError(f"unknown potential family {family!r}")

    def to_dict(self) -> dict:
        return {"family": self.family, **dict(self.params)}

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family}({inner})"

    @property
    def mean_increment(self) -> float:
        """E[V_1] = Phi'(0+)."""
        return self.drift - self.jump_rate / self.jump_decay


def _check_lam(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("the Laplace exponent is only defined here for lam >= 0")
    return lam


def laplace_exponent(spec: PotentialSpec, lam):
    """Phi(lam) = log E[exp(lam V_1)] for ``lam >= 0`` (scalar or array)."""
    lam = _check_lam(lam)
    out = 0.5 * spec.sigma ** 2 * lam ** 2 + spec.drift * lam
    if spec.jump_rate:
        out = out - spec.jump_rate * lam / (lam + spec.jump_decay)
    return float(out) if out.ndim == 0 else out


def phi_prime(spec: PotentialSpec, lam):
    lam = _check_lam(lam)
    out = spec.sigma ** 2 * lam + spec.drift
    if spec.jump_rate:
        out = out - spec.jump_rate * spec.jump_decay / (lam + spec.jump_decay) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass
class ValidationReport:
    mean_increment: float
    transient: bool
    not_negative_subordinator: bool
    left_side_diverges: bool = True
    violations: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        return [
            f"E[V_1] = Phi'(0+) = {self.mean_increment:.6g} ({'< 0' if self.transient else 'not < 0'})",
            f"not the opposite of a subordinator: {self.not_negative_subordinator}",
            f"left side integral of exp(V) diverges: {self.left_side_diverges}",
        ] + [f"VIOLATION: {v}" for v in self.violations]


def validate_assumptions(spec: PotentialSpec) -> ValidationReport:
    """Check transience, non-degeneracy and the left-side condition.

    The left half-line always carries an independent driftless Brownian
    motion (see :mod:`levydiff.diffusion`), for which the integral of
    ``exp(V_{-x})`` diverges almost surely.
    """
    mean = spec.mean_increment
    transient = mean < 0
    increasing_part = spec.sigma > 0 or spec.drift > 0
    violations = []
    if not transient:
        violations.append(f"E[V_1] = {mean:.6g} is not negative (potential does not drift to -inf)")
    if not increasing_part:
        violations.append("potential is the opposite of a subordinator (no Brownian part, no positive drift)")
    return ValidationReport(mean, transient, increasing_part, True, violations)


def find_kappa(spec: PotentialSpec, tol: float = 1e-12, lam_max: float = LAMBDA_MAX) -> float:
    """Unique positive root of the Laplace exponent.

    Geometric bracket expansion from ``[tol, 1]`` up to ``lam_max``, then
    bisection until the bracket is narrow, then safeguarded Newton steps.
    """
    report = validate_assumptions(spec)
    if not report.valid:
        raise AssumptionError(report)
    phi = lambda x: laplace_exponent(spec, x)  # noqa: E731
    lo = min(tol, 1e-9)
    while phi(lo) >= 0:
        # Phi'(0+) < 0 guarantees Phi < 0 just right of zero
        lo *= 1e-3
        if lo < 1e-300:
            raise ValueError("could not find a point where Phi < 0")
    hi = 1.0
    while phi(hi) <= 0:
        lo = hi
        hi *= 2.0
        if hi > lam_max:
            raise ValueError(f"no sign change of Phi below lam_max={lam_max:g}; mis-specified potential?")
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for _ in range(50):
        fx = phi(x)
        if abs(fx) <= tol:
            break
        step = fx / phi_prime(spec, x)
        nxt = x - step
        if not lo <= nxt <= hi:
            nxt = 0.5 * (lo + hi)
        if phi(nxt) > 0:
            hi = nxt
        else:
            lo = nxt
        if nxt == x:
            break
        x = nxt
    return x


# ---------------------------------------------------------------------------
# paths


@dataclass
class PotentialPath:
    """Discretised càdlàg path of V on ``[0, horizon]``.

    ``x`` is non-decreasing. A jump at location ``s`` appears as two
    consecutive entries with the same abscissa: the left limit
    (``is_jump=False``) followed by the post-jump value (``is_jump=True``).
    """

    step: float
    x: np.ndarray
    values: np.ndarray
    is_jump: np.ndarray
    horizon: float

    @property
    def jump_locations(self) -> np.ndarray:
        return self.x[self.is_jump]

    @property
    def jump_sizes(self) -> np.ndarray:
        idx = np.flatnonzero(self.is_jump)
        return self.values[idx] - self.values[idx - 1]

    def value_at(self, x):
        """Right-continuous evaluation with linear interpolation inside cells."""
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.x, x, side="right") - 1, 0, len(self.x) - 2)
        x0, x1 = self.x[i], self.x[i + 1]
        v0, v1 = self.values[i], self.values[i + 1]
        width = x1 - x0
        frac = np.where(width > 0, (x - x0) / np.where(width > 0, width, 1.0), 0.0)
        out = v0 + frac * (v1 - v0)
        return float(out) if out.ndim == 0 else out

    def to_csv(self, dest) -> None:
        rows = zip(self.x, self.values, self.is_jump)
        _write_rows(dest, ["x", "V", "is_jump"],
                    ([f"{a:.12g}", f"{b:.12g}", int(c)] for a, b, c in rows))


def _write_rows(dest, header: list, rows: Iterable) -> None:
    if hasattr(dest, "write"):
        w = csv.writer(dest, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(dest, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def jump_times(spec: PotentialSpec, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Exact compound Poisson jump locations on ``(0, horizon)``."""
    if spec.jump_rate <= 0:
        return np.empty(0)
    times = []
    t = rng.exponential(1.0 / spec.jump_rate)
    while t < horizon:
        times.append(t)
        t += rng.exponential(1.0 / spec.jump_rate)
    return np.asarray(times, dtype=float)


def simulate_path(spec: PotentialSpec, horizon: float, step: float,
                  rng: np.random.Generator) -> PotentialPath:
    """Exact-in-law path of V on a uniform grid plus the jump locations."""
    if horizon <= 0 or step <= 0:
        raise ValueError("horizon and step must be positive")
    n = max(1, int(math.ceil(horizon / step - 1e-9)))
    grid = np.minimum(np.arange(n + 1) * step, horizon)
    jumps = jump_times(spec, horizon, rng)
    sizes = rng.exponential(1.0 / spec.jump_decay, size=jumps.size) if jumps.size else jumps
    xs = np.concatenate([grid, jumps])
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    from_jump = order >= grid.size
    dx = np.diff(xs)
    incr = spec.drift * dx
    if spec.sigma > 0:
        incr = incr + spec.sigma * np.sqrt(dx) * rng.standard_normal(dx.size)
    pre = np.concatenate([[0.0], np.cumsum(incr)])
    # cumulative jump total applied from each jump location onward
    jump_total = np.zeros(xs.size)
    if jumps.size:
        jump_pos = np.flatnonzero(from_jump)
        add = np.zeros(xs.size)
        add[jump_pos] = -sizes
        jump_total = np.cumsum(add)
        before = jump_total.copy()
        before[jump_pos] -= add[jump_pos]
        # left limit then post-jump value at every jump location
        x_out = np.insert(xs, jump_pos, xs[jump_pos])
        v_post = pre + jump_total
        v_left = pre[jump_pos] + before[jump_pos]
        v_out = np.insert(v_post, jump_pos, v_left)
        flags = np.zeros(x_out.size, dtype=bool)
        flags[jump_pos + np.arange(1, jump_pos.size + 1)] = True
        return PotentialPath(step, x_out, v_out, flags, float(horizon))
    return PotentialPath(step, xs, pre, np.zeros(xs.size, dtype=bool), float(horizon))
