"""Hitting times of the diffusion: direct Brox construction and the reduced functional.

The direct simulator builds the diffusion from a driving Brownian motion B
through the scale change ``A^{-1}`` and the time change
``T(t) = int_0^t exp(-2 V(A^{-1}(B_s))) ds``; ``H(r)`` is the value of T at
the first time B reaches ``A(r)``.

B is advanced with a state-dependent time step ``(w h)^2``, where ``w`` is the
slope of A in the current cell, so each step moves the diffusion by about
``h`` in space. A fixed step in B-time would need ``exp(2 V)``-small steps
near ``r`` and is not usable at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _engine
from .functionals import scale_function
from .potential import PotentialPath, PotentialSpec, simulate_path

DIRECT = "direct"
FUNCTIONAL = "functional"

LEFT_BROWNIAN = "brownian"
LEFT_FLAT = "flat"


@dataclass
class HittingSample:
    r: float
    value: float
    method: str
    step: float


@dataclass
class TwoSidedPotential:
    """Right path of the chosen family and an independent left path.

    The left path stores ``V_{-x}`` for ``x >= 0`` on the uniform grid; it is
    a driftless standard Brownian motion (or identically zero for the flat
    test fixture) and is extended on demand.
    """

    right: PotentialPath
    left_values: np.ndarray
    left_kind: str = LEFT_BROWNIAN

    def extend_left(self, cells: int, rng: np.random.Generator) -> None:
        self.left_values = _extend_left_values(self.left_values[None, :], cells, self.right.step,
                                               self.left_kind, rng)[0]


def _extend_left_values(left, cells, dx, kind, rng):
    n = left.shape[0]
    if kind == LEFT_FLAT:
        more = np.zeros((n, cells))
    else:
        more = left[:, -1:] + np.cumsum(math.sqrt(dx) * rng.standard_normal((n, cells)), axis=1)
    return np.concatenate([left, more], axis=1)


def build_two_sided(spec: PotentialSpec, r: float, dx: float, rng: np.random.Generator,
                    left: str = LEFT_BROWNIAN, left_cells: int | None = None) -> TwoSidedPotential:
    right = simulate_path(spec, r, dx, rng)
    cells = left_cells or max(16, int(math.ceil(r / dx)))
    lv = _extend_left_values(np.zeros((1, 1)), cells, dx, left, rng)[0]
    return TwoSidedPotential(right, lv, left)


# ---------------------------------------------------------------------------
# reduced functional I(r)


def additive_functional_I(spec: PotentialSpec, r: float, step: float, rng: np.random.Generator,
                          n: int | None = None):
    """``I(r) = int_0^r Z_s ds`` with Z started from 0.

    Returns a :class:`HittingSample` when ``n`` is None, otherwise an
    array of ``n`` independent values.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    res = _engine.z_batch(spec, 1 if n is None else n, 0.0, r, step, rng, integrate=True)
    if n is None:
        return HittingSample(r, float(res.integral[0]), FUNCTIONAL, step)
    return res.integral


def integrated_mean_Z0(spec: PotentialSpec, r: float) -> float:
    """Closed form of ``E[I(r)]`` from the first-moment formula (needs Phi(1) < 0)."""
    from .gou import stationary_mean
    from .potential import laplace_exponent

    p1 = laplace_exponent(spec, 1.0)
    m = stationary_mean(spec)
    return m * r - m * (math.expm1(r * p1) / p1)


# ---------------------------------------------------------------------------
# direct construction


def _grid_tables(spec, r, dx, n, rng, left_kind, left_cells):
    """Stacked (V, A) tables on the uniform grid ``x_i = (i - L) dx``."""
    m = max(1, int(round(r / dx)))
    dx = r / m
    grid = np.arange(m + 1) * dx
    if spec.jump_rate > 0:
        Vr = np.empty((n, m + 1))
        Ar = np.empty((n, m + 1))
        for j in range(n):
            path = simulate_path(spec, r, dx, rng)
            Vr[j] = path.value_at(grid)
            Ar[j] = scale_function(path, grid)
    else:
        incr = spec.drift * dx + spec.sigma * math.sqrt(dx) * rng.standard_normal((n, m))
        Vr = np.concatenate([np.zeros((n, 1)), np.cumsum(incr, axis=1)], axis=1)
        Ar = np.concatenate([np.zeros((n, 1)),
                             np.cumsum(0.5 * dx * (np.exp(Vr[:, 1:]) + np.exp(Vr[:, :-1])), axis=1)],
                            axis=1)
    Vl = _extend_left_values(np.zeros((n, 1)), left_cells, dx, left_kind, rng)
    return dx, Vr, Ar, Vl


def _left_scale(Vl, dx):
    e = np.exp(Vl)
    return -np.concatenate([np.zeros((Vl.shape[0], 1)),
                            np.cumsum(0.5 * dx * (e[:, 1:] + e[:, :-1]), axis=1)], axis=1)


def simulate_H_direct(spec: PotentialSpec, r: float, step: float, rng: np.random.Generator,
                      n: int | None = None, move: float | None = None, max_time: float = np.inf,
                      left: str = LEFT_BROWNIAN, max_left_cells: int = 400_000):
    """Hitting time ``H(r)`` of the diffusion by the Brox construction.

    ``step`` is the spatial grid of the potential and ``move`` the typical
    spatial displacement of one driving-Brownian step (defaults to ``step``).
    Samples whose accumulated time passes ``max_time`` are censored and
    returned as ``inf``.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    single = n is None
    n = 1 if single else n
    h = step if move is None else move
    left_cells = max(64, int(math.ceil(r / step)))
    dx, Vr, Ar, Vl = _grid_tables(spec, r, step, n, rng, left, left_cells)
    Al = _left_scale(Vl, dx)
    L = Vl.shape[1] - 1

    def combined(Vl, Al):
        V = np.concatenate([Vl[:, :0:-1], Vr], axis=1)
        A = np.concatenate([Al[:, :0:-1], Ar], axis=1)
        return V, A

    V, A = combined(Vl, Al)
    width = A.shape[1]
    Af, Vf = A.ravel(), V.ravel()
    out = np.full(n, np.inf)
    # state of the live paths, compacted whenever some finish
    ids = np.arange(n)
    base = ids * width
    target = Ar[:, -1].copy()
    cell = np.full(n, L)  # x = 0 is the left end of cell L
    frac = np.zeros(n)
    B = np.zeros(n)
    T = np.zeros(n)
    while ids.size:
        k = base + cell
        a0 = Af[k]
        v0 = Vf[k]
        db = (Af[k + 1] - a0) * (h / dx)
        vx = v0 + frac * (Vf[k + 1] - v0)
        b_new = B + db * rng.standard_normal(ids.size)
        T += np.exp(-2.0 * vx) * db * db
        # bridge correction: the level may have been crossed inside the step
        gap = np.maximum(target - B, 0.0) * np.maximum(target - b_new, 0.0)
        hit = (b_new >= target) | (rng.random(ids.size) < np.exp(-2.0 * gap / (db * db)))
        B = b_new
        stop = hit | (T > max_time)
        if stop.any():
            out[ids[hit]] = T[hit]
            keep = ~stop
            ids, base, target, cell, frac, B, T = (
                ids[keep], base[keep], target[keep], cell[keep], frac[keep], B[keep], T[keep])
            if not ids.size:
                break
        # locate the new cell by a local walk
        c = cell
        while True:
            up = (c < width - 2) & (B > Af[base + c + 1])
            if not up.any():
                break
            c = c + up
        while True:
            down = (c >= 0) & (B < Af[base + np.maximum(c, 0)])
            if not down.any():
                break
            c = c - down
            if (c < 0).any():
                grow = max(L, 64)
                if L + grow > max_left_cells:
                    raise RuntimeError(
                        f"left-grid extension cap exceeded ({max_left_cells} cells); "
                        "re-run with a larger max_left_cells")
                Vl = _extend_left_values(Vl, grow, dx, left, rng)
                Al = _left_scale(Vl, dx)
                L += grow
                V, A = combined(Vl, Al)
                width = A.shape[1]
                Af, Vf = A.ravel(), V.ravel()
                base = ids * width
                c = c + grow
        cell = c
        k = base + c
        frac = (B - Af[k]) / (Af[k + 1] - Af[k])
    if single:
        return HittingSample(r, float(out[0]), DIRECT, step)
    return out


# ---------------------------------------------------------------------------
# hitting times of Z


@dataclass
class DecayReport:
    t_grid: np.ndarray
    survival: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    n: int

    def rows(self):
        return list(zip(self.t_grid.tolist(), self.survival.tolist()))


def hitting_time_tail_probe(spec: PotentialSpec, z0: float, level: float, t_grid, n: int,
                            rng: np.random.Generator, step: float = 1e-2) -> DecayReport:
    """Empirical survival ``P_{z0}(tau_level > t)`` and its log-linear fit.

    Grid points where the survival estimate is zero are left out of the fit.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    res = _engine.z_batch(spec, n, z0, float(t_grid.max()), step, rng, hit_level=level)
    tau = res.hit_time
    surv = np.array([(tau > t).mean() if t > 0 else float(z0 != level) for t in t_grid])
    ok = surv > 0
    fit = stats.linregress(t_grid[ok], np.log(surv[ok]))
    return DecayReport(t_grid, surv, float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), n)
