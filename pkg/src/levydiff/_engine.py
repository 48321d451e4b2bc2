"""Vectorised Monte Carlo kernels shared by the functional, gOU and diffusion modules.

All kernels advance a batch of independent paths on a common uniform grid.
Compound Poisson jumps are handled exactly: a cell containing jumps is split
at the jump locations and each continuous piece is advanced on its own.
Cell quadratures are trapezoidal, matching :func:`levydiff.functionals.scale_function`.
"""

from __future__ import annotations

import math

import numpy as np

from .potential import PotentialSpec


class JumpClock:
    """Next jump location for every path of a batch."""

    def __init__(self, spec: PotentialSpec, n: int, rng: np.random.Generator):
        self.rate = spec.jump_rate
        self.decay = spec.jump_decay
        self.rng = rng
        if self.rate > 0:
            self.next = rng.exponential(1.0 / self.rate, size=n)
        else:
            self.next = np.full(n, np.inf)

    def due(self, t_end: float, idx: np.ndarray | None = None) -> np.ndarray:
        nxt = self.next if idx is None else self.next[idx]
        return np.flatnonzero(nxt < t_end)

    def pop(self, idx: np.ndarray):
        """Consume the pending jump of the paths ``idx``; return (location, size)."""
        loc = self.next[idx].copy()
        size = self.rng.exponential(1.0 / self.decay, size=idx.size)
        self.next[idx] = loc + self.rng.exponential(1.0 / self.rate, size=idx.size)
        return loc, size

    def take(self, keep: np.ndarray) -> None:
        self.next = self.next[keep]


def continuous_increment(spec: PotentialSpec, h, rng: np.random.Generator, n: int):
    """Brownian-plus-drift increment over lengths ``h`` (scalar or array)."""
    dv = spec.drift * h
    if spec.sigma > 0:
        dv = dv + spec.sigma * np.sqrt(h) * rng.standard_normal(n)
    elif np.ndim(dv) == 0:
        dv = np.full(n, float(dv))
    return dv


def besq2_move(z, dclock, rng: np.random.Generator):
    """Exact dimension-2 squared Bessel transition over clock increments ``dclock``."""
    n = np.size(z)
    g = rng.standard_normal((2, n))
    s = np.sqrt(dclock)
    return (np.sqrt(z) + g[0] * s) ** 2 + (g[1] * s) ** 2


# ---------------------------------------------------------------------------
# exponential functional A(+inf)


def a_infinity_batch(spec: PotentialSpec, n: int, eps: float, step: float,
                     rng: np.random.Generator, max_horizon: float):
    """Truncated samples of ``int_0^inf exp(V)`` for ``n`` independent paths.

    A path stops at the first grid time ``h`` with ``exp(V_h) / delta_half < eps``
    where ``delta_half = |E V_1| / 2``. Returns (values, horizons, bounds).
    """
    delta_half = abs(spec.mean_increment) / 2.0
    log_stop = math.log(eps * delta_half)
    A = np.zeros(n)
    V = np.zeros(n)
    out_A = np.empty(n)
    out_h = np.empty(n)
    out_v = np.empty(n)
    alive = np.arange(n)
    clock = JumpClock(spec, n, rng)
    t = 0.0
    k = 0
    while alive.size:
        if t >= max_horizon:
            raise RuntimeError(
                f"A(inf) truncation horizon cap {max_horizon:g} exceeded for "
                f"{alive.size} path(s); the potential drifts too slowly")
        t_end = (k + 1) * step
        m = alive.size
        dv = continuous_increment(spec, step, rng, m)
        jumpers = clock.due(t_end)
        if jumpers.size == 0:
            eV = np.exp(V)
            A += step * eV * (1.0 + np.exp(dv)) * 0.5
            V += dv
        else:
            calm = np.ones(m, dtype=bool)
            calm[jumpers] = False
            eV = np.exp(V[calm])
            A[calm] += step * eV * (1.0 + np.exp(dv[calm])) * 0.5
            V[calm] += dv[calm]
            _a_jump_cells(spec, jumpers, t, t_end, A, V, clock, rng)
        t = t_end
        k += 1
        done = V < log_stop
        if done.any():
            ids = alive[done]
            out_A[ids] = A[done]
            out_h[ids] = t
            out_v[ids] = V[done]
            keep = ~done
            alive, A, V = alive[keep], A[keep], V[keep]
            clock.take(keep)
    bounds = np.exp(out_v) / delta_half
    return out_A, out_h, bounds


def _a_jump_cells(spec, idx, t0, t1, A, V, clock, rng):
    pos = np.full(idx.size, t0)
    pending = idx
    while pending.size:
        loc, size = clock.pop(pending)
        sub = np.flatnonzero(np.isin(idx, pending))
        h = loc - pos[sub]
        dv = continuous_increment(spec, h, rng, pending.size)
        A[pending] += h * np.exp(V[pending]) * (1.0 + np.exp(dv)) * 0.5
        V[pending] += dv - size
        pos[sub] = loc
        pending = pending[clock.next[pending] < t1]
    h = t1 - pos
    dv = continuous_increment(spec, h, rng, idx.size)
    A[idx] += h * np.exp(V[idx]) * (1.0 + np.exp(dv)) * 0.5
    V[idx] += dv


# ---------------------------------------------------------------------------
# generalised Ornstein-Uhlenbeck process Z


class ZBatchResult:
    """Outputs of :func:`z_batch`; unused outputs are ``None``."""

    def __init__(self, final, snapshots, integral, hit_time):
        self.final = final
        self.snapshots = snapshots
        self.integral = integral
        self.hit_time = hit_time


def z_batch(spec: PotentialSpec, n: int, z0: float, horizon: float, step: float,
            rng: np.random.Generator, snapshot_times=(), integrate: bool = False,
            hit_level: float | None = None) -> ZBatchResult:
    """Advance ``n`` copies of Z from ``z0`` on ``[0, horizon]``.

    Z is carried in the local form ``Z_{t+h} = exp(dV) * BESQ2(Z_t; dclock)``
    with ``dclock = int_t^{t+h} exp(-(V_s - V_t)) ds``, which equals
    ``exp(V_{t+h}) U(a(t+h))`` for the same Gaussian draws and never forms
    ``a(t)`` itself (it overflows on long horizons).
    """
    m = max(1, int(math.ceil(horizon / step - 1e-9)))
    h_last = horizon - (m - 1) * step
    snaps = sorted(float(s) for s in snapshot_times)
    snap_cells = [min(m, max(1, int(round(s / step)))) for s in snaps]
    snap_out = {s: None for s in snaps}
    Z = np.full(n, float(z0))
    I = np.zeros(n) if integrate else None
    hit = None
    if hit_level is not None:
        hit = np.full(n, np.inf)
        below = z0 > hit_level
        if z0 == hit_level:
            hit[:] = 0.0
    clock = JumpClock(spec, n, rng)
    all_idx = np.arange(n)
    t = 0.0
    for k in range(m):
        h = step if k < m - 1 else h_last
        t_end = t + h
        jumpers = clock.due(t_end)
        if jumpers.size == 0:
            Z_new = _z_move(spec, Z, h, rng)
            if integrate:
                I += 0.5 * h * (Z + Z_new)
            Z = Z_new
        else:
            calm = np.ones(n, dtype=bool)
            calm[jumpers] = False
            cidx = all_idx[calm]
            Zc = Z[cidx]
            Zc_new = _z_move(spec, Zc, h, rng)
            if integrate:
                I[cidx] += 0.5 * h * (Zc + Zc_new)
            Z[cidx] = Zc_new
            _z_jump_cells(spec, jumpers, t, t_end, Z, I, clock, rng)
        t = t_end
        if hit is not None:
            crossed = (Z <= hit_level) if below else (Z >= hit_level)
            new = crossed & np.isinf(hit)
            hit[new] = t
        for s, c in zip(snaps, snap_cells):
            if c == k + 1:
                snap_out[s] = Z.copy()
    return ZBatchResult(Z, snap_out, I, hit)


def _z_move(spec, Z, h, rng):
    n = np.size(Z)
    dv = continuous_increment(spec, h, rng, n)
    e = np.exp(dv)
    dclock = h * (1.0 + 1.0 / e) * 0.5
    return e * besq2_move(Z, dclock, rng)


def _z_jump_cells(spec, idx, t0, t1, Z, I, clock, rng):
    pos = np.full(idx.size, t0)
    pending = idx
    while pending.size:
        loc, size = clock.pop(pending)
        sub = np.flatnonzero(np.isin(idx, pending))
        h = loc - pos[sub]
        Zp = Z[pending]
        Zn = _z_move(spec, Zp, h, rng)
        if I is not None:
            I[pending] += 0.5 * h * (Zp + Zn)
        Z[pending] = Zn * np.exp(-size)
        pos[sub] = loc
        pending = pending[clock.next[pending] < t1]
    h = t1 - pos
    Zp = Z[idx]
    Zn = _z_move(spec, Zp, h, rng)
    if I is not None:
        I[idx] += 0.5 * h * (Zp + Zn)
    Z[idx] = Zn
