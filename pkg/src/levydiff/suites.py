"""Named verification suites run by ``levydiff verify``.

Each suite assembles one or more experiments at pinned defaults; command-line
overrides (samples, r, step, epsilon) replace the corresponding defaults in
every experiment of the suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import gou, limits
from .harness import (BLOCK_SIZES, ExperimentConfig, ResultRow, ResultTable, run_experiment,
                      sample_blocks, upper_row)
from .potential import PotentialSpec, find_kappa
from .stats import empirical_cf_error, ks_distance

DB = PotentialSpec.drifted_brownian
CP = PotentialSpec.drift_minus_cp


@dataclass(frozen=True)
class Overrides:
    n: int | None = None
    r: float | None = None
    step: float | None = None
    eps: float | None = None


def _apply(cfg: ExperimentConfig, ov: Overrides, seed: int, workers: int) -> ExperimentConfig:
    kw = {"seed": seed, "workers": workers}
    for name in ("n", "r", "step", "eps"):
        val = getattr(ov, name)
        if val is not None:
            kw[name] = val
    return replace(cfg, **kw)


def _run_all(configs, ov, seed, workers, name) -> ResultTable:
    table = ResultTable(metadata={"suite": name, "seed": seed, "experiments": []})
    for cfg in configs:
        sub = run_experiment(_apply(cfg, ov, seed, workers))
        table.metadata["experiments"].append(sub.metadata)
        table.extend(sub)
    return table


def _kappa(seed, workers, ov):
    spec = CP(1.0, 3.0, 1.0)
    k = find_kappa(spec)
    table = ResultTable(metadata={"suite": "kappa", "seed": seed, "potential": spec.to_dict()})
    table.add(ResultRow("potential", "kappa", k, 1e-9, 2.0, "kappa = a/c - b", "absolute 1e-9"))
    return table


def _K(seed, workers, ov):
    return _run_all([ExperimentConfig("K-estimate", DB(1.5), 100_000, eps=1e-4)], ov, seed, workers, "K")


def _dufresne(seed, workers, ov):
    cfgs = [ExperimentConfig("dufresne", DB(k), 100_000, eps=1e-4) for k in (1.5, 3.0)]
    return _run_all(cfgs, ov, seed, workers, "dufresne")


def _beta_prime(seed, workers, ov):
    return _run_all([ExperimentConfig("dufresne", CP(1.0, 3.0, 1.0), 100_000, eps=1e-4)],
                    ov, seed, workers, "beta-prime")


def _moments(seed, workers, ov):
    cfgs = [
        ExperimentConfig("moment-check", DB(3.0), 100_000, step=1e-3,
                         options={"moment": "Z_t", "z0": 1.0, "t": 1.0, "rtol": 0.02}),
        ExperimentConfig("moment-check", DB(3.0), 100_000, step=1e-3,
                         options={"moment": "Z_t^2", "t": 1.0, "rtol": 0.03, "label": "_equal"}),
        ExperimentConfig("moment-check", CP(1.0, 4.0, 1.0), 100_000, step=1e-3,
                         options={"moment": "Z_t^2", "t": 1.0, "rtol": 0.05, "label": "_distinct"}),
    ]
    table = _run_all(cfgs, ov, seed, workers, "moments")
    for label, spec in (("equal", DB(3.0)), ("distinct", CP(1.0, 4.0, 1.0))):
        closed = gou.second_moment_Z0(spec, 1.0)
        table.add(ResultRow("gou", f"second_moment_formula_{label}", closed, 1e-9 * closed,
                            gou.second_moment_Z0_quadrature(spec, 1.0),
                            "double-integral oracle", "relative 1e-9"))
    return table


def _stationary(seed, workers, ov):
    cfgs = [
        ExperimentConfig("moment-check", DB(3.0), 100_000, options={"moment": "Z_inf", "rtol": 0.02}),
        ExperimentConfig("Z-infinity-tail", DB(1.5), 100_000,
                         options={"top_fraction": 0.01, "x": 50.0, "rtol": 0.15}),
    ]
    return _run_all(cfgs, ov, seed, workers, "stationary")


def _stable_limit(seed, workers, ov):
    return _run_all([ExperimentConfig("theorem-verify", DB(0.5), 2000, step=1e-3, r=100.0,
                                      options={"ks_max": 0.08, "median_rtol": 0.15})],
                    ov, seed, workers, "stable-limit")


def _cauchy_spread(seed, workers, ov):
    return _run_all([ExperimentConfig("theorem-verify", DB(1.0), 2000, r=200.0)], ov, seed, workers,
                    "cauchy-spread")


def _gaussian_limit(seed, workers, ov):
    return _run_all([ExperimentConfig("theorem-verify", DB(3.0), 2000, r=500.0,
                                      options={"var_rtol": 0.15, "ks_max": 0.06})],
                    ov, seed, workers, "gaussian-limit")


def _cross(seed, workers, ov):
    r_values = [5.0, 10.0] if ov.r is None else [ov.r / 2.0, ov.r]
    cfg = ExperimentConfig("cross-validate", DB(1.0), 5000, r=max(r_values),
                           options={"r_values": r_values})
    return _run_all([cfg], replace(ov, r=None), seed, workers, "cross-validate")


def _tail(seed, workers, ov):
    return _run_all([ExperimentConfig("tail-probe", DB(3.0), 10_000,
                                      options={"z0": 2.0, "level": 1.0,
                                               "t_grid": list(np.linspace(1.0, 5.0, 9))})],
                    ov, seed, workers, "tail-probe")


STABLE_LAWS = (
    limits.LimitLaw(limits.STABLE, 1.0, 0.5),
    limits.LimitLaw(limits.STABLE, 1.0, 1.5),
    limits.LimitLaw(limits.CAUCHY, 1.0),
    limits.LimitLaw(limits.GAUSSIAN, 1.0),
)


def _laws(seed, workers, ov):
    n = ov.n or 100_000
    table = ResultTable(metadata={"suite": "laws", "seed": seed, "n": n})
    for law in STABLE_LAWS:
        tag = law.kind if law.alpha is None else f"{law.kind}{law.alpha:g}"
        x = sample_blocks("law", None, {"law_kind": law.kind, "scale": law.scale, "alpha": law.alpha},
                          n, seed, f"laws/{tag}", workers, BLOCK_SIZES["law"])
        table.add(upper_row("limits", f"{tag}_sampler_vs_inversion_ks", ks_distance(x, law), 0.01,
                            f"CF inversion of {law.describe()}"))
        for t in (0.5, 1.0, 2.0):
            table.add(upper_row("limits", f"{tag}_cf_error_t{t:g}", empirical_cf_error(x, law, t),
                                4.0 / math.sqrt(n), f"characteristic function of {law.describe()}"))
    return table


SUITES = {
    "kappa": (_kappa, "Cramer root of the drift-minus-compound-Poisson example"),
    "K": (_K, "Monte Carlo K against its closed form, kappa = 1.5"),
    "dufresne": (_dufresne, "law of A(+inf) against 2/gamma_kappa, kappa in {1.5, 3}"),
    "beta-prime": (_beta_prime, "law of A(+inf) against the beta-prime density, (c,a,b) = (1,3,1)"),
    "moments": (_moments, "first and second moments of Z_t"),
    "stationary": (_stationary, "mean and tail of the stationary law Z_inf"),
    "stable-limit": (_stable_limit, "stable limit of I(r)/r^2, kappa = 0.5"),
    "cauchy-spread": (_cauchy_spread, "Cauchy-scale spread at kappa = 1"),
    "gaussian-limit": (_gaussian_limit, "Gaussian limit at kappa = 3"),
    "cross-validate": (_cross, "direct hitting times against the reduced functional"),
    "tail-probe": (_tail, "exponential tail of a hitting time of Z"),
    "laws": (_laws, "stable-law sampler, CF inversion and characteristic functions"),
}


def run_suite(name: str, seed: int = 0, workers: int = 1, overrides: Overrides | None = None) -> ResultTable:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available suites: {', '.join(SUITES)}")
    return SUITES[name][0](seed, workers, overrides or Overrides())
