"""Seeded, block-parallel Monte Carlo experiments and their result tables.

Random streams are derived per block: block ``j`` of a sampling task tagged
``tag`` uses ``SeedSequence(seed, spawn_key=(crc32(tag), j))``. Block sizes
are fixed per task, so the samples (and every statistic computed from them)
do not depend on how many workers ran the blocks.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import _engine, diffusion, functionals, gou, limits
from .potential import PotentialSpec, find_kappa
from .stats import (hill_tail_index, iqr, ks_distance, ks_standard_error, ks_two_sample,
                    moment_check, variance_ci)

KINDS = ("K-estimate", "Z-infinity-tail", "moment-check", "theorem-verify", "dufresne",
         "cross-validate", "tail-probe")

WORKERS_ENV = "LEVYDIFF_WORKERS"

BLOCK_SIZES = {"ainf": 10_000, "zinf": 10_000, "zt": 10_000, "I": 500, "H": 1000, "hit": 2500,
               "oracle": 10_000, "law": 10_000}


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if w < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1")
    return w


@dataclass
class ExperimentConfig:
    kind: str
    spec: PotentialSpec | None
    n: int
    step: float = functionals.DEFAULT_STEP
    eps: float = 1e-4
    seed: int = 0
    r: float | None = None
    workers: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.n < 1:
            raise ValueError("sample count must be >= 1")
        if not (self.step > 0 and self.eps > 0):
            raise ValueError("step and epsilon must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.r is not None and self.r <= 0:
            raise ValueError("r must be positive")
        if self.spec is None:
            raise ValueError(f"experiment kind {self.kind!r} needs a potential")

    def opt(self, key, default=None):
        return self.options.get(key, default)

    def metadata(self) -> dict:
        return {"kind": self.kind, "potential": self.spec.to_dict() if self.spec else None,
                "n": self.n, "step": self.step, "epsilon": self.eps, "seed": self.seed,
                "r": self.r, "options": _jsonable(self.options)}


# ---------------------------------------------------------------------------
# result tables


@dataclass
class ResultRow:
    """One statistic. ``passed`` is ``|value - target| <= ci`` when a target is present.

    For threshold checks (e.g. a KS distance below 0.015) the row carries
    target 0 and ``ci`` equal to the threshold; for relative tolerances
    ``ci`` is the tolerance in absolute units.
    """

    module: str
    name: str
    value: float
    ci: float | None = None
    target: float | None = None
    provenance: str = ""
    tolerance: str = ""

    @property
    def statistic(self) -> str:
        return f"{self.module}.{self.name}"

    @property
    def passed(self) -> bool | None:
        if self.target is None or self.ci is None:
            return None
        if not (math.isfinite(self.value) and math.isfinite(self.ci)):
            return False
        return bool(abs(self.value - self.target) <= self.ci)

    def failure_line(self) -> str:
        return (f"FAIL {self.statistic}: value {_fmt(self.value)} vs target {_fmt(self.target)} "
                f"({self.provenance}; tolerance {self.tolerance or _fmt(self.ci)})")

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "module": self.module, "value": _fmt(self.value),
                "ci": _fmt(self.ci), "target": _fmt(self.target), "provenance": self.provenance,
                "tolerance": self.tolerance, "pass": self.passed}


def rtol_row(module, name, value, target, rtol, provenance, ci_note="") -> ResultRow:
    return ResultRow(module, name, value, rtol * abs(target), target, provenance,
                     f"relative {rtol:g}{ci_note}")


def ci_row(module, name, value, half_width, target, provenance) -> ResultRow:
    return ResultRow(module, name, value, half_width, target, provenance, "95% CI covers target")


def upper_row(module, name, value, bound, provenance) -> ResultRow:
    return ResultRow(module, name, value, bound, 0.0, provenance, f"<= {bound:g}")


def range_row(module, name, value, lo, hi, provenance) -> ResultRow:
    return ResultRow(module, name, value, (hi - lo) / 2.0, (hi + lo) / 2.0, provenance,
                     f"in [{lo:g}, {hi:g}]")


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def add(self, row: ResultRow) -> ResultRow:
        self.rows.append(row)
        return row

    def extend(self, other: "ResultTable") -> None:
        self.rows.extend(other.rows)
        self.wall_time += other.wall_time

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if r.passed is False]

    def to_json(self) -> str:
        # wall time is deliberately left out: the JSON must be byte-stable
        payload = {"metadata": _jsonable(self.metadata), "rows": [r.to_dict() for r in self.rows],
                   "pass": self.passed}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["statistic", "value", "ci", "target", "provenance", "pass"])
        for r in self.rows:
            d = r.to_dict()
            w.writerow([d["statistic"], d["value"], d["ci"], d["target"], d["provenance"],
                        "" if d["pass"] is None else str(d["pass"]).lower()])
        return buf.getvalue()

    def render(self) -> str:
        lines = []
        for r in self.rows:
            mark = {True: "pass", False: "FAIL", None: "----"}[r.passed]
            tgt = "" if r.target is None else f" target {_fmt(r.target)} ({r.tolerance})"
            lines.append(f"[{mark}] {r.statistic} = {_fmt(r.value)}{tgt}")
        return "\n".join(lines)


def write_results(table: ResultTable, dest, fmt: str = "json") -> None:
    """Write ``table`` as CSV or JSON to a path, or to a text stream."""
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    text = table.to_json() if fmt == "json" else table.to_csv()
    if hasattr(dest, "write"):
        dest.write(text)
        return
    with open(dest, "w", newline="") as fh:
        fh.write(text)


def _fmt(v):
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".10g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# block-parallel sampling


def block_rng(seed: int, tag: str, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(tag.encode()), block))
    return np.random.Generator(np.random.PCG64(ss))


def _sample_block(task: str, spec_dict, params: dict, count: int, seed: int, tag: str, block: int):
    spec = PotentialSpec.from_dict(spec_dict) if spec_dict is not None else None
    rng = block_rng(seed, tag, block)
    p = params
    if task == "ainf":
        vals, _, bounds = functionals.sample_A_infinity(spec, p["eps"], rng, n=count, step=p["step"])
        return np.stack([vals, bounds])
    if task == "zinf":
        return gou.sample_Z_infinity(spec, p["eps"], rng, n=count, step=p["step"])
    if task == "zt":
        final, _ = gou.simulate_Z_batch(spec, count, p["z0"], p["t"], p["step"], rng)
        return final
    if task == "I":
        return diffusion.additive_functional_I(spec, p["r"], p["step"], rng, n=count)
    if task == "H":
        return diffusion.simulate_H_direct(spec, p["r"], p["step"], rng, n=count, move=p.get("move"),
                                           max_time=p.get("max_time", np.inf),
                                           left=p.get("left", diffusion.LEFT_BROWNIAN))
    if task == "hit":
        res = _engine.z_batch(spec, count, p["z0"], p["horizon"], p["step"], rng,
                                        hit_level=p["level"])
        return res.hit_time
    if task == "oracle":
        if p["oracle"] == "dufresne":
            return functionals.dufresne_samples(p["kappa"], count, rng)
        return functionals.cp_samples(spec, count, rng)
    if task == "law":
        law = limits.LimitLaw(p["law_kind"], p["scale"], p.get("alpha"))
        return limits.sample_limit_law(law, rng, count)
    raise ValueError(f"unknown sampling task {task!r}")


def sample_blocks(task: str, spec: PotentialSpec | None, params: dict, n: int, seed: int,
                  tag: str, workers: int = 1, block_size: int | None = None) -> np.ndarray:
    """Draw ``n`` samples for ``task`` in fixed-size blocks, merged in block order."""
    size = block_size or BLOCK_SIZES[task]
    counts = [size] * (n // size) + ([n % size] if n % size else [])
    spec_dict = spec.to_dict() if spec is not None else None
    args = [(task, spec_dict, params, c, seed, tag, j) for j, c in enumerate(counts)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(args))) as pool:
            parts = list(pool.map(_sample_block, *zip(*args)))
    else:
        parts = []
        for j, a in enumerate(args):
            try:
                parts.append(_sample_block(*a))
            except (RuntimeError, ValueError) as exc:
                raise type(exc)(f"{exc} [block {j}, samples {j * size}..{j * size + a[3] - 1}]") from exc
    return np.concatenate(parts, axis=-1)


# ---------------------------------------------------------------------------
# experiments


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Run one experiment and return its table (rows in a fixed order)."""
    t0 = time.perf_counter()
    table = ResultTable(metadata=config.metadata())
    runner = _RUNNERS[config.kind]
    runner(config, table)
    table.wall_time = time.perf_counter() - t0
    return table


def _sampler(config, tag):
    def draw(task, params, n=None, block_size=None, sub=""):
        return sample_blocks(task, config.spec, params, config.n if n is None else n, config.seed,
                             f"{config.kind}/{tag}/{sub}", config.workers, block_size)
    return draw


def _run_k_estimate(config, table):
    kappa = find_kappa(config.spec)
    draw = _sampler(config, "K")
    a = draw("ainf", {"eps": config.eps, "step": config.step})[0]
    est = functionals.K_from_samples(a, kappa)
    exact = functionals.exact_K(config.spec)
    small = config.n < 30
    if exact is None or small:
        table.add(ResultRow("functionals", "K", est.estimate, None if small else est.half_width))
        return
    rtol = config.opt("rtol", 0.03)
    table.add(rtol_row("functionals", "K_relative", est.estimate, exact, rtol,
                       "closed-form K of the potential family"))
    table.add(ci_row("functionals", "K_ci", est.estimate, est.half_width, exact,
                     "closed-form K of the potential family"))


def _run_dufresne(config, table):
    spec = config.spec
    draw = _sampler(config, "ainf")
    a = draw("ainf", {"eps": config.eps, "step": config.step})[0]
    if spec.family == "drifted_brownian":
        params = {"oracle": "dufresne", "kappa": find_kappa(spec)}
        prov = "oracle: direct 2/gamma_kappa sampling"
    elif spec.family == "drift_minus_cp":
        params = {"oracle": "beta_prime"}
        prov = "oracle: inverse-CDF sampling of the closed-form density"
    else:
        raise ValueError("no closed-form law of A(+inf) for the mixed family")
    ref = draw("oracle", params, sub="oracle")
    table.add(upper_row("functionals", f"A_inf_ks_kappa{find_kappa(spec):.6g}", ks_two_sample(a, ref), config.opt("ks_max", 0.015),
                        prov))


def _run_z_tail(config, table):
    spec = config.spec
    kappa = find_kappa(spec)
    z = _sampler(config, "zinf")("zinf", {"eps": config.eps, "step": config.step})
    frac = config.opt("top_fraction", 0.01)
    x = config.opt("x", 50.0)
    band = config.opt("hill_band", 0.1)
    hill = hill_tail_index(z, frac)
    table.add(range_row("gou", "hill_index", hill, kappa * (1 - band), kappa * (1 + band),
                        "Cramer root kappa"))
    K = functionals.exact_K(spec)
    emp = x ** kappa * float((z > x).mean())
    if K is None:
        table.add(ResultRow("gou", f"tail_x{x:g}", emp))
    else:
        table.add(rtol_row("gou", f"tail_x{x:g}", emp, gou.stationary_tail_constant(spec, K),
                           config.opt("rtol", 0.15), "stationary tail constant from closed-form K"))


def _run_moment_check(config, table):
    spec = config.spec
    moment = config.opt("moment", "Z_inf")
    rtol = config.opt("rtol", 0.02)
    draw = _sampler(config, moment)
    # targets first: a moment outside its range of kappa fails before any sampling
    if moment == "Z_inf":
        target, name, power = gou.stationary_mean(spec), "E_Z_inf", 1
        prov = "stationary mean m = -2/Phi(1)"
        z = draw("zinf", {"eps": config.eps, "step": config.step})
    elif moment in ("Z_t", "Z_t^2"):
        t = config.opt("t", 1.0)
        z0 = config.opt("z0", 1.0) if moment == "Z_t" else 0.0
        if moment == "Z_t":
            target, name, power = gou.mean_Z(spec, z0, t), f"E_z{z0:g}_Z_{t:g}", 1
            prov = "first-moment formula m + (z - m) exp(t Phi(1))"
        else:
            target, name, power = gou.second_moment_Z0(spec, t), f"E_0_Z_{t:g}^2", 2
            prov = "second-moment formula"
        z = draw("zt", {"z0": z0, "t": t, "step": config.step})
    else:
        raise ValueError(f"unknown moment {moment!r}")
    name += config.opt("label", "")
    if config.n < 30:
        table.add(ResultRow("gou", name, float(np.mean(z ** power))))
        return
    chk = moment_check(z, target, rtol=rtol, power=power)
    table.add(rtol_row("gou", name, chk.value, target, rtol, prov,
                       f"; 95% CI half-width {chk.half_width:.3g}"))


def _run_theorem(config, table):
    spec = config.spec
    if config.r is None:
        raise ValueError("theorem-verify needs r")
    r = config.r
    K = functionals.exact_K(spec)
    kappa = find_kappa(spec)
    if K is None and limits.select_case(kappa) in ("a", "c"):
        K = functionals.estimate_K(spec, 20_000, config.eps, block_rng(config.seed, "K", 0)).estimate
    regime = limits.theorem_constants(spec, K)
    table.metadata["regime"] = regime.to_dict()
    raw = _sampler(config, "I")("I", {"r": r, "step": config.step})
    y = limits.normalize_observable(regime, raw, r)
    law = regime.law
    mod = "limits"
    if config.n < 30:
        table.add(ResultRow(mod, "median", float(np.median(y))))
        return
    if regime.case == "a":
        table.add(upper_row(mod, "ks", ks_distance(y, law), config.opt("ks_max", 0.08),
                            f"limit law {law.describe()}"))
        table.add(rtol_row(mod, "median", float(np.median(y)), limits.law_median(law),
                           config.opt("median_rtol", 0.15), f"median of {law.describe()}"))
    elif regime.case == "b":
        ratio = iqr(y) / (law.scale * _cauchy_iqr())
        table.add(ResultRow(mod, "log2_iqr_ratio", math.log2(ratio), 1.0, 0.0,
                            f"Cauchy scale {law.scale:.6g} times the IQR of the standard law",
                            "IQR within a factor 2"))
    elif regime.case == "e":
        v = variance_ci(y)
        var = law.scale ** 2
        table.add(rtol_row(mod, "variance", v.mean, var, config.opt("var_rtol", 0.15),
                           "limit variance", f"; 95% CI half-width {v.half_width:.3g}"))
        table.add(upper_row(mod, "ks", ks_distance(y, law), config.opt("ks_max", 0.06),
                            f"limit law {law.describe()}"))
    else:
        table.add(upper_row(mod, "ks", ks_distance(y, law), config.opt("ks_max", 0.08),
                            f"limit law {law.describe()}"))


def _cauchy_iqr() -> float:
    law = limits.LimitLaw(limits.CAUCHY, 1.0)
    return law.quantile(0.75) - law.quantile(0.25)


def _run_cross_validate(config, table):
    """Direct hitting times against the reduced functional.

    H is censored at a cap M chosen as the ``1 - SE`` quantile of the largest
    I sample, so CDF comparisons above M are settled by ``1 - F_I(M) < 2 SE``.
    Means of H are infinite for these potentials; the mean-gap statistic uses
    means truncated at M.
    """
    r_values = sorted(config.opt("r_values", [config.r / 2.0, config.r] if config.r else [5.0, 10.0]))
    n_h = config.opt("n_direct", config.n)
    i_step = config.opt("i_step", config.step)
    h_step = config.opt("h_step", 0.05)
    move = config.opt("move", 0.1)
    draw = _sampler(config, "xv")
    I = {r: draw("I", {"r": r, "step": i_step}, sub=f"I{r:g}") for r in r_values}
    se = ks_standard_error(n_h, config.n)
    cap = float(np.quantile(I[r_values[-1]], 1.0 - se))
    cap = config.opt("max_time", cap)
    table.metadata["censoring_cap"] = cap
    gaps, medians = {}, {}
    for r in r_values:
        H = draw("H", {"r": r, "step": h_step, "move": move, "max_time": cap}, n=n_h, sub=f"H{r:g}")
        d_plus = ks_two_sample(H, I[r], one_sided=True)
        table.add(upper_row("diffusion", f"cdf_excess_r{r:g}", d_plus, 2.0 * se,
                            "H dominates I stochastically (2 KS standard errors)"))
        table.add(ResultRow("diffusion", f"censored_fraction_r{r:g}", float(np.isinf(H).mean())))
        gaps[r] = float(np.minimum(H, cap).mean() - np.minimum(I[r], cap).mean())
        medians[r] = float(np.median(H) - np.median(I[r]))
        table.add(ResultRow("diffusion", f"truncated_mean_gap_r{r:g}", gaps[r]))
        table.add(ResultRow("diffusion", f"median_gap_r{r:g}", medians[r]))
    if len(r_values) >= 2:
        lo, hi = r_values[0], r_values[-1]
        ratio = gaps[hi] / gaps[lo] if gaps[lo] != 0 else math.inf
        table.add(ResultRow("diffusion", f"mean_gap_ratio_r{hi:g}_r{lo:g}", ratio, 1.0, 1.0,
                            "bounded difference term", "in [0, 2]"))
        if medians[lo] > 0:
            table.add(ResultRow("diffusion", f"median_gap_ratio_r{hi:g}_r{lo:g}", medians[hi] / medians[lo]))


def _run_tail_probe(config, table):
    z0 = config.opt("z0", 2.0)
    level = config.opt("level", 1.0)
    t_grid = np.asarray(config.opt("t_grid", np.linspace(1.0, 5.0, 9)), dtype=float)
    tau = _sampler(config, "hit")("hit", {"z0": z0, "level": level, "horizon": float(t_grid.max()),
                                           "step": config.step})
    surv = np.array([(tau > t).mean() for t in t_grid])
    ok = surv > 0
    if ok.sum() < 3:
        table.add(ResultRow("diffusion", "r_squared", math.nan, 0.05, 1.0,
                            "exponential tail of the hitting time", "> 0.95"))
        return
    fit = sps.linregress(t_grid[ok], np.log(surv[ok]))
    table.add(ResultRow("diffusion", "decay_rate", float(-fit.slope)))
    table.add(ResultRow("diffusion", "r_squared", float(fit.rvalue ** 2), 0.05, 1.0,
                        "exponential tail of the hitting time", ">= 0.95"))


_RUNNERS = {
    "K-estimate": _run_k_estimate,
    "Z-infinity-tail": _run_z_tail,
    "moment-check": _run_moment_check,
    "theorem-verify": _run_theorem,
    "dufresne": _run_dufresne,
    "cross-validate": _run_cross_validate,
    "tail-probe": _run_tail_probe,
}

