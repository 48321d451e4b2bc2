"""Command-line front end: ``python -m levydiff <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

from . import functionals, gou, harness, limits, suites
from .config import FileConfig, load_config, parse_potential
from .potential import (AssumptionError, find_kappa, laplace_exponent, phi_prime, simulate_path,
                        validate_assumptions)

KIND_HELP = {
    "K-estimate": "Monte Carlo K = E[A(inf)^(kappa-1)] against its closed form",
    "Z-infinity-tail": "Hill index and x^kappa P(Z_inf > x) of the stationary law",
    "moment-check": "E_z[Z_t], E_0[Z_t^2] or E[Z_inf] against the closed-form moments",
    "theorem-verify": "normalised I(r) against the stable, Cauchy or Gaussian limit law",
    "dufresne": "law of A(inf) against 2/gamma_kappa or the beta-prime density",
    "cross-validate": "direct hitting times H(r) against the reduced functional I(r)",
    "tail-probe": "log-linear decay of P(tau > t) for a hitting time of Z",
}

SIM_KINDS = {
    "Ainf": "A(inf) samples with truncation error bounds",
    "Zinf": "stationary samples U(1) A(inf)",
    "I": "I(r) = int_0^r Z_s ds from Z_0 = 0",
    "H": "direct hitting times of level r (censored at --max-time)",
    "zpath": "one path of Z on [0, r] with columns t,V,a,U,Z",
    "path": "one path of the potential on [0, r] with columns x,V,is_jump",
}


class CliError(Exception):
    pass


def _epilog() -> str:
    kinds = "\n".join(f"  {k:<16} {v}" for k, v in KIND_HELP.items())
    sims = "\n".join(f"  {k:<16} {v}" for k, v in SIM_KINDS.items())
    names = "\n".join(f"  {k:<16} {v[1]}" for k, v in suites.SUITES.items())
    return (f"experiment kinds (run --config FILE):\n{kinds}\n\nsimulate kinds:\n{sims}\n\n"
            f"verify suites:\n{names}\n\n"
            f"The default worker count comes from ${harness.WORKERS_ENV} (1 if unset).")


def _common(p: argparse.ArgumentParser, sampling: bool = True) -> None:
    p.add_argument("--config", help="INI experiment file")
    p.add_argument("--potential", help="family:key=value,... e.g. drifted_brownian:delta=3")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    if sampling:
        p.add_argument("--samples", type=int)
        p.add_argument("--r", type=float)
        p.add_argument("--step", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levydiff", description="Hitting times of diffusions in spectrally negative Levy potentials.",
        epilog=_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="kappa, Phi values, K and the limit regime of a potential")
    _common(p, sampling=False)
    p.add_argument("--samples", type=int, help="Monte Carlo size for K when no closed form exists")
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("simulate", help="write raw samples or paths",
                       epilog="\n".join(f"  {k:<8} {v}" for k, v in SIM_KINDS.items()),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("kind", choices=tuple(SIM_KINDS))
    _common(p)
    p.add_argument("--max-time", type=float, default=math.inf)

    p = sub.add_parser("verify", help="run a named verification suite; exit 0 iff every row passes")
    p.add_argument("suite")
    _common(p)

    p = sub.add_parser("tail", help="stationary tail experiment (Z-infinity-tail)")
    _common(p)

    p = sub.add_parser("cross-validate", help="direct hitting times against I(r)")
    _common(p)

    p = sub.add_parser("run", help="run the experiment described by --config",
                       epilog="\n".join(f"  {k:<16} {v}" for k, v in KIND_HELP.items()),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p)
    p.add_argument("--kind", choices=tuple(KIND_HELP))
    return parser


# ---------------------------------------------------------------------------
# helpers


def _file_config(args) -> FileConfig:
    fc = load_config(args.config) if args.config else FileConfig()
    if args.potential:
        fc.spec = parse_potential(args.potential)
    return fc


def _value(args, fc, flag, key, default=None, required=False):
    val = getattr(args, flag, None)
    if val is None:
        val = fc.experiment.get(key, default)
    if val is None and required:
        raise CliError(f"missing --{flag.replace('_', '-')} (or '{key}' in the config file)")
    return val


def _workers(args, fc) -> int:
    w = _value(args, fc, "workers", "workers")
    return int(w) if w is not None else harness.default_workers()


def _experiment_config(args, fc, kind) -> harness.ExperimentConfig:
    if fc.spec is None:
        raise CliError("no potential given (use --potential or a [potential] section)")
    return harness.ExperimentConfig(
        kind=kind, spec=fc.spec,
        n=int(_value(args, fc, "samples", "samples", required=True)),
        step=float(_value(args, fc, "step", "step", functionals.DEFAULT_STEP)),
        eps=float(_value(args, fc, "epsilon", "epsilon", 1e-4)),
        seed=int(_value(args, fc, "seed", "seed", 0)),
        r=_value(args, fc, "r", "r"),
        workers=_workers(args, fc), options=dict(fc.options))


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_table(table: harness.ResultTable, args) -> None:
    fmt = args.format or "json"
    if args.out:
        harness.write_results(table, args.out, fmt)
        print(table.render())
    else:
        harness.write_results(table, sys.stdout, fmt)
    for row in table.failures():
        print(row.failure_line(), file=sys.stderr)
    print(f"wall time {table.wall_time:.2f} s", file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args) -> int:
    fc = _file_config(args)
    spec = fc.spec
    if spec is None:
        raise CliError("no potential given (use --potential or a [potential] section)")
    report = validate_assumptions(spec)
    if not report.valid:
        print("\n".join(report.lines()), file=sys.stderr)
        return 3
    kappa = find_kappa(spec)
    rows = [("potential", spec.describe()), ("kappa", kappa),
            ("Phi(1)", laplace_exponent(spec, 1.0)), ("Phi(2)", laplace_exponent(spec, 2.0)),
            ("Phi'(kappa)", phi_prime(spec, kappa))]
    if kappa > 1 + limits.CASE_BOUNDARY_TOL:
        rows.append(("m", gou.stationary_mean(spec)))
    K = functionals.exact_K(spec)
    if K is not None:
        rows.append(("K (exact)", K))
    elif limits.select_case(kappa) in ("a", "c"):
        n = args.samples or 20_000
        est = functionals.estimate_K(spec, n, args.epsilon or 1e-4,
                                     harness.block_rng(args.seed or 0, "constants/K", 0))
        K = est.estimate
        rows.append(("K (estimated)", f"{est.estimate:.6g} +/- {est.half_width:.2g} (N={n})"))
    regime = limits.theorem_constants(spec, K)
    rows += [("case", regime.case), ("normalisation exponent", regime.exponent),
             ("centering", regime.centering), ("limit law", regime.law.describe())]
    rows += [(k, v) for k, v in regime.constants.items() if k not in dict(rows)]
    if args.format:
        table = harness.ResultTable(metadata={"potential": spec.to_dict(), "regime": regime.to_dict()})
        for k, v in rows[1:]:
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                table.add(harness.ResultRow("constants", k, float(v)))
        _emit(table.to_json() if args.format == "json" else table.to_csv(), args.out)
        return 0
    width = max(len(k) for k, _ in rows)
    lines = [f"{k:<{width}}  {v:.10g}" if isinstance(v, float) else f"{k:<{width}}  {v}" for k, v in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate(args) -> int:
    fc = _file_config(args)
    if fc.spec is None:
        raise CliError("no potential given (use --potential or a [potential] section)")
    spec = fc.spec
    seed = int(_value(args, fc, "seed", "seed", 0))
    step = float(_value(args, fc, "step", "step", functionals.DEFAULT_STEP))
    eps = float(_value(args, fc, "epsilon", "epsilon", 1e-4))
    kind = args.kind
    header = {"kind": kind, "potential": spec.describe(), "seed": seed, "step": step}
    tag = f"simulate/{kind}"
    if kind in ("zpath", "path"):
        r = float(_value(args, fc, "r", "r", required=True))
        header["r"] = r
        rng = harness.block_rng(seed, tag, 0)
        text = _header(header)
        buf = io.StringIO()
        if kind == "zpath":
            gou.simulate_Z(spec, float(fc.options.get("z0", 0.0)), r, step, rng).to_csv(buf)
        else:
            simulate_path(spec, r, step, rng).to_csv(buf)
        _emit(text + buf.getvalue(), args.out)
        return 0
    n = int(_value(args, fc, "samples", "samples", required=True))
    workers = _workers(args, fc)
    header["n"] = n
    if kind == "Ainf":
        header["epsilon"] = eps
        vals, bounds = harness.sample_blocks("ainf", spec, {"eps": eps, "step": step}, n, seed, tag, workers)
        cols, data = ["A_inf", "error_bound"], zip(vals, bounds)
    elif kind == "Zinf":
        header["epsilon"] = eps
        z = harness.sample_blocks("zinf", spec, {"eps": eps, "step": step}, n, seed, tag, workers)
        cols, data = ["Z_inf"], zip(z)
    else:
        r = float(_value(args, fc, "r", "r", required=True))
        header["r"] = r
        if kind == "I":
            v = harness.sample_blocks("I", spec, {"r": r, "step": step}, n, seed, tag, workers)
        else:
            header["max_time"] = args.max_time
            v = harness.sample_blocks("H", spec, {"r": r, "step": step, "max_time": args.max_time},
                                      n, seed, tag, workers)
        cols, data = [kind], zip(v)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in data:
        w.writerow([format(float(x), ".12g") for x in row])
    _emit(_header(header) + buf.getvalue(), args.out)
    return 0


def _header(meta: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


def cmd_verify(args) -> int:
    if args.suite not in suites.SUITES:
        print(f"unknown suite {args.suite!r}; available suites: {', '.join(suites.SUITES)}",
              file=sys.stderr)
        return 2
    fc = load_config(args.config) if args.config else FileConfig()
    ov = suites.Overrides(n=_value(args, fc, "samples", "samples"), r=_value(args, fc, "r", "r"),
                          step=_value(args, fc, "step", "step"), eps=_value(args, fc, "epsilon", "epsilon"))
    table = suites.run_suite(args.suite, seed=int(_value(args, fc, "seed", "seed", 0)),
                             workers=_workers(args, fc), overrides=ov)
    _emit_table(table, args)
    return 0 if table.passed else 1


def _run_kind(args, kind) -> int:
    fc = _file_config(args)
    table = harness.run_experiment(_experiment_config(args, fc, kind))
    _emit_table(table, args)
    return 0 if table.passed else 1


def cmd_tail(args) -> int:
    return _run_kind(args, "Z-infinity-tail")


def cmd_cross_validate(args) -> int:
    return _run_kind(args, "cross-validate")


def cmd_run(args) -> int:
    fc = _file_config(args)
    kind = args.kind or fc.experiment.get("kind")
    if kind is None:
        raise CliError("no experiment kind (use --kind or 'kind' in [experiment])")
    return _run_kind(args, kind)


COMMANDS = {"constants": cmd_constants, "simulate": cmd_simulate, "verify": cmd_verify,
            "tail": cmd_tail, "cross-validate": cmd_cross_validate, "run": cmd_run}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except AssumptionError as exc:
        print("\n".join(exc.report.lines()), file=sys.stderr)
        return 3
    except (CliError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
