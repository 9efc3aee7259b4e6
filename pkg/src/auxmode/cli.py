"""Command-line front end.

Exit status: 0 success, 2 usage error, 3 data error, 4 numeric or model
breakdown.  Failures print one line to stderr of the form::

    auxmode: error code=3 kind=data message="row 5: non-numeric value 'a' in column 'x'"
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import report
from .dataset import GeneratorConfig, format_csv, generate_population, load_csv, summarize
from .density import DensityMethod
from .errors import DataError, ModelBreakdownError
from .estimators import ScalarChoice
from .simulation import (
    SimConfig,
    coverage_study,
    default_grid,
    exact_intervals,
    run_simulation,
    scalar_sweep,
)
from .theory import compute_population_theory, mode_moments, optimal_scalars, theory_report

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BREAKDOWN = 0, 2, 3, 4
DEFAULT_SIZES = (51, 101, 151, 201, 251, 301)

SIM_COLUMNS = ["n", "estimator", "re_percent", "sim_mse", "exact_mse", "exact_over_sim_ratio",
               "arb", "coverage_percent", "mean_estimate", "lower_quartile", "median",
               "upper_quartile", "sim_ci_lower", "sim_ci_upper", "valid_reps", "excluded"]
SWEEP_COLUMNS = ["L1", "exact_mse", "sim_mse", "excluded", "flagged", "is_opt"]
COVERAGE_COLUMNS = ["n", "estimator", "estimate", "exact_lower", "exact_upper", "exact_mse",
                    "coverage_percent", "sim_ci_lower", "sim_ci_upper", "mean_estimate",
                    "lower_quartile", "median", "upper_quartile"]
SUMMARY_COLUMNS = ["variable", "min", "lower_quartile", "median", "mean", "upper_quartile", "max"]


def diagnostic(code: int, kind: str, message: str) -> str:
    return f"auxmode: error code={code} kind={kind} message={json.dumps(message)}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(diagnostic(EXIT_USAGE, "usage", message), file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------- flag types

def _size_list(text: str) -> tuple:
    try:
        sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("empty sample-size list")
    return sizes


def _scalar(text: str):
    if text.strip().lower() == "opt":
        return "opt"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'opt' or a number, got {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("scalar must be finite")
    return value


def _grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    if not (step > 0 and stop >= start and all(map(math.isfinite, (start, stop, step)))):
        raise argparse.ArgumentTypeError("grid needs finite start <= stop and step > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count > 100000:
        raise argparse.ArgumentTypeError("grid has more than 100000 points")
    return [start + i * step for i in range(count)]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned integer seed, got {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="auxmode", description="Mode estimation with auxiliary information.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(sp, fmt=True):
        sp.add_argument("--input", required=True, help="population CSV with y,x columns")
        sp.add_argument("--out", help="output file (default: stdout)")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"),
                            help="output format (default: from --out suffix, else per command)")
        sp.add_argument("--density", choices=("gamma", "kde"), default="gamma")

    g = sub.add_parser("generate", help="write a synthetic population CSV")
    g.add_argument("--n-pop", type=int, default=5000)
    g.add_argument("--shape", type=float, default=10.0)
    g.add_argument("--scale", type=float, default=0.667)
    g.add_argument("--slope", type=float, default=0.87)
    g.add_argument("--intercept", type=float, default=0.75)
    g.add_argument("--noise-sd", type=float, default=0.5)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--out", help="output CSV (default: stdout)")

    s = sub.add_parser("summarize", help="five-number summaries and means")
    s.add_argument("--input", required=True)
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"))

    t = sub.add_parser("theory", help="population theory and exact MSEs")
    add_common(t)
    t.add_argument("--n", type=_size_list, default=DEFAULT_SIZES)
    t.add_argument("--l1", type=_scalar, default="opt")
    t.add_argument("--k1", type=_scalar, default="opt")

    for name, helptext in (("simulate", "Monte Carlo study"),
                           ("coverage", "exact intervals and simulated coverage")):
        sp = sub.add_parser(name, help=helptext)
        add_common(sp)
        sp.add_argument("--n", type=_size_list, default=DEFAULT_SIZES)
        sp.add_argument("--reps", type=_positive_int, default=10000)
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--l1", type=_scalar, default="opt")
        sp.add_argument("--k1", type=_scalar, default="opt")
        sp.add_argument("--threads", type=_positive_int, help="worker threads (speed only)")

    w = sub.add_parser("sweep", help="MSE of the transformed ratio estimator over an L1 grid")
    add_common(w)
    w.add_argument("--n", type=_positive_int, default=151)
    w.add_argument("--grid", type=_grid, help="start:stop:step, e.g. --grid=-2:12:0.5 (default: around the optimum)")
    w.add_argument("--reps", type=_positive_int, default=10000)
    w.add_argument("--seed", type=_seed, default=0)
    w.add_argument("--threads", type=_positive_int)

    r = sub.add_parser("report", help="render a JSON report to SVG charts")
    r.add_argument("--input", required=True, help="JSON written by simulate, coverage or sweep")
    r.add_argument("--out", required=True, help="output directory")
    return p


# ---------------------------------------------------------------- helpers

def _format(args, default: str) -> str:
    if getattr(args, "format", None):
        return args.format
    if args.out:
        suffix = Path(args.out).suffix.lower()
        if suffix in (".csv", ".json"):
            return suffix[1:]
    return default


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc.strerror}") from None


def _resolve(args, theory):
    opt = optimal_scalars(mode_moments(theory, 1), theory)
    L1 = opt.L1 if args.l1 == "opt" else args.l1
    K1 = opt.K1 if args.k1 == "opt" else args.k1
    return ScalarChoice(L1=L1, K1=K1)


def _load(args):
    pop = load_csv(args.input)
    theory = compute_population_theory(pop, DensityMethod(tag=args.density))
    return pop, theory


# ---------------------------------------------------------------- commands

def cmd_generate(args) -> None:
    cfg = GeneratorConfig(N=args.n_pop, gamma_shape=args.shape, gamma_scale=args.scale,
                          intercept=args.intercept, slope=args.slope, noise_sd=args.noise_sd,
                          seed=args.seed)
    cfg.validate()
    pop = generate_population(cfg)
    manifest = report.make_manifest("generate", {
        "n_pop": cfg.N, "shape": cfg.gamma_shape, "scale": cfg.gamma_scale,
        "slope": cfg.slope, "intercept": cfg.intercept, "noise_sd": cfg.noise_sd,
        "seed": cfg.seed})
    comment = "manifest: " + json.dumps(manifest, sort_keys=True)
    _emit(format_csv(pop, [comment]), args.out)


def cmd_summarize(args) -> None:
    pop = load_csv(args.input)
    stats = summarize(pop)
    manifest = report.make_manifest("summarize", {}, args.input)
    rows = [dict(variable=name, **report.rows_of([getattr(stats, name)])[0]) for name in ("y", "x")]
    if _format(args, "csv") == "json":
        text = report.to_json(report.document("summary", manifest, N=pop.N, rows=rows))
    else:
        text = report.to_csv(manifest, SUMMARY_COLUMNS, rows)
    _emit(text, args.out)


def cmd_theory(args) -> None:
    pop, theory = _load(args)
    scalars = _resolve(args, theory)
    reports = [theory_report(theory, n, scalars.L1, scalars.K1) for n in args.n]
    manifest = report.make_manifest("theory", {
        "n": list(args.n), "l1": scalars.L1, "k1": scalars.K1, "density": args.density},
        args.input)
    rows = report.rows_of(reports)
    if _format(args, "json") == "json":
        population = report.rows_of([theory])[0]
        population.update(rho_yx=theory.rho_yx, mode_ratio=theory.mode_ratio)
        text = report.to_json(report.document("theory", manifest, population=population,
                                              rows=rows))
    else:
        text = report.to_csv(manifest, list(rows[0]), rows)
    _emit(text, args.out)


def _sim_setup(args, command):
    pop, theory = _load(args)
    scalars = _resolve(args, theory)
    cfg = SimConfig(reps=args.reps, sample_sizes=tuple(args.n), base_seed=args.seed,
                    alpha=args.alpha, scalars=scalars,
                    density_method=DensityMethod(tag=args.density))
    cfg.validate(pop.N)
    manifest = report.make_manifest(command, {
        "n": list(args.n), "reps": args.reps, "seed": args.seed, "alpha": args.alpha,
        "l1": scalars.L1, "k1": scalars.K1, "density": args.density}, args.input)
    return pop, theory, scalars, cfg, manifest


def cmd_simulate(args) -> None:
    pop, theory, scalars, cfg, manifest = _sim_setup(args, "simulate")
    sim = run_simulation(pop, theory, cfg, threads=args.threads)
    rows = report.rows_of(sim.rows)
    if _format(args, "csv") == "json":
        text = report.to_json(report.document(
            "simulation", manifest, reps=sim.reps, alpha=sim.alpha, base_seed=sim.base_seed,
            mode_y=sim.mode_y, mode_x=sim.mode_x, L1=sim.L1, K1=sim.K1, rows=rows))
    else:
        text = report.to_csv(manifest, SIM_COLUMNS, rows)
    _emit(text, args.out)


def cmd_coverage(args) -> None:
    pop, theory, scalars, cfg, manifest = _sim_setup(args, "coverage")
    cov = coverage_study(pop, theory, cfg, threads=args.threads)
    rows = []
    for n in sorted(set(args.n)):
        exact = {e.estimator: e for e in exact_intervals(pop, theory, n, scalars, args.seed,
                                                         args.alpha)}
        for c in cov:
            if c.n != n:
                continue
            e = exact[c.estimator]
            row = report.rows_of([c])[0]
            row.update(estimate=e.estimate, exact_lower=e.lower, exact_upper=e.upper,
                       exact_mse=e.exact_mse)
            rows.append(row)
    if _format(args, "csv") == "json":
        text = report.to_json(report.document(
            "coverage", manifest, reps=cfg.reps, alpha=cfg.alpha, base_seed=cfg.base_seed,
            mode_y=theory.mode_y, mode_x=theory.mode_x, L1=scalars.L1, K1=scalars.K1,
            rows=rows))
    else:
        text = report.to_csv(manifest, COVERAGE_COLUMNS, rows)
    _emit(text, args.out)


def cmd_sweep(args) -> None:
    pop, theory = _load(args)
    if not 1 < args.n <= pop.N:
        raise DataError(f"sample size {args.n} outside (1, N={pop.N}]")
    grid = args.grid
    if grid is None:
        grid = default_grid(optimal_scalars(mode_moments(theory, args.n), theory).L1)
    sw = scalar_sweep(pop, theory, args.n, grid, args.reps, args.seed, threads=args.threads)
    manifest = report.make_manifest("sweep", {
        "n": args.n, "grid": [float(g) for g in grid], "reps": args.reps, "seed": args.seed,
        "density": args.density}, args.input)
    rows = report.rows_of(sw.rows)
    if _format(args, "csv") == "json":
        text = report.to_json(report.document(
            "sweep", manifest, n=sw.n, reps=sw.reps, seed=sw.seed, L1_opt=sw.L1_opt,
            exact_naive=sw.exact_naive, exact_ratio=sw.exact_ratio, sim_naive=sw.sim_naive,
            sim_ratio=sw.sim_ratio, rows=rows))
    else:
        text = report.to_csv(manifest, SWEEP_COLUMNS, rows)
    _emit(text, args.out)


def cmd_report(args) -> None:
    for path in report.render_report(args.input, args.out):
        print(path)


COMMANDS = {
    "generate": cmd_generate,
    "summarize": cmd_summarize,
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "coverage": cmd_coverage,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except ModelBreakdownError as exc:
        print(diagnostic(EXIT_BREAKDOWN, "breakdown", str(exc)), file=sys.stderr)
        return EXIT_BREAKDOWN
    except DataError as exc:
        print(diagnostic(EXIT_DATA, "data", str(exc)), file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
