"""Command line entry point.

    smcbarrier --config configs/table1.toml --output out/table1
    smcbarrier --config cfg.toml --method mc,smc --steps 1,4,16 --reps 10 \
               --particles 20000 --seed 7 --monitoring discrete --format json

Exit codes: 0 success, 2 configuration error, 3 numerical failure in a
series evaluation.  SMCBARRIER_THREADS controls parallelism across
repetitions (prices are unaffected; only timings can change).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import ConfigError, SeriesNotConverged
from .harness import emit, load_config, run_experiment, summarize


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smcbarrier",
                                description="Barrier option pricing experiments: "
                                            "standard vs sequential Monte Carlo.")
    p.add_argument("--config", required=True, help="TOML experiment configuration")
    p.add_argument("--method", help="comma-separated methods, e.g. mc,smc")
    p.add_argument("--steps", help="comma-separated step counts, e.g. 1,2,4,8")
    p.add_argument("--particles", type=int, help="paths / particles per run")
    p.add_argument("--reps", type=int, help="independent repetitions per cell")
    p.add_argument("--seed", type=int, help="base seed; rep i uses seed+i")
    p.add_argument("--monitoring", choices=("continuous", "discrete"))
    p.add_argument("--output", default="out", help="output directory (default: out)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="summary format (records are always CSV)")
    return p


def _apply_overrides(cfg, args):
    updates = {}
    if args.method:
        updates["methods"] = tuple(m.strip() for m in args.method.split(",") if m.strip())
    if args.steps:
        try:
            updates["steps"] = tuple(int(s) for s in args.steps.split(",") if s.strip())
        except ValueError as exc:
            raise ConfigError(f"steps: expected comma-separated integers, got {args.steps!r}") from exc
    if args.particles is not None:
        updates["particles"] = args.particles
    if args.reps is not None:
        updates["repetitions"] = args.reps
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.monitoring:
        updates["monitoring"] = args.monitoring
    if not updates:
        return cfg
    return dataclasses.replace(cfg, **updates).validate()


def _print_summary(report, file=sys.stdout):
    print(f"{'N':>5} {'mc_price':>12} {'mc_se%':>8} {'smc_price':>12} {'smc_se%':>8} "
          f"{'kappa':>8} {'psi':>8}", file=file)
    for row in report.rows:
        mc = row.stats.get("mc")
        smc = row.stats.get(report.smc_method) if report.smc_method else None

        def cell(value, width, digits):
            return f"{value:>{width}.{digits}g}" if value is not None else " " * width

        print(f"{row.n_steps:>5} "
              f"{cell(mc.mean_price if mc else None, 12, 6)} "
              f"{cell(mc.rel_stderr_pct if mc else None, 8, 3)} "
              f"{cell(smc.mean_price if smc else None, 12, 6)} "
              f"{cell(smc.rel_stderr_pct if smc else None, 8, 3)} "
              f"{cell(row.kappa, 8, 4)} "
              f"{cell(row.psi, 8, 3)}", file=file)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        records = run_experiment(cfg)
        report = summarize(records)
        written = emit(report, records, args.format, args.output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SeriesNotConverged as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _print_summary(report)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
