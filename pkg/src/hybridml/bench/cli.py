"""``hybridml`` command line: run, summarize, diag, list-models.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..hybrid import HybridConfig, hybrid_log_ml, interpolation_bound_report
from ..models import describe_models
from ..rng import RngStream
from .config import ConfigError, load_config
from .runner import FRESH, POSTERIOR, ReplicationError, _model_for, read_rows, run_experiment, write_rows
from .summary import format_table, summarize, summary_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, keep exit code 2 for numerics
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hybridml", description="Marginal-likelihood estimator benchmark")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment config and write per-replication rows")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="rows CSV (default: config output, else stdout)")
    run.add_argument("--reps", type=int)
    run.add_argument("--n-mcmc", type=int, dest="n_mcmc")
    run.add_argument("--estimators", help="comma-separated estimator list")
    run.add_argument("--jobs", type=int, default=1, help="worker processes across replications")
    run.add_argument("--timing", action="store_true", help="fill wall_ms (breaks byte-identical output)")
    run.add_argument("--summary-out", help="also write the summary table as CSV")
    run.add_argument("--quiet", action="store_true")

    sm = sub.add_parser("summarize", help="summary table from a rows CSV")
    sm.add_argument("--in", dest="infile", required=True)
    sm.add_argument("--csv", action="store_true", help="emit CSV instead of an aligned table")

    dg = sub.add_parser("diag", help="hybrid error-bound report for one replication")
    dg.add_argument("--config", required=True)
    dg.add_argument("--rep", type=int, default=0)
    dg.add_argument("--seed", type=int)
    dg.add_argument("--n-mcmc", type=int, dest="n_mcmc")
    dg.add_argument("--fresh", type=int, default=0, help="fresh posterior draws for the coverage estimate")
    dg.add_argument("--cells", help="write the per-cell breakdown CSV here")

    sub.add_parser("list-models", help="models and their parameters")
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    estimators = None
    if args.estimators:
        estimators = tuple(t.strip() for t in args.estimators.split(",") if t.strip())
    cfg = cfg.with_overrides(seed=args.seed, reps=args.reps, n_mcmc=args.n_mcmc, estimators=estimators,
                             timing=True if args.timing else None)
    out = args.out or cfg.output
    progress = None
    if not args.quiet:
        def progress(rep):
            print(f"\rreplication {rep + 1}/{cfg.reps}", end="", file=sys.stderr, flush=True)
    rows = run_experiment(cfg, jobs=args.jobs, progress=progress)
    if progress:
        print(file=sys.stderr)
    summary = summarize(rows)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            write_rows(rows, fh)
        sys.stdout.write(format_table(summary))
    else:
        write_rows(rows, sys.stdout)
        sys.stderr.write(format_table(summary))
    if args.summary_out:
        Path(args.summary_out).write_text(summary_csv(summary))
    return EXIT_OK


def _cmd_summarize(args) -> int:
    try:
        with open(args.infile, newline="") as fh:
            rows = read_rows(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.infile}: {exc.strerror}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not rows:
        raise ConfigError(f"{args.infile} has no rows")
    summary = summarize(rows)
    sys.stdout.write(summary_csv(summary) if args.csv else format_table(summary))
    return EXIT_OK


def _cmd_diag(args) -> int:
    cfg = load_config(args.config).with_overrides(seed=args.seed, n_mcmc=args.n_mcmc)
    model, truth = _model_for(cfg, args.rep)
    root = RngStream(cfg.seed, args.rep)
    samples = model.sample_posterior(root.child(POSTERIOR), cfg.n_mcmc)
    fresh_rng = root.child(FRESH)
    hc = HybridConfig(cfg.hybrid.tree, cfg.hybrid.representative_rule, args.fresh or cfg.hybrid.fresh_sample_count)
    est = hybrid_log_ml(samples, model.psi(samples), hc,
                        fresh_sampler=lambda k: model.sample_posterior(fresh_rng, k))
    print(f"model                 {cfg.model} (rep {args.rep}, J={cfg.n_mcmc}, dim={model.dim})")
    print(f"truth                 {truth.value:.6f} ({truth.method}"
          + (f", se {truth.se:.3g})" if truth.se is not None else ")"))
    print(f"error (truth - est)   {truth.value - est.log_z:.6f}")
    sys.stdout.write(interpolation_bound_report(est))
    if args.cells:
        Path(args.cells).write_text(est.cells_csv())
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "summarize":
            return _cmd_summarize(args)
        if args.command == "diag":
            return _cmd_diag(args)
        sys.stdout.write(describe_models() + "\n")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReplicationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
