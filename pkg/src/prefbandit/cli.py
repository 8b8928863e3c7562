"""Command-line entry point: ``prefbandit <subcommand> ...``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 when
a run fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import ConfigurationError, PrefBanditError
from .estimation import estimate_beta_entropy, estimate_beta_mle
from .harness.config import load_config
from .harness.experiments import (
    SweepSpec,
    draw_instance,
    run_action_space_study,
    run_seeds,
    aggregate,
    run_sweep,
    write_regret_csvs,
    write_step_log,
    write_study_csv,
    write_sweep_csv,
)
from .harness.report import emit_theory_report
from .offline_data import read_dataset, write_dataset

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prefbandit", description="Warm-started posterior sampling experiments.")
    p.add_argument("--workers", type=int, default=1, help="processes used to run seeds in parallel")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--config", required=True)
        return c

    c = cmd("simulate", "run every configured agent and write regret curves")
    c.add_argument("--out", required=True)
    c = cmd("sweep", "final regret across values of one parameter")
    c.add_argument("--param", required=True)
    c.add_argument("--values", required=True)
    c.add_argument("--out", required=True)
    c = cmd("table1", "dimension/correlation study")
    c.add_argument("--out", required=True)
    c = cmd("theory", "write the bound report")
    c.add_argument("--out", required=True)
    c = cmd("estimate-beta", "estimate deliberateness from a dataset file")
    c.add_argument("--dataset", required=True)
    c.add_argument("--method", required=True, choices=("mle", "entropy"))
    c.add_argument("--c", type=float, default=None)
    c = cmd("tsof", "warm-started agent with online preference queries")
    c.add_argument("--cost", type=float, required=True)
    c.add_argument("--out", required=True)
    c = cmd("gen-dataset", "draw the offline dataset for base_seed")
    c.add_argument("--out", required=True)
    return p


def _simulate(args, cfg):
    runs = run_seeds(cfg, args.workers)
    write_regret_csvs(aggregate(runs, cfg.agents), args.out)


def _sweep(args, cfg):
    try:
        values = tuple(float(v) for v in args.values.split(","))
    except ValueError:
        raise UsageError(f"--values must be a comma-separated list of numbers, got {args.values!r}") from None
    spec = SweepSpec(args.param.lower(), values, cfg)
    rows = run_sweep(spec, args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(spec, rows, out / f"sweep_{spec.parameter}.csv")


def _table1(args, cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_study_csv(run_action_space_study(cfg, args.workers), out / "table1.csv")


def _theory(args, cfg):
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    emit_theory_report(cfg, out)


def _estimate_beta(args, cfg):
    d0, K, d = read_dataset(args.dataset, cfg.sampling_distribution())
    if (K, d) != (cfg.K, cfg.d):
        raise ConfigurationError(f"dataset has K={K}, d={d} but the config has K={cfg.K}, d={cfg.d}")
    if args.method == "mle":
        inst = draw_instance(cfg, cfg.base_seed)
        est = estimate_beta_mle(d0, inst.actions, cfg.prior(), cfg.resolved_agent_lambda, cfg.beta_clamp)
    else:
        c = args.c if args.c is not None else cfg.entropy_c
        est = estimate_beta_entropy(d0, K, c, cfg.beta_clamp, cfg.entropy_over)
    doc = {"method": est.method.value, "beta_hat": est.value, **est.diagnostics}
    print(json.dumps(doc, sort_keys=True))


def _tsof(args, cfg):
    if not (math.isfinite(args.cost) and args.cost >= 0):
        raise UsageError("--cost must be a finite non-negative number")
    agents = tuple(a for a in cfg.agents if a != "warmtsof") + ("warmtsof",)
    cfg = cfg.replace(tsof_cost=args.cost, agents=agents)
    runs = run_seeds(cfg, args.workers)
    write_regret_csvs(aggregate(runs, cfg.agents), args.out)
    write_step_log(runs, "warmtsof", Path(args.out) / "warmtsof_steps.csv")


def _gen_dataset(args, cfg):
    inst = draw_instance(cfg, cfg.base_seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset(out, inst.dataset, cfg.K, cfg.d)


COMMANDS = {
    "simulate": _simulate,
    "sweep": _sweep,
    "table1": _table1,
    "theory": _theory,
    "estimate-beta": _estimate_beta,
    "tsof": _tsof,
    "gen-dataset": _gen_dataset,
}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        cfg = load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrefBanditError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
