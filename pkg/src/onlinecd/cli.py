"""Command line entry point.

    onlinecd run --config exp.ini [--out DIR] [--seed N] [--replications N]
    onlinecd compare --config exp.ini
    onlinecd bounds --config exp.ini [--strict]
    onlinecd plotdata --out DIR
    onlinecd selftest

Exit codes: 0 success, 2 config error, 3 numerical infeasibility (strict
bound checks, zero or singular steps), 4 I/O error.
"""
from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, validate
from .experiment import compare_rules, emit_plot_data, execute, run_experiment, write_artifacts
from .problems import SingularMatrixError
from .regret import ConvergenceError
from .schedules import ZeroStepsizeError

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.problem.seed = cfg.run.seed = args.seed
    if args.replications is not None:
        cfg.run.replications = args.replications
    if args.out is not None:
        cfg.run.out = args.out
    validate(cfg)
    return cfg


def _print_checks(res, strict: bool) -> int:
    code = EXIT_OK
    for chk in res.checks:
        rep = chk.report
        if not rep.feasible:
            status = "INFEASIBLE: " + "; ".join(rep.hypothesis_violations)
        else:
            status = f"value={rep.value:.6g} regret={chk.regret:.6g} holds={chk.holds}"
        print(f"{chk.evaluator} [{chk.rule}] {status}")
        if strict and not chk.ok:
            code = EXIT_INFEASIBLE
    return code


def cmd_run(args) -> int:
    cfg = _load(args)
    arts = run_experiment(cfg)
    for rule, rr in arts.result.results.items():
        print(f"{rule}: final static regret {rr.final_static:.6g}, dynamic {rr.final_dynamic:.6g}")
    print(f"wrote {arts.out_dir}")
    return _print_checks(arts.result, cfg.bounds.strict)


def cmd_bounds(args) -> int:
    cfg = _load(args)
    if not cfg.bounds.evaluators:
        raise ConfigError("[bounds] evaluators is empty, nothing to check")
    res = execute(cfg)
    write_artifacts(res, cfg.run.out)
    return _print_checks(res, cfg.bounds.strict or args.strict)


def cmd_compare(args) -> int:
    cfg = _load(args)
    ranking = compare_rules(cfg)
    text = ranking.text()
    out = Path(cfg.run.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    if args.out is None and args.config is None:
        raise ConfigError("plotdata needs --out DIR (or --config to read run.out)")
    out = args.out if args.out is not None else load_config(args.config).run.out
    files = emit_plot_data(out)
    print(f"wrote {len(files)} series files")
    return EXIT_OK


def selftest() -> list:
    """Small end-to-end checks; returns (name, passed) pairs."""
    from .config import parse_config
    from .core import uniform_partition
    from .engine import run_online
    from .problems import fd_check_gradient, gen_quadratic_sequence
    from .schedules import Schedule, doubling_stepsize

    checks = []
    seq = gen_quadratic_sequence(4, 30, seed=0)
    sched = Schedule.constant(0.01)
    x0 = np.zeros(4)
    part = uniform_partition(4, 1)
    full = run_online(seq, "full", sched, 30, x0, part)
    same = all(np.array_equal(run_online(seq, r, sched, 30, x0, part, seed=1).xs, full.xs)
               for r in ("random", "cyclic", "gauss_southwell"))
    checks.append(("single block collapses to the full step", same))
    rng = np.random.default_rng(0)
    checks.append(("gradient oracle", max(fd_check_gradient(seq, int(t), rng.normal(size=4))
                                          for t in rng.integers(1, 31, size=5)) < 1e-6))
    checks.append(("doubling schedule", doubling_stepsize(5) == 0.5))
    cfg_text = ("[problem]\nn = 3\nT = 20\nseed = 2\n[algorithm]\nrules = random, cyclic\n"
                "[schedule]\nkind = constant\nalpha = 0.01\n[run]\nreplications = 2\nworkers = 1\n")
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        run_experiment(parse_config(cfg_text), a)
        run_experiment(parse_config(cfg_text), b)
        names = sorted(p.name for p in Path(a).iterdir())
        checks.append(("deterministic artifacts", all(
            (Path(a) / n).read_bytes() == (Path(b) / n).read_bytes() for n in names)))
    return checks


def cmd_selftest(args) -> int:
    failed = 0
    for name, ok in selftest():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        failed += not ok
    return EXIT_OK if not failed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onlinecd", description="Online block coordinate descent experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file")
    common.add_argument("--out", help="output directory (overrides run.out)")
    common.add_argument("--seed", type=int, help="override problem.seed and run.seed")
    common.add_argument("--replications", type=int, help="override run.replications")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, helptext in (
        ("run", cmd_run, "run the configured rules and write artifacts"),
        ("compare", cmd_compare, "rank random, cyclic and gauss_southwell"),
        ("bounds", cmd_bounds, "evaluate the configured regret bounds"),
        ("plotdata", cmd_plotdata, "write two-column plot series from a run directory"),
        ("selftest", cmd_selftest, "quick internal consistency checks"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.set_defaults(func=func)
        if name == "bounds":
            p.add_argument("--strict", action="store_true", help="exit 3 on any infeasible or violated bound")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("run", "compare", "bounds") and args.config is None:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ZeroStepsizeError, SingularMatrixError, ConvergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
