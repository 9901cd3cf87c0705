"""Command-line interface.

Subcommands: run (execute an experiment config), accept (acceptance
suite), oracle (optimal return of an environment), check-invariance
(information-measure invariance report), exploit-demo (seed-coupled
reward-bonus demonstration).  Exit codes: 0 ok, 2 config error,
3 runtime error, 4 acceptance/check failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .acceptance import SUITES, run_acceptance
from .environments import by_name, optimal_return_oracle
from .harness import ConfigError, load_config, run_experiment
from .robustness import check_invariance, exploitability_demo

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_FAILURE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qualia", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment sweep from a config file")
    p_run.add_argument("--config", required=True, help="TOML experiment file")
    p_run.add_argument("--trials", type=int, help="override trial count")
    p_run.add_argument("--seed", type=int, help="override master seed")
    p_run.add_argument("--out", help="override output directory")
    p_run.add_argument("--threads", type=int, help="worker processes (QUALIA_THREADS, else all cores)")

    p_acc = sub.add_parser("accept", help="run an acceptance suite")
    p_acc.add_argument("--suite", default="all", choices=sorted(SUITES))
    p_acc.add_argument("--trials", type=int, help="trial budget (default 10000 or QUALIA_ACCEPT_TRIALS)")
    p_acc.add_argument("--threads", type=int)

    p_orc = sub.add_parser("oracle", help="print an environment's optimal expected return")
    p_orc.add_argument("--env", required=True)

    p_inv = sub.add_parser("check-invariance", help="re-encoding invariance of information measures")
    p_inv.add_argument("--measure", default="entropy", choices=["entropy", "mi", "kl"])
    p_inv.add_argument("--alphabet", type=int, default=8)
    p_inv.add_argument("--trials", type=int, default=1000)
    p_inv.add_argument("--seed", type=int, default=1)
    p_inv.add_argument("--json", dest="json_path", help="write the machine-readable report here")

    p_exp = sub.add_parser("exploit-demo", help="seed-coupled reward-bonus exploitability demo")
    p_exp.add_argument("--env", default="gridworld")
    p_exp.add_argument("--c", type=float, default=1.0)
    p_exp.add_argument("--gamma-q", type=float, default=0.5)
    p_exp.add_argument("--i-max", type=int, default=10)
    p_exp.add_argument("--trials", type=int, default=10)
    p_exp.add_argument("--seed", type=int, default=7)
    p_exp.add_argument("--json", dest="json_path", help="write the machine-readable report here")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    if overrides:
        config = dataclasses.replace(config, **overrides)
    results = run_experiment(config, threads=args.threads)
    for c, res in results.items():
        final = res.returns_mean[-1]
        overall = res.returns_mean.mean()
        print(f"c={c}: mean return {overall:.4f} over {res.i_max} episodes "
              f"x {res.n_trials} trials (final episode {final:.4f})")
    if config.output_dir:
        print(f"wrote CSVs and manifest to {config.output_dir}")
    return EXIT_OK


def _cmd_accept(args) -> int:
    results = run_acceptance(args.suite, trials=args.trials, threads=args.threads)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_FAILURE if failed else EXIT_OK


def _cmd_oracle(args) -> int:
    env = by_name(args.env)
    print(f"{env.name}: optimal expected return {optimal_return_oracle(env):g}")
    return EXIT_OK


def _report(report: dict, json_path) -> int:
    status = "PASS" if report["passed"] else "FAIL"
    detail = report.get("failure") or f"max deviation {report['max_deviation']:.3e}"
    print(f"[{status}] {report['check']}: {detail}")
    if json_path:
        with open(json_path, "w") as f:
            json.dump(report, f, indent=2, default=str)
            f.write("\n")
        print(f"report written to {json_path}")
    return EXIT_OK if report["passed"] else EXIT_FAILURE


def _cmd_check_invariance(args) -> int:
    report = check_invariance(args.measure, args.alphabet, args.trials, args.seed)
    return _report(report, args.json_path)


def _cmd_exploit_demo(args) -> int:
    from .harness import default_agent_config

    env = by_name(args.env)
    report = exploitability_demo(env, default_agent_config(args.env), args.c,
                                 args.gamma_q, trials=args.trials, seed=args.seed,
                                 i_max=args.i_max)
    print(f"expected qualia shift per trial: {report.expected_qualia_shift:g}; "
          f"performance shift: {report.max_performance_deviation:g}")
    return _report(report.as_dict(), args.json_path)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "accept": _cmd_accept,
        "oracle": _cmd_oracle,
        "check-invariance": _cmd_check_invariance,
        "exploit-demo": _cmd_exploit_demo,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
