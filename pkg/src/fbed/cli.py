"""Command-line entry point: ``fbed select``, ``fbed simulate-mt``, ``fbed simulate-mb``.

Exit codes: 0 success, 1 data or numerical error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .criteria import AIC, BIC, EBIC, LRTest, default_gamma
from .dataset import DatasetError, load_csv
from .experiments import k_label, run_mb_recovery, run_mt_simulation
from .graphs import GraphError
from .selection import fbed, fbs


class UsageError(Exception):
    pass


def parse_k(text: str) -> int | float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer or 'inf', got {text!r}")
    if k < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return k


def _default_threads() -> int:
    env = os.environ.get("FBED_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: $FBED_THREADS or 1)")
    common.add_argument("--output", default="-", help="output file, '-' for stdout")
    common.add_argument("--format", choices=("json", "table"), default="json")

    parser = argparse.ArgumentParser(prog="fbed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", parents=[common], help="run FBS or FBED(K) on a CSV file")
    sel.add_argument("--input", required=True)
    sel.add_argument("--target", required=True)
    sel.add_argument("--criterion", choices=("it", "aic", "bic", "ebic"), required=True)
    sel.add_argument("--alpha", type=float)
    sel.add_argument("--gamma", help="EBIC gamma in [0, 1] or 'default'")
    sel.add_argument("--algorithm", choices=("fbs", "fbed"), default="fbed")
    sel.add_argument("--runs", type=parse_k, help="extra runs K for fbed (default 1)")

    mt = sub.add_parser("simulate-mt", parents=[common],
                        help="false selections on null data")
    mt.add_argument("--n", type=int, default=200)
    mt.add_argument("--p", type=int, action="append")
    mt.add_argument("--alpha", type=float, action="append")
    mt.add_argument("--reps", type=int, default=100)

    mb = sub.add_parser("simulate-mb", parents=[common],
                        help="Markov-blanket recovery with an independence oracle")
    mb.add_argument("--graphs", type=int, default=100)
    mb.add_argument("--nodes", type=int, default=10)
    mb.add_argument("--edge-prob", type=float, default=0.3)
    mb.add_argument("--latent", type=int, default=0)
    mb.add_argument("--k", type=parse_k, action="append")
    return parser


def _criterion(args, d):
    if args.criterion == "it":
        if args.alpha is None:
            raise UsageError("--alpha is required with --criterion it")
        if not 0 < args.alpha < 1:
            raise UsageError("--alpha must lie in (0, 1)")
    elif args.alpha is not None:
        raise UsageError("--alpha is only accepted with --criterion it")
    if args.gamma is not None and args.criterion != "ebic":
        raise UsageError("--gamma is only accepted with --criterion ebic")
    if args.runs is not None and args.algorithm != "fbed":
        raise UsageError("--runs is only accepted with --algorithm fbed")
    gamma = None
    if args.criterion == "ebic" and args.gamma not in (None, "default"):
        try:
            gamma = float(args.gamma)
        except ValueError:
            raise UsageError(f"--gamma must be a number or 'default', got {args.gamma!r}")
        if not 0 <= gamma <= 1:
            raise UsageError("--gamma must lie in [0, 1]")
    if d is None:
        return None
    if args.criterion == "it":
        return LRTest(args.alpha)
    if args.criterion == "aic":
        return AIC()
    if args.criterion == "bic":
        return BIC()
    if gamma is None:
        gamma = default_gamma(d.n, d.p)
    return EBIC(gamma, d.p)


def _validate(args) -> None:
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")
    if args.command == "select":
        _criterion(args, None)
    elif args.command == "simulate-mt":
        if args.reps < 1:
            raise UsageError("--reps must be >= 1")
        if args.n < 2:
            raise UsageError("--n must be >= 2")
        if any(p < 1 for p in args.p or []):
            raise UsageError("--p values must be >= 1")
        if any(not 0 < a < 1 for a in args.alpha or []):
            raise UsageError("--alpha values must lie in (0, 1)")
    elif args.command == "simulate-mb":
        if args.graphs < 1:
            raise UsageError("--graphs must be >= 1")
        if not 0 <= args.edge_prob <= 1:
            raise UsageError("--edge-prob must lie in [0, 1]")
        if not 0 <= args.latent < args.nodes:
            raise UsageError("--latent must satisfy 0 <= latent < nodes")


def select_report(args) -> dict:
    d = load_csv(args.input, args.target)
    c = _criterion(args, d)
    if args.algorithm == "fbs":
        res = fbs(d, c)
        runs = None
    else:
        runs = 1 if args.runs is None else args.runs
        res = fbed(d, c, runs)
    names = d.names
    per_run = []
    for run in range(res.runs_executed):
        per_run.append({
            "run": run,
            "included": [names[e.variable] for e in res.events("include", run)],
            "n_dropped": len(res.events("drop", run)),
        })
    return {
        "algorithm": args.algorithm,
        "runs": None if runs is None else k_label(runs),
        **c.describe(),
        "input": str(args.input),
        "target": d.target_name,
        "target_kind": d.target_kind,
        "n": d.n,
        "p": d.p,
        "selected": [names[v] for v in res.selected],
        "selected_indices": list(res.selected),
        "n_evaluations": res.n_evaluations,
        "runs_executed": res.runs_executed,
        "forward_runs": per_run,
        "removed": [names[e.variable] for e in res.events("remove")],
    }


def _select_table(rep: dict) -> str:
    lines = [f"algorithm: {rep['algorithm']}"
             + (f" (K={rep['runs']})" if rep["runs"] is not None else "")]
    crit = {k: v for k, v in rep.items() if k in ("criterion", "alpha", "gamma")}
    lines.append("criterion: " + ", ".join(f"{k}={v}" for k, v in crit.items()))
    lines.append(f"data: n={rep['n']}, p={rep['p']}, target={rep['target']} ({rep['target_kind']})")
    for r in rep["forward_runs"]:
        inc = ", ".join(r["included"]) or "-"
        lines.append(f"run {r['run']}: included {inc}; dropped {r['n_dropped']}")
    lines.append("removed: " + (", ".join(rep["removed"]) or "-"))
    lines.append("selected: " + (", ".join(rep["selected"]) or "-"))
    lines.append(f"evaluations: {rep['n_evaluations']}")
    return "\n".join(lines) + "\n"


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
    except UsageError as exc:
        parser.error(str(exc))
    threads = args.threads or _default_threads()
    try:
        if args.command == "select":
            rep = select_report(args)
            text = (json.dumps(rep, sort_keys=True, indent=2) + "\n"
                    if args.format == "json" else _select_table(rep))
        elif args.command == "simulate-mt":
            report = run_mt_simulation(args.n, args.p or [100], args.alpha or [0.05],
                                       args.reps, args.seed, threads=threads)
            text = report.to_jsonl() if args.format == "json" else report.to_table()
        else:
            report = run_mb_recovery(args.graphs, args.nodes, args.edge_prob, args.latent,
                                     args.k or [1], args.seed, threads=threads)
            text = report.to_jsonl() if args.format == "json" else report.to_table()
        _write(text, args.output)
    except (DatasetError, GraphError, ArithmeticError, OSError, ValueError) as exc:
        print(f"fbed: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
