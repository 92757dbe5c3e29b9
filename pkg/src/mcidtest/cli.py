"""Command-line entry point: ``mcidtest partition|test|simulate|oracle|bench``.

Exit codes: 0 success (``test``: Same), 1 ``test`` verdict Different or a
failed benchmark, 2 bad arguments or unreadable input, 3 a matrix that is
not symmetric stochastic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench, oracle
from .chain import hitting_time_exact, simulate
from .config import ExperimentConfig
from .errors import BudgetExceeded, InvalidInput, InvalidMatrix, MCIDError, ParseError, ReducibleChain
from .io import dumps, format_trajectory, read_matrix, read_trajectory
from .linalg import as_subset
from .partition import partition_graph
from .rng import derive_seed
from .testing import identity_test_chain

DEFAULT_SEED = 0


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def resolve_seed(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("MCIDTEST_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise CLIError(f"MCIDTEST_SEED is not an integer: {env!r}", 2) from None
    return DEFAULT_SEED


def load_config(path) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path) as fh:
            doc = json.load(fh)
        return ExperimentConfig.from_dict(doc)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"bad config {path}: {exc}", 2) from None


def _matrix(path):
    try:
        return read_matrix(path)
    except OSError as exc:
        raise CLIError(str(exc), 2) from None
    except ParseError as exc:
        raise CLIError(f"{path}: {exc}", 2) from None
    except InvalidMatrix as exc:
        raise CLIError(f"{path}: {exc}", 3) from None


def _subset(text, n):
    if not text:
        return as_subset((), n)
    try:
        members = [int(x) for x in text.split(",") if x.strip()]
        return as_subset(members, n)
    except (ValueError, InvalidInput) as exc:
        raise CLIError(f"bad state set {text!r}: {exc}", 2) from None


def _beta(args, cfg) -> float:
    if args.beta is not None:
        return args.beta
    if cfg.beta_override is not None:
        return cfg.beta_override
    return (args.eps if args.eps is not None else cfg.eps) / 16.0


def cmd_partition(args, out) -> int:
    cfg = load_config(args.config)
    P = _matrix(args.matrix)
    part = partition_graph(P, _beta(args, cfg), resolve_seed(args.seed), cfg.constants)
    out.write(part.to_json() + "\n")
    return 0


def cmd_test(args, out) -> int:
    cfg = load_config(args.config)
    eps = args.eps if args.eps is not None else cfg.eps
    P = _matrix(args.matrix)
    try:
        w = read_trajectory(args.trajectory, P.n)
    except OSError as exc:
        raise CLIError(str(exc), 2) from None
    except InvalidInput as exc:
        raise CLIError(f"{args.trajectory}: {exc}", 2) from None
    if w.n != P.n:
        raise CLIError(f"trajectory is over {w.n} states, matrix over {P.n}", 2)
    seed = resolve_seed(args.seed)
    part = None
    if args.beta is not None or cfg.beta_override is not None:
        part = partition_graph(P, _beta(args, cfg), derive_seed(seed, 0), cfg.constants)
    v = identity_test_chain(w, P, eps, seed, partition=part, constants=cfg.constants)
    out.write(v.to_json() + "\n")
    return 0 if v.same else 1


def cmd_simulate(args, out) -> int:
    P = _matrix(args.matrix)
    if not 0 <= args.start < P.n:
        raise CLIError(f"start state {args.start} outside [0, {P.n})", 2)
    if args.length < 1:
        raise CLIError("length must be at least 1", 2)
    w = simulate(P, args.start, args.length, resolve_seed(args.seed))
    text = format_trajectory(w)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_oracle(args, out) -> int:
    P = _matrix(args.matrix)
    n = P.n
    doc = {"query": args.query}
    if args.query == "sparsest-cut":
        universe = _subset(args.universe, n) if args.universe else None
        S, value = oracle.sparsest_cut_exact(P, universe, _subset(args.T, n))
        doc.update({"set": list(S.members), "value": value})
    elif args.query == "cheeger":
        doc["value"] = oracle.cheeger_exact(P)
    elif args.query == "internal-expansion":
        doc["value"] = oracle.min_internal_expansion_exact(P, _subset(args.set, n))
    elif args.query == "low-info":
        T = _subset(args.T, n)
        doc["value"] = oracle.min_low_info_ratio(P, T)
        if args.floor is not None:
            doc["holds"] = bool(doc["value"] >= args.floor)
    elif args.query == "hitting-time":
        doc["value"] = hitting_time_exact(P)
    out.write(dumps(doc) + "\n")
    return 0


def cmd_bench(args, out) -> int:
    cfg = load_config(args.config)
    try:
        over = {}
        if args.trials is not None:
            over["trials"] = args.trials
        if args.seed is not None or os.environ.get("MCIDTEST_SEED"):
            over["master_seed"] = resolve_seed(args.seed)
        if args.eps is not None:
            over["eps"] = args.eps
        if args.beta is not None:
            over["beta_override"] = args.beta
        if over:
            doc = cfg.as_dict()
            doc.update(over)
            cfg = ExperimentConfig.from_dict(doc)
    except (ValueError, KeyError) as exc:
        raise CLIError(str(exc), 2) from None
    only = None
    if args.only:
        try:
            only = sorted({int(x) for x in args.only.split(",")})
        except ValueError:
            raise CLIError(f"bad criterion list {args.only!r}", 2) from None
        if not set(only) <= set(bench.CRITERIA):
            raise CLIError(f"criteria are numbered 1-{len(bench.CRITERIA)}", 2)

    def show(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = bench.run_suite(cfg, only, max(1, args.threads), on_result=show)
    out.write(json.dumps(bench.report(cfg, results), indent=2) + "\n")
    return 0 if all(r.ok for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help="master seed (default: $MCIDTEST_SEED, else 0)")
    common.add_argument("--eps", type=float, default=None, help="distance parameter (default 0.3)")
    common.add_argument("--beta", type=float, default=None, help="partition tolerance (default eps/16)")
    common.add_argument("--config", default=None, help="JSON experiment config")
    common.add_argument("--threads", type=int, default=1, help="worker threads for trials")

    p = argparse.ArgumentParser(prog="mcidtest", description="Identity testing of symmetric Markov chains.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("partition", parents=[common], help="split the state space into components")
    sp.add_argument("matrix")
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("test", parents=[common], help="test a trajectory against a matrix")
    sp.add_argument("matrix")
    sp.add_argument("trajectory")
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("simulate", parents=[common], help="simulate a trajectory")
    sp.add_argument("matrix")
    sp.add_argument("--length", type=int, required=True)
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("oracle", parents=[common], help="exact values by enumeration")
    sp.add_argument("query", choices=["sparsest-cut", "cheeger", "internal-expansion", "low-info", "hitting-time"])
    sp.add_argument("matrix")
    sp.add_argument("--T", default="", help="comma-separated states")
    sp.add_argument("--set", default="", help="comma-separated states")
    sp.add_argument("--universe", default="", help="comma-separated states")
    sp.add_argument("--floor", type=float, default=None)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("bench", parents=[common], help="run the acceptance suite")
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--only", default=None, help="comma-separated criterion numbers")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except CLIError as exc:
        print(f"mcidtest: {exc}", file=sys.stderr)
        return exc.code
    except InvalidMatrix as exc:
        print(f"mcidtest: {exc}", file=sys.stderr)
        return 3
    except (InvalidInput, BudgetExceeded, ReducibleChain) as exc:
        print(f"mcidtest: {exc}", file=sys.stderr)
        return 2
    except MCIDError as exc:
        print(f"mcidtest: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
