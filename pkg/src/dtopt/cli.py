"""Command-line interface.

Exit codes follow one convention everywhere: 0 for a positive result,
2 for a well-formed negative result (infeasible instance, incorrect
tree, solver/oracle mismatch), 1 for any error.
"""

from __future__ import annotations

import argparse
import sys
import time

from .errors import DtoptError
from .fileio import parse_instance, parse_tree, print_instance, print_tree, to_dot
from .generator import VARIANTS, generate_instance, generate_search_instance
from .model import tree_cost, verify_tree
from .oracle import MAX_ORACLE_N, subset_dp_cost
from .solver import SolveMode, greedy_baseline, solve


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_instance(path: str):
    return parse_instance(_read(path))


def _mode(name: str) -> SolveMode:
    return SolveMode.FULL if name == "full" else SolveMode.HEAVIEST_FIRST_ONLY


def cmd_solve(args) -> int:
    instance = _load_instance(args.instance)
    result = solve(instance, mode=_mode(args.mode))
    if args.stats:
        s = result.stats
        for field in (
            "subproblems",
            "dict_size",
            "stage1_tests",
            "stage2_tests",
            "canonical_drops",
            "max_candidates",
        ):
            print(f"{field} {getattr(s, field)}", file=sys.stderr)
        print(f"wall_ms {s.wall_ms:.2f}", file=sys.stderr)
    if result.status != "optimal":
        print("infeasible")
        return 2
    print(f"cost {result.cost}")
    if args.tree_out:
        _write(args.tree_out, print_tree(result.tree, instance) + "\n")
    if args.dot_out:
        _write(args.dot_out, to_dot(result.tree, instance))
    return 0


def cmd_verify(args) -> int:
    instance = _load_instance(args.instance)
    tree = parse_tree(_read(args.tree), instance)
    report = verify_tree(tree, instance)
    print(f"correct {str(report.correct).lower()}")
    print(f"cost {report.cost}")
    print(f"irreducible {str(report.irreducible).lower()}")
    print(f"admissible {str(report.admissible).lower()}")
    print(f"heaviest_first {str(report.heaviest_first).lower()}")
    for v in report.violations:
        print(f"violation {v}")
    return 0 if report.correct else 2


def cmd_check(args) -> int:
    instance = _load_instance(args.instance)
    if instance.n > args.max_n:
        print(
            f"error: instance has n={instance.n}, over the --max-n {args.max_n} cap",
            file=sys.stderr,
        )
        return 1
    result = solve(instance)
    oracle = subset_dp_cost(instance)
    solver_cost = result.cost if result.status == "optimal" else None
    oracle_cost = None if oracle == float("inf") else int(oracle)
    print(f"solver {'infeasible' if solver_cost is None else solver_cost}")
    print(f"oracle {'infeasible' if oracle_cost is None else oracle_cost}")
    if solver_cost == oracle_cost:
        print("equal")
        return 0
    print("mismatch")
    return 2


def cmd_gen(args) -> int:
    instance = generate_instance(
        args.variant,
        args.n,
        args.seed,
        classes=args.classes,
        weight_max=args.weight_max,
        overlap=args.overlap,
    )
    text = print_instance(instance)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    print("n,m,records,solve_ms,greedy_ratio")
    for n in sizes:
        instance = generate_search_instance(n, args.seed)
        elapsed = []
        result = None
        for _ in range(args.reps):
            t0 = time.perf_counter()
            result = solve(instance)
            elapsed.append((time.perf_counter() - t0) * 1000.0)
        assert result is not None and result.status == "optimal"
        greedy = greedy_baseline(instance)
        ratio = greedy.cost / result.cost if result.cost else 1.0
        mean_ms = sum(elapsed) / len(elapsed)
        print(
            f"{instance.n},{instance.m},{result.stats.dict_size},"
            f"{mean_ms:.2f},{ratio:.4f}"
        )
    return 0


def cmd_dot(args) -> int:
    instance = _load_instance(args.instance)
    if args.solve:
        result = solve(instance)
        if result.status != "optimal":
            print("infeasible", file=sys.stderr)
            return 2
        tree = result.tree
    else:
        tree = parse_tree(_read(args.tree), instance)
    sys.stdout.write(to_dot(tree, instance))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtopt",
        description="Exact minimum-cost two-way comparison decision trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["full", "hf"], default="full")
    p.add_argument("--tree-out", metavar="PATH")
    p.add_argument("--dot-out", metavar="PATH")
    p.add_argument("--stats", action="store_true", help="counters to stderr")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="verify a tree against an instance")
    p.add_argument("instance")
    p.add_argument("tree")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check", help="cross-check the solver against the subset oracle")
    p.add_argument("instance")
    p.add_argument("--max-n", type=int, default=min(12, MAX_ORACLE_N))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--variant", choices=list(VARIANTS), default="standard")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--weight-max", type=int, default=100)
    p.add_argument("--overlap", type=float, default=0.0)
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="benchmark CSV to stdout")
    p.add_argument("--sizes", default="25,50,100")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dot", help="render a tree as Graphviz DOT")
    p.add_argument("instance")
    p.add_argument("tree", nargs="?")
    p.add_argument("--solve", action="store_true", help="solve and render the result")
    p.set_defaults(func=cmd_dot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command == "dot" and bool(args.tree) == bool(args.solve):
        print("error: dot needs a tree file or --solve (not both)", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (DtoptError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
