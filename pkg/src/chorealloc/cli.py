"""Command-line front end.

Exit codes: 0 success, 1 a requested property failed, 2 bad input,
3 a search budget was exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from chorealloc.allocate import ALGORITHMS, ModificationLog, solve
from chorealloc.errors import BudgetExceeded, ChoreAllocError
from chorealloc.gen import TABLES, GenSpec, gen_binary, gen_random_restricted, gen_table_instance
from chorealloc.infty import complete_graph, example1_instance, search_efx_orientation
from chorealloc.model import Instance, allocation_from_json, parse_cost, validate_instance
from chorealloc.partition import DEFAULT_NODE_BUDGET
from chorealloc.verify import (
    check_po,
    fairness_report,
    group_accounting,
    efficiency_report,
    mms_values,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

GUARANTEES = {
    "efx-mms": ("efx", "mms", "approx2"),
    "efx-mms-poly": ("efx", "mms", "approx2"),
    "ef1-mms-po": ("ef1", "mms", "po"),
}
DEFAULT_ALPHA = {"efx-mms": Fraction(1), "efx-mms-poly": Fraction(4, 3), "ef1-mms-po": Fraction(1)}
PROPERTIES = ("ef", "ef1", "efx", "mms", "po", "po-exhaustive", "approx2")


class InputError(ChoreAllocError):
    pass


def _dump(obj, out=None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_instance(path: str) -> Instance:
    return validate_instance(_load_json(path))


def _agent_order(args, n: int):
    if args.agent_order:
        try:
            return [int(x) for x in args.agent_order.split(",")]
        except ValueError:
            raise InputError(f"bad --agent-order {args.agent_order!r}") from None
    if args.seed is not None:
        order = list(range(1, n + 1))
        random.Random(args.seed).shuffle(order)
        return order
    return None


def _evaluate(instance, allocation, required, alpha, log=None, assignment=None, mms_budget=None):
    """Run the reports and return (json, failed property names)."""
    kwargs = {} if mms_budget is None else {"mms_budget": mms_budget}
    fair = fairness_report(instance, allocation, alpha=alpha, **kwargs)
    po_mode = "exhaustive" if "po-exhaustive" in required else ("sufficient" if "po" in required else None)
    if log is not None:
        eff = group_accounting(instance, allocation, log, assignment, po_mode=po_mode)
    else:
        eff = efficiency_report(instance, allocation, po_mode=po_mode)
    verdicts = {
        "ef": fair.is_ef,
        "ef1": fair.is_ef1,
        "efx": fair.is_efx,
        "mms": fair.is_alpha_mms,
        "po": eff.po if po_mode == "sufficient" else None,
        "po-exhaustive": eff.po if po_mode == "exhaustive" else None,
        "approx2": eff.social_cost <= 2 * eff.opt,
    }
    failed = [p for p in required if not verdicts[p]]
    report = {
        "fairness": fair.to_json(instance),
        "efficiency": eff.to_json(),
        "required": list(required),
        "failed": failed,
    }
    return report, failed, fair, eff


def _table(instance, fair, eff, failed) -> str:
    lines = [f"{'agent':>5}  {'cost':>10}  {'MMS':>10}  {'ratio':>8}"]
    for a in instance.agents:
        if fair.mms is not None:
            v = fair.mms[a]
            ratio = "-" if v.ratio is None else f"{float(v.ratio):.4f}"
            lines.append(f"{a:>5}  {str(v.cost):>10}  {str(v.mms):>10}  {ratio:>8}")
    lines.append(f"EF={fair.is_ef} EF1={fair.is_ef1} EFX={fair.is_efx} alpha-MMS={fair.is_alpha_mms}")
    ratio = "n/a" if eff.ratio is None else str(eff.ratio)
    lines.append(f"social cost {eff.social_cost}, OPT {eff.opt}, ratio {ratio}")
    if eff.grouped:
        lines.append(f"N0={list(eff.n0)} N1={list(eff.n1)} N2={list(eff.n2)}")
    lines.append("FAILED: " + ", ".join(failed) if failed else "all required properties hold")
    return "\n".join(lines)


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    allocation, trace = solve(instance, args.alg, _agent_order(args, instance.n), budget=args.budget)
    out = {
        "algorithm": args.alg,
        "bundles": allocation.to_json(instance),
        "social_cost": None,
    }
    report, failed, fair, eff = _evaluate(
        instance, allocation, GUARANTEES[args.alg] if args.verify else (),
        DEFAULT_ALPHA[args.alg] if args.verify else None, trace.log, trace.assignment,
    )
    out["social_cost"] = str(eff.social_cost)
    if args.trace:
        out["trace"] = trace.to_json(instance)
    if args.verify:
        out["report"] = report
        print(_table(instance, fair, eff, failed), file=sys.stderr)
    _dump(out, args.out)
    return EXIT_VIOLATION if failed else EXIT_OK


def _log_from_trace(instance, allocation, trace):
    assignment = tuple(trace["assignment"][str(a)] for a in instance.agents)
    n = instance.n
    bundles = [frozenset()] * n
    for a in instance.agents:
        bundles[assignment[a - 1]] = allocation[a]
    log = ModificationLog(tuple(trace["last_modifier"]), tuple(trace["modifications"]), tuple(bundles))
    return log, assignment


def cmd_verify(args) -> int:
    instance = load_instance(args.instance)
    raw = _load_json(args.allocation)
    if not isinstance(raw, dict) or "bundles" not in raw:
        raise InputError("allocation file needs a 'bundles' object")
    allocation = allocation_from_json(instance, raw["bundles"])
    algorithm = raw.get("algorithm")
    if args.require:
        required = [p.strip() for p in args.require.split(",") if p.strip()]
        unknown = [p for p in required if p not in PROPERTIES]
        if unknown:
            raise InputError(f"unknown properties {unknown}; choose from {', '.join(PROPERTIES)}")
    elif algorithm in GUARANTEES:
        required = list(GUARANTEES[algorithm])
    else:
        required = ["efx", "mms"]
    if args.alpha is not None:
        alpha = parse_cost(args.alpha)
    else:
        alpha = DEFAULT_ALPHA.get(algorithm, Fraction(1))
    log = assignment = None
    trace = raw.get("trace")
    if isinstance(trace, dict) and {"assignment", "last_modifier", "modifications"} <= trace.keys():
        log, assignment = _log_from_trace(instance, allocation, trace)
    report, failed, fair, eff = _evaluate(instance, allocation, required, alpha, log, assignment)
    print(_table(instance, fair, eff, failed), file=sys.stderr)
    _dump(report, args.out)
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_mms(args) -> int:
    instance = load_instance(args.instance)
    values = mms_values(instance, budget=args.budget)
    agents = [args.agent] if args.agent else list(instance.agents)
    for a in agents:
        if a not in values:
            raise InputError(f"agent {a} outside 1..{instance.n}")
    _dump({str(a): str(values[a]) for a in agents}, args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind in TABLES:
        instance = gen_table_instance(args.kind, args.eps)
    elif args.kind == "binary":
        instance = gen_binary(args.n, args.m, args.seed or 0, args.zero_prob)
    else:
        spec = GenSpec(
            args.n, args.m, parse_cost(args.low), parse_cost(args.high),
            args.zero_prob, args.seed or 0, args.denominator,
        )
        instance = gen_random_restricted(spec)
    _dump(instance.to_json(), args.out)
    return EXIT_OK


BENCH_HEADER = [
    "seed", "n", "m", "algorithm", "sc", "opt", "ratio",
    "n0", "n1", "n2", "rebalance_rounds", "runtime",
]


def _bench_row(args, seed):
    spec = GenSpec(
        args.n, args.m, parse_cost(args.low), parse_cost(args.high),
        args.zero_prob, seed, args.denominator,
    )
    instance = gen_random_restricted(spec)
    start = time.perf_counter()
    allocation, trace = solve(instance, args.alg, budget=args.budget)
    elapsed = time.perf_counter() - start
    eff = group_accounting(instance, allocation, trace.log, trace.assignment)
    problems = []
    if args.alg in ("efx-mms", "efx-mms-poly"):
        if eff.social_cost > 2 * eff.opt:
            problems.append(f"seed {seed}: social cost above 2 * OPT")
        if not eff.groups_balanced:
            problems.append(f"seed {seed}: |N0| < |N2|")
    elif not check_po(instance, allocation):
        problems.append(f"seed {seed}: social cost differs from OPT")
    row = [
        seed, args.n, args.m, args.alg, str(eff.social_cost), str(eff.opt),
        "NA" if eff.ratio is None else str(eff.ratio),
        len(eff.n0), len(eff.n1), len(eff.n2), trace.phase1.rounds,
        "" if args.no_timing else f"{elapsed:.6f}",
    ]
    return row, problems


def _seed_range(text: str) -> range:
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return range(int(lo), int(hi))
        return range(int(text))
    except ValueError:
        raise InputError(f"bad --seeds {text!r}; use START:STOP or COUNT") from None


def cmd_bench(args) -> int:
    seeds = _seed_range(args.seeds)
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        results = list(pool.map(lambda s: _bench_row(args, s), seeds))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    problems = []
    for row, bad in results:
        writer.writerow(row)
        problems.extend(bad)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    for p in problems:
        print(p, file=sys.stderr)
    return EXIT_VIOLATION if problems else EXIT_OK


def _graph(name: str, cost):
    if name == "example1":
        return example1_instance()
    if name.startswith("k") and name[1:].isdigit() and int(name[1:]) >= 2:
        return complete_graph(int(name[1:]), cost)
    raise InputError(f"unknown graph {name!r}; use example1 or kN (N >= 2)")


def cmd_counterexample(args) -> int:
    instance = _graph(args.graph, parse_cost(args.cost))
    result = search_efx_orientation(instance, budget=args.budget)
    print(f"{result.efx_count} / {result.total} EFX")
    if args.out:
        _dump({"graph": args.graph, **result.to_json(instance)}, args.out)
    if args.graph == "example1" and result.efx_count:
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chorealloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="allocate an instance")
    p.add_argument("instance")
    p.add_argument("--alg", choices=ALGORITHMS, default="efx-mms")
    p.add_argument("--agent-order", help="comma-separated permutation of the agents, e.g. 2,1,3")
    p.add_argument("--seed", type=int, help="shuffle the agent order with this seed")
    p.add_argument("--verify", action="store_true", help="check the algorithm's guarantees")
    p.add_argument("--trace", action="store_true", help="include the phase-by-phase trace")
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET, help="search node budget")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check an allocation against an instance")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--require", help=f"comma-separated subset of {','.join(PROPERTIES)}")
    p.add_argument("--alpha", help="MMS approximation factor, e.g. 4/3")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mms", help="exact maximin shares")
    p.add_argument("instance")
    p.add_argument("--agent", type=int)
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mms)

    p = sub.add_parser("gen", help="write an instance")
    p.add_argument("kind", choices=TABLES + ("random", "binary"))
    p.add_argument("--eps", default="1/4")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=7)
    p.add_argument("--seed", type=int)
    p.add_argument("--zero-prob", type=float, default=0.3)
    p.add_argument("--low", default="1")
    p.add_argument("--high", default="10")
    p.add_argument("--denominator", type=int, default=100)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="CSV sweep over random instances")
    p.add_argument("--alg", choices=ALGORITHMS, default="efx-mms")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=7)
    p.add_argument("--seeds", default="0:100", help="START:STOP or COUNT")
    p.add_argument("--zero-prob", type=float, default=0.3)
    p.add_argument("--low", default="1")
    p.add_argument("--high", default="10")
    p.add_argument("--denominator", type=int, default=100)
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="leave the runtime column empty")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("counterexample", help="exhaustive EFX orientation search")
    p.add_argument("kind", nargs="?", choices=("infty",), default="infty")
    p.add_argument("--graph", default="example1", help="example1 or kN")
    p.add_argument("--cost", default="1", help="edge cost for kN graphs")
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ChoreAllocError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
