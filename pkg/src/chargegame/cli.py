"""Command-line entry point.

Exit codes: 0 success, 1 analysis refused (search budget) or failed acceptance
check, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import flow as fl
from .equilibria import (
    DEFAULT_BUDGET,
    DEFAULT_GRANULARITY,
    BudgetExceeded,
    Game,
    efficiency_ratios,
    is_k_strong,
    is_nash,
)
from .game import admissibility, optimal_welfare, utilities, welfare
from .instances import PAPER_IDS, InstanceFormatError, instance_to_dict, load_instance, paper_instance, save_instance
from .model import (
    InfeasibleProfile,
    TRANSACTION,
    InvalidInstance,
    apply_strategy,
    build_expanded_graph,
    normalize_profile,
    q,
    validate_instance,
)
from .pricing import classify_prices, default_prices, parse_prices
from .report import RunReport, equilibrium_rows, export_dot, jsonable, key_value_rows

COMMANDS = (
    "validate", "welfare", "admissible", "utilities", "best-response", "check-ne",
    "check-strong", "enumerate", "ratios", "paper", "verify-paper", "export-dot",
)


class InputError(Exception):
    pass


def parse_profile(text: str | None, instance) -> dict:
    """``a=1,-1;b=0,1/2`` -> {agent: strategy}; agents left out play zero."""
    out = {}
    if not text:
        return out
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        agent, eq, values = part.partition("=")
        if not eq:
            raise InputError(f"profile entry {part!r} must look like agent=v1,...,vT")
        agent = agent.strip()
        if agent not in instance.agent_ids:
            raise InputError(f"unknown agent {agent!r} in profile; agents are {', '.join(instance.agent_ids)}")
        out[agent] = tuple(q(v.strip()) for v in values.split(","))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--paper", metavar="ID[:PARAMS]", help=f"built-in instance: {', '.join(PAPER_IDS)}")
    src.add_argument("--file", metavar="PATH", help="instance file (JSON)")
    common.add_argument("--prices", help="1,2,3 | uniform:c | asc:start,step | desc:start,step | sign:m1,...,mT")
    common.add_argument("--g", default=str(DEFAULT_GRANULARITY), help="strategy grid spacing (default 1/2)")
    common.add_argument("--k", type=int, default=1, help="coalition size bound")
    common.add_argument("--exact-size", action="store_true", help="only coalitions of exactly k agents")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max profiles to search")
    common.add_argument("--format", choices=("rows", "structured"), default="structured")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--profile", help="strategies, e.g. 'a=1,-1;b=0,0'")
    common.add_argument("--agent", help="agent id for best-response")

    parser = argparse.ArgumentParser(prog="chargegame", description="Battery charging game analysis on energy networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "paper":
            p.add_argument("ident", metavar="ID[:PARAMS]")
        if name == "verify-paper":
            p.add_argument("--only", type=int, action="append", help="run only this criterion (repeatable)")
    return parser


def _load(args):
    if args.command == "paper":
        return paper_instance(args.ident)[0], args.ident
    if args.file:
        try:
            text = Path(args.file).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {args.file}: {exc.strerror}") from None
        return load_instance(text, validate=args.command != "validate"), args.file
    if args.paper:
        return paper_instance(args.paper)[0], args.paper
    raise InputError("give an instance with --paper ID or --file PATH")


def _prices(args, instance):
    if args.prices:
        return parse_prices(args.prices, instance)
    return default_prices(instance)


def _fingerprint(instance) -> str:
    return hashlib.sha256(save_instance(instance).encode()).hexdigest()


def _results(args, instance) -> tuple[dict, object]:
    """Run the command; returns (results payload, equilibrium report or None)."""
    cmd = args.command
    if cmd == "validate":
        problems = validate_instance(instance)
        return {"valid": not problems, "violations": problems}, None
    if cmd == "paper":
        return {"instance": instance_to_dict(instance)}, None
    prices = _prices(args, instance)
    g = q(args.g)
    profile = parse_profile(args.profile, instance)
    if cmd == "welfare":
        return {"welfare": welfare(instance, profile), "optimal_welfare": optimal_welfare(instance)}, None
    if cmd == "admissible":
        v = admissibility(instance, profile)
        return {"profile_admissible": v.profile, "agents": v.agents}, None
    if cmd == "utilities":
        return {"utilities": utilities(instance, profile, prices), "price_classes": sorted(classify_prices(prices, instance))}, None
    if cmd == "best-response":
        if args.agent not in instance.agent_ids:
            raise InputError(f"--agent must be one of {', '.join(instance.agent_ids)}")
        game = Game(instance, prices, g)
        s, u = game.best_response(normalize_profile(instance, profile), instance.agent_ids.index(args.agent))
        return {"agent": args.agent, "strategy": list(s), "utility": u}, None
    if cmd == "check-ne":
        ok, w = is_nash(instance, prices, profile, g)
        witness = None if w is None else {"agent": w[0], "strategy": list(w[1]), "utility": w[2]}
        return {"nash": ok, "witness": witness}, None
    if cmd == "check-strong":
        ok, w = is_k_strong(instance, prices, profile, args.k, g, args.exact_size)
        witness = None if w is None else {a: list(s) for a, s in w.items()}
        return {"k": args.k, "strong": ok, "witness": witness}, None
    if cmd in ("enumerate", "ratios"):
        rep = efficiency_ratios(instance, prices, g, args.k, args.budget, args.exact_size)
        rep.notes.append("price classes: " + (", ".join(sorted(classify_prices(prices, instance))) or "none") + " (weak monotonicity)")
        if cmd == "enumerate":
            return {"equilibria": jsonable(rep)["equilibria"], "count": len(rep.equilibria)}, rep
        return {"report": rep}, rep
    raise AssertionError(cmd)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _export_dot(args, instance) -> str:
    graph = build_expanded_graph(instance)
    verdicts = None
    if args.profile is not None:
        graph = apply_strategy(graph, parse_profile(args.profile, instance))
        flow, _ = fl.max_flow(graph)
        edges = [e.index for e in graph.edges if e.kind in TRANSACTION and e.capacity > 0]
        verdicts = fl.saturation_verdicts(graph, flow, edges)
    else:
        flow, _ = fl.max_flow(graph)
    return export_dot(graph, flow, verdicts)


def _verify(args) -> int:
    from .verify import run_checks

    results = run_checks(args.only)
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} acceptance criteria passed")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if passed == len(results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "verify-paper":
            return _verify(args)
        instance, source = _load(args)
        if args.command == "export-dot":
            _emit(_export_dot(args, instance), args.out)
            return 0
        if args.command == "paper" and args.format == "structured":
            _emit(save_instance(instance), args.out)
            return 0
        results, rep = _results(args, instance)
    except BudgetExceeded as exc:
        print(f"error: {exc}; raise --budget or coarsen --g", file=sys.stderr)
        return 1
    except (InputError, InstanceFormatError, InvalidInstance, InfeasibleProfile, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    prices = None
    g = None
    if args.command not in ("validate", "paper"):
        prices = _prices(args, instance)
        g = Fraction(args.g)
    if args.format == "rows":
        if rep is not None:
            text = equilibrium_rows(rep, instance.agent_ids)
        else:
            text = key_value_rows(results) + "\n"
    else:
        report = RunReport(
            command=list(sys.argv[1:] if argv is None else argv),
            fingerprint=_fingerprint(instance),
            granularity=g,
            prices=prices,
            results=results,
            duration=time.perf_counter() - start,
            instance={"source": source},
        )
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    _emit(text, args.out)
    if args.command == "validate" and not results["valid"]:
        return 2
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
