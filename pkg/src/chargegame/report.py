"""Serialization of results: exact-rational JSON, row tables and DOT drawings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .equilibria import EquilibriumReport, _Token
from .game import NEG_INF
from .model import SINK, SOURCE, TRANSACTION, EdgeKind, ExpandedGraph


def rational_text(x) -> str:
    """``3``, ``-3/2``; utility and ratio tokens pass through as ``-inf``, ``inf``, ``no-equilibrium``."""
    if x is NEG_INF or isinstance(x, _Token):
        return str(x)
    return str(Fraction(x))


def jsonable(obj):
    """Recursively turn results into JSON-ready values with rationals as strings."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Fraction) or obj is NEG_INF or isinstance(obj, _Token):
        return rational_text(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, EquilibriumReport):
        return equilibrium_report_dict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def strategy_text(s) -> str:
    return "(" + ",".join(rational_text(x) for x in s) + ")"


def equilibrium_report_dict(rep: EquilibriumReport) -> dict:
    return {
        "prices": [rational_text(p) for p in rep.prices],
        "granularity": rational_text(rep.granularity),
        "k": rep.k,
        "opt": rational_text(rep.opt),
        "best_welfare": None if rep.best_welfare is None else rational_text(rep.best_welfare),
        "worst_welfare": None if rep.worst_welfare is None else rational_text(rep.worst_welfare),
        "poa": rational_text(rep.poa),
        "pos": rational_text(rep.pos),
        "equilibria": [
            {
                "profile": {a: [rational_text(x) for x in s] for a, s in e.profile.items()},
                "welfare": rational_text(e.welfare),
                "utilities": {a: rational_text(u) for a, u in e.utilities.items()},
            }
            for e in rep.equilibria
        ],
        "notes": list(rep.notes),
    }


@dataclass
class RunReport:
    command: list
    fingerprint: str
    granularity: Fraction | None
    prices: tuple | None
    results: dict
    duration: float = 0.0
    instance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": list(self.command),
            "instance_sha256": self.fingerprint,
            "instance": self.instance,
            "granularity": None if self.granularity is None else rational_text(self.granularity),
            "prices": None if self.prices is None else [rational_text(p) for p in self.prices],
            "results": jsonable(self.results),
            "duration_seconds": round(self.duration, 6),
        }


def equilibrium_rows(rep: EquilibriumReport, agents) -> str:
    """One CSV record per equilibrium, after a ``#`` summary line carrying the ratios."""
    out = io.StringIO()
    out.write(
        f"# opt={rational_text(rep.opt)} poa={rational_text(rep.poa)} pos={rational_text(rep.pos)} "
        f"g={rational_text(rep.granularity)} k={rep.k} equilibria={len(rep.equilibria)}\n"
    )
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["profile", "welfare", *(f"u_{a}" for a in agents)])
    for e in rep.equilibria:
        profile = " ".join(f"{a}={strategy_text(s)}" for a, s in e.profile.items())
        writer.writerow([profile, rational_text(e.welfare), *(rational_text(e.utilities[a]) for a in agents)])
    return out.getvalue()


def key_value_rows(results: dict, prefix: str = "") -> str:
    lines = []
    for k, v in results.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            lines.append(key_value_rows(v, key + "."))
        elif isinstance(v, (list, tuple)) and all(not isinstance(x, (dict, list, tuple)) for x in v):
            lines.append(f"{key}\t{','.join(str(jsonable(x)) for x in v)}")
        else:
            value = jsonable(v)
            lines.append(f"{key}\t{value if isinstance(value, str) else json.dumps(value)}")
    return "\n".join(x for x in lines if x)


# -- DOT ---------------------------------------------------------------------

def _node_id(node) -> str:
    if node == SOURCE:
        return '"x"'
    if node == SINK:
        return '"y"'
    kind, name, t = node
    return _quote(f"{kind}_{name}_{t}")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: ExpandedGraph, flow=None, verdicts: dict | None = None) -> str:
    """Graphviz text with ``f/κ`` labels.

    ``verdicts`` maps transaction edge index to admissibility; inadmissible
    edges are drawn red and dashed. Battery nodes sit in one cluster per agent.
    """
    lines = ["digraph G {", "  rankdir=LR;"]
    if not graph.edges:
        return "\n".join(lines + ["}"]) + "\n"
    used = {n for e in graph.edges for n in (e.tail, e.head)}
    battery = {}
    for n in graph.nodes:
        if n in used and n not in (SOURCE, SINK) and n[0] == "b":
            battery.setdefault(n[1], []).append(n)
    for n in graph.nodes:
        if n not in used or (n not in (SOURCE, SINK) and n[0] == "b"):
            continue
        label = {SOURCE: "x", SINK: "y"}[n] if n in (SOURCE, SINK) else f"{n[1]}@{n[2]}"
        lines.append(f"  {_node_id(n)} [label={_quote(label)}];")
    for agent, nodes in battery.items():
        lines.append(f"  subgraph {_quote('cluster_' + agent)} {{")
        lines.append(f"    label={_quote('battery ' + agent)};")
        for n in nodes:
            lines.append(f"    {_node_id(n)} [label={_quote(f'{agent}@{n[2]}')}, shape=box];")
        lines.append("  }")
    for e in graph.edges:
        f = "0" if flow is None else rational_text(flow[e.index])
        attrs = [f"label={_quote(f'{f}/{rational_text(e.capacity)}')}", f"kind={_quote(e.kind.value)}"]
        if e.kind in TRANSACTION and verdicts is not None and not verdicts.get(e.index, True):
            attrs += ["color=red", "style=dashed"]
        elif e.kind is EdgeKind.BATTERY:
            attrs.append("style=bold")
        lines.append(f"  {_node_id(e.tail)} -> {_node_id(e.head)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
