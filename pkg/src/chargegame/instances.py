"""Built-in instances from the figures, a seeded generator, and the JSON file format.

File format (JSON; numbers are integers or exact "num/den" strings)::

    {
      "T": 2,
      "nodes": ["u", "w"],
      "edges": [{"id": "uw", "from": "u", "to": "w", "capacity": [1, 1]}],
      "demands": {"u": [1, 0], "w": [0, -1]},
      "agents": [{"id": "a", "location": "u", "battery_capacity": [2]}],
      "prices": [1, 2]
    }

``prices`` is optional; unknown keys are rejected.
"""

from __future__ import annotations

import json
import random
import re
import string
from dataclasses import dataclass, replace
from fractions import Fraction

from . import pricing
from .model import Instance, InvalidInstance, make_instance, validate_instance

PAPER_IDS = (
    "fig1_structure",
    "fig2_flow_example",
    "fig3_t2poa",
    "fig4_no_ne",
    "fig5_asc_pos",
    "fig6_supply_sign",
    "fig7_strong_poa",
)


def _bidirectional(pairs, cap):
    edges, caps = [], {}
    for u, v in pairs:
        for a, b in ((u, v), (v, u)):
            eid = f"{a}-{b}"
            edges.append((eid, a, b))
            caps[eid] = cap
    return edges, caps


def fig1_structure() -> Instance:
    edges, caps = _bidirectional([("u", "w")], 1)
    return make_instance(
        ["u", "w"], edges, 2,
        demands={"u": [1, 0], "w": [0, -1]},
        grid_capacity=caps,
        agents=[("a", "u", 2), ("b", "w", 1)],
        prices=[2, 1],
    )


def fig2_flow_example() -> Instance:
    # the third prosumer is drawn without grid links
    edges, caps = _bidirectional([("u", "w")], 1)
    return make_instance(
        ["u", "w", "z"], edges, 2,
        demands={"u": [1, 0], "w": [0, -1], "z": [1, -1]},
        grid_capacity=caps,
        agents=[("a", "u", 1), ("b", "w", 1), ("c", "z", 1)],
        prices=[1, 2],
    )


def fig3_t2poa() -> Instance:
    nodes = [f"v{i}" for i in range(1, 6)]
    edges, caps = _bidirectional(list(zip(nodes, nodes[1:])), 1)
    return make_instance(
        nodes, edges, 2,
        demands={"v1": [1, 0], "v2": [1, 0], "v4": [0, -1], "v5": [0, -1]},
        grid_capacity=caps,
        agents=[("a", "v1", 1), ("c", "v3", 1), ("e", "v5", 1)],
        prices=[1, 2],
    )


def fig4_no_ne() -> Instance:
    edges = [("top-a", "top", "va"), ("top-c", "top", "vc"), ("a-bot", "va", "bot"), ("c-bot", "vc", "bot")]
    return make_instance(
        ["top", "va", "vc", "bot"], edges, 4,
        demands={
            "top": [1, 0, 0, 0],
            "va": [0, -1, 1, 0],
            "vc": [0, -1, 1, 0],
            "bot": [0, 0, 0, "-3/2"],
        },
        grid_capacity={e[0]: 2 for e in edges},
        agents=[("a", "va", 2), ("c", "vc", 2)],
        prices=[1, 11, 12, 13],
    )


def fig5_asc_pos(T: int = 4) -> Instance:
    if T < 2:
        raise ValueError("fig5_asc_pos needs T >= 2")
    return make_instance(
        ["a"], [], T,
        demands={"a": [1 if t % 2 else -1 for t in range(1, T + 1)]},
        agents=[("a", "a", 1)],
        prices=list(range(1, T + 1)),
    )


def fig6_supply_sign(q=1, r=1) -> Instance:
    q, r = Fraction(q), Fraction(r)
    if q <= 0 or r <= 0:
        raise ValueError("fig6_supply_sign needs q, r > 0")
    inst = make_instance(
        ["a", "b", "c"], [("a-b", "a", "b")], 3,
        demands={"a": [1, 0, 0], "b": [0, 0, -1], "c": [-1, 1, 0]},
        grid_capacity={"a-b": [0, 1, 0]},
        agents=[("a", "a", 1), ("b", "b", 1)],
    )
    return replace(inst, prices=pricing.make_price_profile("supply_sign", inst, [0, q, r]))


def fig7_strong_poa(T: int = 4) -> Instance:
    if T < 3:
        raise ValueError("fig7_strong_poa needs T >= 3")
    n = T - 1
    nodes = [f"v{i}" for i in range(1, n + 1)]
    names = string.ascii_lowercase if n <= 26 else [f"a{i}" for i in range(1, n + 1)]
    edges, caps = [], {}
    for i in range(1, n):
        eid = f"v{i}-v{i + 1}"
        edges.append((eid, f"v{i}", f"v{i + 1}"))
        # open only at step i+1
        caps[eid] = [1 if t == i + 1 else 0 for t in range(1, T + 1)]
    demands = {v: [0] * T for v in nodes}
    demands["v1"][0] = 1
    demands[f"v{n}"][T - 1] -= 1
    return make_instance(
        nodes, edges, T,
        demands=demands,
        grid_capacity=caps,
        agents=[(names[i], nodes[i], 1) for i in range(n)],
        prices=list(range(1, T + 1)),
    )


_BUILDERS = {
    "fig1_structure": fig1_structure,
    "fig2_flow_example": fig2_flow_example,
    "fig3_t2poa": fig3_t2poa,
    "fig4_no_ne": fig4_no_ne,
    "fig5_asc_pos": fig5_asc_pos,
    "fig6_supply_sign": fig6_supply_sign,
    "fig7_strong_poa": fig7_strong_poa,
}


def paper_instance(ident: str) -> tuple[Instance, tuple]:
    """Build a figure instance from ``name`` or ``name:p1,p2``.

    Returns the instance and its suggested price profile.
    """
    name, _, params = ident.partition(":")
    if name not in _BUILDERS:
        raise ValueError(f"unknown paper instance {name!r}; choose from {', '.join(PAPER_IDS)}")
    args = [p for p in params.split(",") if p]
    if name in ("fig5_asc_pos", "fig7_strong_poa"):
        args = [int(a) for a in args]
    elif name == "fig6_supply_sign":
        args = [Fraction(a) for a in args]
    elif args:
        raise ValueError(f"{name} takes no parameters")
    inst = _BUILDERS[name](*args)
    return inst, inst.prices


@dataclass(frozen=True)
class RandomParams:
    nodes: int = 3
    T: int = 3
    agents: int = 2
    max_capacity: int = 2
    demand_density: float = 0.4
    edge_density: float = 0.5


def random_instance(seed: int, params: RandomParams = RandomParams()) -> Instance:
    """Deterministic random instance; capacities are integers in [0, max_capacity]."""
    rng = random.Random(seed)
    T = params.T
    nodes = [f"n{i}" for i in range(params.nodes)]
    edges, caps = [], {}
    for u in nodes:
        for v in nodes:
            if u != v and rng.random() < params.edge_density:
                eid = f"{u}-{v}"
                edges.append((eid, u, v))
                caps[eid] = [rng.randint(0, params.max_capacity) for _ in range(T)]
    demands = {}
    for v in nodes:
        row = []
        for _ in range(T):
            if rng.random() < params.demand_density:
                row.append(rng.choice([-1, 1]) * rng.randint(1, params.max_capacity))
            else:
                row.append(0)
        demands[v] = row
    hosts = rng.sample(nodes, min(params.agents, len(nodes)))
    agents = [
        (f"b{i}", loc, [rng.randint(0, params.max_capacity) for _ in range(T - 1)])
        for i, loc in enumerate(hosts)
    ]
    return make_instance(nodes, edges, T, demands=demands, grid_capacity=caps, agents=agents)


# -- file format ------------------------------------------------------------

class InstanceFormatError(ValueError):
    pass


_NUMBER = re.compile(r"^-?\d+(/\d+)?$")


def format_quantity(x: Fraction):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _quantity(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InstanceFormatError(f"{where}: expected an integer or a 'num/den' string, got {value!r}")
    if isinstance(value, str):
        if not _NUMBER.match(value.strip()):
            raise InstanceFormatError(f"{where}: malformed number {value!r}")
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise InstanceFormatError(f"{where}: zero denominator") from None
    return Fraction(value)


def _quantities(value, n: int, where: str) -> tuple:
    if not isinstance(value, list):
        raise InstanceFormatError(f"{where}: expected a list of {n} values")
    if len(value) != n:
        raise InstanceFormatError(f"{where}: expected {n} values, got {len(value)}")
    return tuple(_quantity(v, f"{where}[{i}]") for i, v in enumerate(value))


def _keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    unknown = set(obj) - set(allowed)
    if unknown:
        raise InstanceFormatError(f"{where}: unknown field(s) {', '.join(sorted(unknown))}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise InstanceFormatError(f"{where}: missing field(s) {', '.join(missing)}")


def instance_from_dict(doc) -> Instance:
    _keys(doc, ("T", "nodes", "edges", "demands", "agents", "prices"), ("T", "nodes"), "document")
    T = doc["T"]
    if isinstance(T, bool) or not isinstance(T, int):
        raise InstanceFormatError(f"T: expected an integer, got {T!r}")
    if T < 1:
        raise InstanceFormatError(f"T: horizon must be >= 1, got {T}")
    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(v, str) for v in nodes):
        raise InstanceFormatError("nodes: expected a list of strings")
    edges, caps = [], {}
    for i, e in enumerate(doc.get("edges", [])):
        where = f"edges[{i}]"
        _keys(e, ("id", "from", "to", "capacity"), ("id", "from", "to", "capacity"), where)
        edges.append((str(e["id"]), str(e["from"]), str(e["to"])))
        caps[str(e["id"])] = list(_quantities(e["capacity"], T, f"{where}.capacity"))
    demands_doc = doc.get("demands", {})
    if not isinstance(demands_doc, dict):
        raise InstanceFormatError("demands: expected an object mapping node to values")
    demands = {v: list(_quantities(d, T, f"demands.{v}")) for v, d in demands_doc.items()}
    agents = []
    for i, a in enumerate(doc.get("agents", [])):
        where = f"agents[{i}]"
        _keys(a, ("id", "location", "battery_capacity"), ("id", "location", "battery_capacity"), where)
        agents.append((str(a["id"]), str(a["location"]), list(_quantities(a["battery_capacity"], T - 1, f"{where}.battery_capacity"))))
    prices = None
    if "prices" in doc:
        prices = list(_quantities(doc["prices"], T, "prices"))
    inst = make_instance(nodes, edges, T, demands=demands, grid_capacity=caps, agents=agents, prices=prices)
    return inst


def instance_to_dict(instance: Instance) -> dict:
    doc = {
        "T": instance.T,
        "nodes": list(instance.host.nodes),
        "edges": [
            {"id": eid, "from": u, "to": v, "capacity": [format_quantity(c) for c in instance.grid_capacity[eid]]}
            for eid, u, v in instance.host.edges
        ],
        "demands": {
            v: [format_quantity(d) for d in instance.demands[v]]
            for v in instance.host.nodes if v in instance.demands
        },
        "agents": [
            {"id": a.id, "location": a.location, "battery_capacity": [format_quantity(c) for c in a.battery_capacity]}
            for a in instance.agents
        ],
    }
    for v in instance.demands:
        if v not in doc["demands"]:
            doc["demands"][v] = [format_quantity(d) for d in instance.demands[v]]
    if instance.prices is not None:
        doc["prices"] = [format_quantity(p) for p in instance.prices]
    return doc


def load_instance(text: str, validate: bool = True) -> Instance:
    """Parse an instance document; raises InstanceFormatError or InvalidInstance."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    inst = instance_from_dict(doc)
    if validate:
        problems = validate_instance(inst)
        if problems:
            raise InvalidInstance(problems)
    return inst


def save_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"
