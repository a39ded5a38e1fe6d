"""Instances of the battery charging game and their time-expanded networks."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence, Union

Quantity = Fraction
Node = tuple
# agent id -> per-step charge (+) / discharge (-)
StrategyProfile = Mapping[str, tuple]
ProfileLike = Union[Mapping[str, Sequence], Sequence[Sequence]]

SOURCE: Node = ("x",)
SINK: Node = ("y",)


class InvalidInstance(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InfeasibleProfile(ValueError):
    pass


def q(value) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to an exact Fraction."""
    if isinstance(value, float):
        raise TypeError(f"floats are not exact quantities: {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class HostGraph:
    nodes: tuple
    # (edge id, tail, head); parallel edges are allowed
    edges: tuple = ()


@dataclass(frozen=True)
class Agent:
    id: str
    location: str
    # capacity of battery edge (b_t, b_{t+1}) for t = 1..T-1
    battery_capacity: tuple


@dataclass(frozen=True, eq=True)
class Instance:
    host: HostGraph
    T: int
    demands: dict = field(default_factory=dict)
    grid_capacity: dict = field(default_factory=dict)
    agents: tuple = ()
    prices: tuple | None = None

    def demand(self, node: str, t: int) -> Fraction:
        seq = self.demands.get(node)
        return Fraction(0) if seq is None else seq[t - 1]

    def capacity(self, edge_id: str, t: int) -> Fraction:
        return self.grid_capacity[edge_id][t - 1]

    @property
    def agent_ids(self) -> tuple:
        return tuple(a.id for a in self.agents)

    def agent(self, agent_id: str) -> Agent:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)

    def total_supply(self) -> Fraction:
        return sum((max(Fraction(0), d) for seq in self.demands.values() for d in seq), Fraction(0))

    def net_supply(self, t: int) -> Fraction:
        return sum((self.demand(v, t) for v in self.host.nodes), Fraction(0))

    def scaled(self, c) -> "Instance":
        """Multiply every demand and capacity by ``c``."""
        c = q(c)
        return replace(
            self,
            demands={v: tuple(c * d for d in seq) for v, seq in self.demands.items()},
            grid_capacity={e: tuple(c * k for k in seq) for e, seq in self.grid_capacity.items()},
            agents=tuple(replace(a, battery_capacity=tuple(c * k for k in a.battery_capacity)) for a in self.agents),
        )


def make_instance(nodes, edges, T, demands=None, grid_capacity=None, agents=(), prices=None) -> Instance:
    """Convenience constructor that coerces all numbers to Fractions.

    ``edges`` is a sequence of ``(id, tail, head)``; ``grid_capacity`` maps edge
    id to a length-T sequence, or to a scalar used at every step. ``agents`` is a
    sequence of ``(id, location, battery_capacity)`` where the capacity may also
    be a scalar.
    """
    demands = demands or {}
    grid_capacity = grid_capacity or {}
    caps = {}
    for eid, _, _ in edges:
        c = grid_capacity.get(eid, 0)
        caps[eid] = tuple(q(x) for x in c) if isinstance(c, (list, tuple)) else (q(c),) * T
    agent_objs = []
    for aid, loc, cap in agents:
        cap = tuple(q(x) for x in cap) if isinstance(cap, (list, tuple)) else (q(cap),) * max(T - 1, 0)
        agent_objs.append(Agent(str(aid), str(loc), cap))
    return Instance(
        host=HostGraph(tuple(str(v) for v in nodes), tuple((str(e), str(u), str(v)) for e, u, v in edges)),
        T=T,
        demands={str(v): tuple(q(x) for x in seq) for v, seq in demands.items()},
        grid_capacity=caps,
        agents=tuple(agent_objs),
        prices=None if prices is None else tuple(q(p) for p in prices),
    )


def validate_instance(instance: Instance) -> list[str]:
    """Return the list of invariant violations; empty means the instance is valid."""
    out = []
    T = instance.T
    if not isinstance(T, int) or T < 1:
        out.append(f"T: horizon must be a positive integer, got {T!r}")
        return out
    nodes = instance.host.nodes
    node_set = set(nodes)
    if len(node_set) != len(nodes):
        out.append("nodes: duplicate node id")
    seen = set()
    for eid, u, v in instance.host.edges:
        if eid in seen:
            out.append(f"edge {eid}: duplicate edge id")
        seen.add(eid)
        for end in (u, v):
            if end not in node_set:
                out.append(f"edge {eid}: unknown endpoint {end!r}")
        caps = instance.grid_capacity.get(eid)
        if caps is None or len(caps) != T:
            out.append(f"edge {eid}: capacity must list {T} values")
            continue
        for t, c in enumerate(caps, 1):
            if c < 0:
                out.append(f"edge {eid}: capacity < 0 at t={t}")
    for eid in instance.grid_capacity:
        if eid not in seen:
            out.append(f"edge {eid}: capacity given for unknown edge")
    for v, seq in instance.demands.items():
        if v not in node_set:
            out.append(f"demand {v}: unknown node")
        if len(seq) != T:
            out.append(f"demand {v}: must list {T} values")
    locations = set()
    ids = set()
    for a in instance.agents:
        if a.id in ids:
            out.append(f"agent {a.id}: duplicate agent id")
        ids.add(a.id)
        if a.location not in node_set:
            out.append(f"agent {a.id}: unknown location {a.location!r}")
        elif a.location in locations:
            out.append(f"agent {a.id}: location {a.location!r} already hosts an agent")
        locations.add(a.location)
        if len(a.battery_capacity) != T - 1:
            out.append(f"agent {a.id}: battery capacity must list {T - 1} values")
        for t, c in enumerate(a.battery_capacity, 1):
            if c < 0:
                out.append(f"agent {a.id}: battery capacity < 0 at t={t}")
    if instance.prices is not None and len(instance.prices) != T:
        out.append(f"prices: must list {T} values")
    return out


class EdgeKind(str, Enum):
    GRID = "grid"
    BATTERY = "battery"
    CHARGE = "charge"
    DISCHARGE = "discharge"
    SOURCE = "source"
    SINK = "sink"


TRANSACTION = (EdgeKind.CHARGE, EdgeKind.DISCHARGE)


@dataclass(frozen=True)
class Edge:
    index: int
    tail: Node
    head: Node
    kind: EdgeKind
    capacity: Fraction
    t: int
    agent: str | None = None
    host_edge: str | None = None


@dataclass(frozen=True)
class ExpandedGraph:
    instance: Instance
    nodes: tuple
    edges: tuple
    mode: str = "relaxed"  # or "strategy"

    def transaction_index(self, agent: str, t: int) -> tuple[int, int]:
        """Indices of the (charge, discharge) edges of ``agent`` at step ``t``."""
        return self._transactions[(agent, t)]

    @property
    def _transactions(self) -> dict:
        cache = self.__dict__.get("_tx")
        if cache is None:
            cache = {}
            for e in self.edges:
                if e.kind in TRANSACTION:
                    pair = cache.setdefault((e.agent, e.t), [None, None])
                    pair[0 if e.kind is EdgeKind.CHARGE else 1] = e.index
            cache = {k: tuple(v) for k, v in cache.items()}
            object.__setattr__(self, "_tx", cache)
        return cache

    def edges_of_kind(self, *kinds) -> list[Edge]:
        return [e for e in self.edges if e.kind in kinds]

    def agent_transaction_edges(self, agent: str) -> list[int]:
        return [i for t in range(1, self.instance.T + 1) for i in self.transaction_index(agent, t)]


def grid_node(v: str, t: int) -> Node:
    return ("v", v, t)


def battery_node(b: str, t: int) -> Node:
    return ("b", b, t)


def build_expanded_graph(instance: Instance) -> ExpandedGraph:
    """Build the relaxed time-expanded network.

    Transaction edges get the total positive supply as capacity, which no
    source-sink flow can exceed.
    """
    problems = validate_instance(instance)
    if problems:
        raise InvalidInstance(problems)
    T = instance.T
    bound = instance.total_supply()
    nodes = []
    for t in range(1, T + 1):
        nodes.extend(grid_node(v, t) for v in instance.host.nodes)
        nodes.extend(battery_node(a.id, t) for a in instance.agents)
    nodes.extend([SOURCE, SINK])

    edges = []

    def add(tail, head, kind, cap, t, agent=None, host_edge=None):
        edges.append(Edge(len(edges), tail, head, kind, cap, t, agent, host_edge))

    for t in range(1, T + 1):
        for eid, u, v in instance.host.edges:
            add(grid_node(u, t), grid_node(v, t), EdgeKind.GRID, instance.capacity(eid, t), t, host_edge=eid)
        for a in instance.agents:
            vb, bt = grid_node(a.location, t), battery_node(a.id, t)
            add(vb, bt, EdgeKind.CHARGE, bound, t, agent=a.id)
            add(bt, vb, EdgeKind.DISCHARGE, bound, t, agent=a.id)
        for v in instance.host.nodes:
            d = instance.demand(v, t)
            add(SOURCE, grid_node(v, t), EdgeKind.SOURCE, max(Fraction(0), d), t)
            add(grid_node(v, t), SINK, EdgeKind.SINK, max(Fraction(0), -d), t)
    for a in instance.agents:
        for t in range(1, T):
            add(battery_node(a.id, t), battery_node(a.id, t + 1), EdgeKind.BATTERY, a.battery_capacity[t - 1], t, agent=a.id)
    return ExpandedGraph(instance, tuple(nodes), tuple(edges), "relaxed")


def normalize_profile(instance: Instance, profile: ProfileLike) -> tuple:
    """Return the profile as a tuple of per-agent Fraction tuples in agent order.

    Mappings may omit agents; omitted agents play the all-zero strategy.
    """
    T = instance.T
    if isinstance(profile, Mapping):
        unknown = set(profile) - set(instance.agent_ids)
        if unknown:
            raise InfeasibleProfile(f"unknown agents in profile: {sorted(unknown)}")
        rows = [profile.get(a.id, (0,) * T) for a in instance.agents]
    else:
        rows = list(profile)
        if len(rows) != len(instance.agents):
            raise InfeasibleProfile(f"profile lists {len(rows)} agents, instance has {len(instance.agents)}")
    out = []
    for a, row in zip(instance.agents, rows):
        row = tuple(q(x) for x in row)
        if len(row) != T:
            raise InfeasibleProfile(f"agent {a.id}: strategy must list {T} values")
        out.append(row)
    return tuple(out)


def profile_violations(instance: Instance, profile: ProfileLike) -> list[str]:
    prof = normalize_profile(instance, profile)
    out = []
    for a, row in zip(instance.agents, prof):
        level = Fraction(0)
        for t, s in enumerate(row, 1):
            level += s
            if t < instance.T and not 0 <= level <= a.battery_capacity[t - 1]:
                out.append(f"agent {a.id}: stored amount {level} after t={t} outside [0, {a.battery_capacity[t - 1]}]")
            elif t == instance.T and level < 0:
                out.append(f"agent {a.id}: stored amount {level} after t={t} is negative")
    return out


def as_mapping(instance: Instance, profile: ProfileLike) -> dict:
    return dict(zip(instance.agent_ids, normalize_profile(instance, profile)))


def apply_strategy(graph: ExpandedGraph, profile: ProfileLike) -> ExpandedGraph:
    """Cap every transaction edge at the amount the profile charges or discharges."""
    instance = graph.instance
    prof = normalize_profile(instance, profile)
    problems = profile_violations(instance, prof)
    if problems:
        raise InfeasibleProfile("; ".join(problems))
    caps = {}
    zero = Fraction(0)
    for a, row in zip(instance.agents, prof):
        for t, s in enumerate(row, 1):
            ci, di = graph.transaction_index(a.id, t)
            caps[ci] = s if s > 0 else zero
            caps[di] = -s if s < 0 else zero
    edges = tuple(replace(e, capacity=caps[e.index]) if e.index in caps else e for e in graph.edges)
    return ExpandedGraph(instance, graph.nodes, edges, "strategy")
