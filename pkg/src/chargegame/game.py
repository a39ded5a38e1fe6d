"""Admissibility, utilities and welfare of strategy profiles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import lcm

from . import flow as fl
from .model import (
    EdgeKind,
    ExpandedGraph,
    InfeasibleProfile,
    Instance,
    ProfileLike,
    apply_strategy,
    build_expanded_graph,
    normalize_profile,
    profile_violations,
    q,
)


@total_ordering
class _NegativeInfinity:
    """Utility of an agent playing an inadmissible strategy.

    Orders below every Fraction; it is a verdict, so arithmetic is not defined.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("-inf")

    def __repr__(self):
        return "NEG_INF"

    def __str__(self):
        return "-inf"

    def __reduce__(self):
        return (_NegativeInfinity, ())


NEG_INF = _NegativeInfinity()


@dataclass(frozen=True)
class AdmissibilityVerdict:
    edges: dict  # transaction edge index -> bool
    agents: dict  # agent id -> bool

    @property
    def profile(self) -> bool:
        return all(self.agents.values())


@dataclass(frozen=True)
class Evaluation:
    welfare: Fraction
    admissible: tuple  # per agent, instance order


def _evaluate(graph: ExpandedGraph, prof: tuple) -> tuple[Evaluation, dict, fl.Flow]:
    gs = apply_strategy(graph, prof)
    flow, _ = fl.max_flow(gs)
    inst = graph.instance
    positive = [e.index for e in gs.edges if e.kind in (EdgeKind.CHARGE, EdgeKind.DISCHARGE) and e.capacity > 0]
    verdicts = fl.saturation_verdicts(gs, flow, positive)
    edge_flags = {}
    for e in gs.edges:
        if e.kind in (EdgeKind.CHARGE, EdgeKind.DISCHARGE):
            edge_flags[e.index] = verdicts.get(e.index, True)
    agent_flags = tuple(all(edge_flags[i] for i in graph.agent_transaction_edges(a)) for a in inst.agent_ids)
    return Evaluation(flow.value, agent_flags), edge_flags, flow


def admissibility(instance: Instance, profile: ProfileLike, graph: ExpandedGraph | None = None) -> AdmissibilityVerdict:
    graph = graph or build_expanded_graph(instance)
    prof = normalize_profile(instance, profile)
    ev, edge_flags, _ = _evaluate(graph, prof)
    return AdmissibilityVerdict(edge_flags, dict(zip(instance.agent_ids, ev.admissible)))


def strategy_value(strategy, prices) -> Fraction:
    """Payoff of a strategy when it is admissible: what it earns selling minus buying."""
    return -sum((s * p for s, p in zip(strategy, prices)), Fraction(0))


def _check_prices(instance: Instance, prices) -> tuple:
    prices = tuple(q(p) for p in prices)
    if len(prices) != instance.T:
        raise ValueError(f"expected {instance.T} prices, got {len(prices)}")
    return prices


def utilities(instance: Instance, profile: ProfileLike, prices, graph: ExpandedGraph | None = None) -> dict:
    prices = _check_prices(instance, prices)
    prof = normalize_profile(instance, profile)
    verdict = admissibility(instance, prof, graph)
    return {
        a: strategy_value(s, prices) if verdict.agents[a] else NEG_INF
        for a, s in zip(instance.agent_ids, prof)
    }


def welfare(instance: Instance, profile: ProfileLike, graph: ExpandedGraph | None = None) -> Fraction:
    graph = graph or build_expanded_graph(instance)
    flow, _ = fl.max_flow(apply_strategy(graph, profile))
    return flow.value


def optimal_welfare(instance: Instance, graph: ExpandedGraph | None = None) -> Fraction:
    graph = graph or build_expanded_graph(instance)
    return fl.max_flow(graph)[0].value


def profile_from_flow(instance: Instance, flow: fl.Flow, graph: ExpandedGraph | None = None) -> dict:
    """Let every agent trade exactly what a maximum relaxed flow routes through her battery."""
    graph = graph or build_expanded_graph(instance)
    if graph.mode != "relaxed":
        raise ValueError("profile_from_flow needs a flow on the relaxed graph")
    fl.min_cut(graph, flow)  # raises NotMaximal
    out = {}
    for a in instance.agent_ids:
        row = []
        for t in range(1, instance.T + 1):
            ci, di = graph.transaction_index(a, t)
            row.append(flow[ci] - flow[di])
        out[a] = tuple(row)
    return out


class ProfileEvaluator:
    """Memoized welfare and per-agent admissibility for the profiles of one instance.

    Profiles are tuples of per-agent Fraction tuples in instance agent order.
    Works on the integer network directly instead of rebuilding graphs.
    """

    def __init__(self, instance: Instance, prices=None):
        self.instance = instance
        self.graph = build_expanded_graph(instance)
        self.prices = None if prices is None else _check_prices(instance, prices)
        self.net = fl.network(self.graph)
        self.base_scale = fl.common_denominator(self.graph)
        self.base_caps = fl.integer_caps(self.graph, self.base_scale)
        self.transactions = [
            [self.graph.transaction_index(a, t) for t in range(1, instance.T + 1)] for a in instance.agent_ids
        ]
        self.sources = [e.index for e in self.graph.edges if e.kind is EdgeKind.SOURCE]
        self._cache: dict = {}
        self.evaluations = 0

    def evaluate(self, prof: tuple) -> Evaluation:
        ev = self._cache.get(prof)
        if ev is None:
            ev = self._compute(prof)
            self._cache[prof] = ev
            self.evaluations += 1
        return ev

    def _compute(self, prof: tuple) -> Evaluation:
        problems = profile_violations(self.instance, prof)
        if problems:
            raise InfeasibleProfile("; ".join(problems))
        scale = lcm(self.base_scale, *(x.denominator for row in prof for x in row))
        factor = scale // self.base_scale
        caps = [c * factor for c in self.base_caps]
        positive = []
        for row, pairs in zip(prof, self.transactions):
            for s, (ci, di) in zip(row, pairs):
                amount = s.numerator * (scale // s.denominator)
                caps[ci] = amount if amount > 0 else 0
                caps[di] = -amount if amount < 0 else 0
                if amount:
                    positive.append(ci if amount > 0 else di)
        flows = self.net.solve(caps)
        verdict = self.net.saturation(caps, flows, positive)
        admissible = tuple(
            all(verdict.get(i, True) for pair in pairs for i in pair) for pairs in self.transactions
        )
        return Evaluation(Fraction(sum(flows[i] for i in self.sources), scale), admissible)

    def utilities(self, prof: tuple) -> tuple:
        ev = self.evaluate(prof)
        return tuple(
            strategy_value(s, self.prices) if ok else NEG_INF for s, ok in zip(prof, ev.admissible)
        )

    def utility(self, prof: tuple, i: int):
        return strategy_value(prof[i], self.prices) if self.evaluate(prof).admissible[i] else NEG_INF
