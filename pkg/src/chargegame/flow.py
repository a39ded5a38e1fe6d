"""Exact maximum flows and residual analysis on expanded graphs.

Capacities are rescaled to integers by their common denominator, the flow is
computed with Dinic's algorithm on integers and mapped back to Fractions.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction
from math import lcm

from .model import SINK, SOURCE, ExpandedGraph


class NotMaximal(ValueError):
    pass


@dataclass(frozen=True)
class Flow:
    values: tuple  # per edge index
    value: Fraction

    def __getitem__(self, index: int) -> Fraction:
        return self.values[index]


def common_denominator(graph: ExpandedGraph) -> int:
    return lcm(1, *(e.capacity.denominator for e in graph.edges))


def integer_caps(graph: ExpandedGraph, scale: int) -> list[int]:
    return [e.capacity.numerator * (scale // e.capacity.denominator) for e in graph.edges]


class IntegerNetwork:
    """Topology of an expanded graph, solved repeatedly for integer capacities.

    Edge ``i`` of the graph is arc ``2i``; its reverse is arc ``2i + 1``.
    """

    def __init__(self, graph: ExpandedGraph):
        self.index = {v: i for i, v in enumerate(graph.nodes)}
        self.n = len(graph.nodes)
        self.m = len(graph.edges)
        self.tails = [self.index[e.tail] for e in graph.edges]
        self.heads = [self.index[e.head] for e in graph.edges]
        self.source = self.index[SOURCE]
        self.sink = self.index[SINK]
        self.to = [0] * (2 * self.m)
        self.adj = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(zip(self.tails, self.heads)):
            self.to[2 * i], self.to[2 * i + 1] = v, u
            self.adj[u].append(2 * i)
            self.adj[v].append(2 * i + 1)

    def solve(self, caps: list[int]) -> list[int]:
        """Dinic's algorithm; returns the flow on each edge."""
        n, to, adj, s, t = self.n, self.to, self.adj, self.source, self.sink
        res = [0] * (2 * self.m)
        res[0::2] = caps
        while True:
            level = [-1] * n
            level[s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for a in adj[u]:
                    if res[a] > 0 and level[to[a]] < 0:
                        level[to[a]] = level[u] + 1
                        queue.append(to[a])
            if level[t] < 0:
                break
            it = [0] * n

            def push(u: int, limit: int) -> int:
                if u == t:
                    return limit
                arcs = adj[u]
                while it[u] < len(arcs):
                    a = arcs[it[u]]
                    v = to[a]
                    if res[a] > 0 and level[v] == level[u] + 1:
                        pushed = push(v, min(limit, res[a]))
                        if pushed:
                            res[a] -= pushed
                            res[a ^ 1] += pushed
                            return pushed
                    it[u] += 1
                return 0

            while push(s, 1 << 62):
                pass
        return [c - r for c, r in zip(caps, res[0::2])]

    def residual(self, caps: list[int], flows: list[int]) -> list[list[int]]:
        out = [[] for _ in range(self.n)]
        for u, v, c, f in zip(self.tails, self.heads, caps, flows):
            if f < c:
                out[u].append(v)
            if f > 0:
                out[v].append(u)
        return out

    @staticmethod
    def reach(residual: list[list[int]], start: int) -> set:
        seen = {start}
        stack = [start]
        while stack:
            for v in residual[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def min_cut(self, caps: list[int], flows: list[int]) -> list[int]:
        side = self.reach(self.residual(caps, flows), self.source)
        if self.sink in side:
            raise NotMaximal("an augmenting path exists; the flow is not maximum")
        return [i for i in range(self.m) if self.tails[i] in side and self.heads[i] not in side]

    def saturation(self, caps, flows, edges, residual=None) -> dict:
        """Edge index -> whether every maximum flow saturates it (``flows`` must be maximum).

        A saturated edge ``(u, v)`` can be unloaded in another maximum flow
        exactly when the residual graph has a ``u -> v`` path, which together
        with the reverse arc ``v -> u`` closes a cycle.
        """
        residual = residual or self.residual(caps, flows)
        reach = {}
        out = {}
        for i in edges:
            if caps[i] == 0:
                out[i] = True
            elif flows[i] < caps[i]:
                out[i] = False
            else:
                u = self.tails[i]
                if u not in reach:
                    reach[u] = self.reach(residual, u)
                out[i] = self.heads[i] not in reach[u]
        return out


def network(graph: ExpandedGraph) -> IntegerNetwork:
    """The integer network for ``graph``'s topology, cached on the graph."""
    net = graph.__dict__.get("_net")
    if net is None:
        net = IntegerNetwork(graph)
        object.__setattr__(graph, "_net", net)
    return net


def _scaled(graph: ExpandedGraph, flow: Flow | None = None):
    dens = [e.capacity.denominator for e in graph.edges]
    if flow is not None:
        dens += [x.denominator for x in flow.values]
    scale = lcm(1, *dens)
    caps = integer_caps(graph, scale)
    flows = None if flow is None else [x.numerator * (scale // x.denominator) for x in flow.values]
    return scale, caps, flows


def max_flow(graph: ExpandedGraph) -> tuple[Flow, frozenset]:
    """Maximum flow from the source to the sink, with a minimum cut.

    The cut is the set of edge indices leaving the residual-reachable side of
    the source; its capacity equals the flow value.
    """
    net = network(graph)
    scale, caps, _ = _scaled(graph)
    f = net.solve(caps)
    value = Fraction(sum(f[e.index] for e in graph.edges if e.tail == SOURCE), scale)
    cut = frozenset(net.min_cut(caps, f))
    if Fraction(sum(caps[i] for i in cut), scale) != value:
        raise AssertionError("max-flow/min-cut certificate failed")
    return Flow(tuple(Fraction(x, scale) for x in f), value), cut


def min_cut(graph: ExpandedGraph, flow: Flow) -> frozenset:
    """Cut leaving the residual-reachable side of the source; NotMaximal if the flow can be augmented."""
    _, caps, flows = _scaled(graph, flow)
    return frozenset(network(graph).min_cut(caps, flows))


def cut_capacity(graph: ExpandedGraph, cut) -> Fraction:
    return sum((graph.edges[i].capacity for i in cut), Fraction(0))


def check_flow(graph: ExpandedGraph, flow: Flow) -> list[str]:
    """List violations of the capacity and conservation constraints."""
    out = []
    balance = {v: Fraction(0) for v in graph.nodes}
    for e in graph.edges:
        fe = flow.values[e.index]
        if not 0 <= fe <= e.capacity:
            out.append(f"edge {e.index}: flow {fe} outside [0, {e.capacity}]")
        balance[e.tail] -= fe
        balance[e.head] += fe
    for v, b in balance.items():
        if v not in (SOURCE, SINK) and b != 0:
            out.append(f"node {v}: conservation off by {b}")
    if -balance[SOURCE] != flow.value or balance[SINK] != flow.value:
        out.append("flow value disagrees with source/sink balance")
    return out


def saturation_verdicts(graph: ExpandedGraph, flow: Flow, edges) -> dict:
    """For each edge index, whether every maximum flow saturates it."""
    net = network(graph)
    _, caps, flows = _scaled(graph, flow)
    residual = net.residual(caps, flows)
    if net.sink in net.reach(residual, net.source):
        raise NotMaximal("an augmenting path exists; the flow is not maximum")
    return net.saturation(caps, flows, edges, residual)


def saturated_in_all_max_flows(graph: ExpandedGraph, flow: Flow, edge: int) -> bool:
    return saturation_verdicts(graph, flow, [edge])[edge]


def max_flow_value_with_reduced_capacity(graph: ExpandedGraph, edge: int, delta) -> Fraction:
    delta = Fraction(delta)
    cap = graph.edges[edge].capacity
    if not 0 < delta <= cap:
        raise ValueError(f"delta {delta} outside (0, {cap}]")
    edges = list(graph.edges)
    edges[edge] = replace(edges[edge], capacity=cap - delta)
    reduced = ExpandedGraph(graph.instance, graph.nodes, tuple(edges), graph.mode)
    return max_flow(reduced)[0].value


def saturated_by_reduction(graph: ExpandedGraph, edge: int) -> bool:
    """Independent check: lowering the capacity by one scaled unit lowers the max flow.

    After scaling to integers the max-flow value is piecewise linear in the
    edge capacity with integer breakpoints, so a one-unit decrease is exact.
    """
    cap = graph.edges[edge].capacity
    if cap == 0:
        return True
    unit = Fraction(1, common_denominator(graph))
    full = max_flow(graph)[0].value
    return max_flow_value_with_reduced_capacity(graph, edge, unit) < full
