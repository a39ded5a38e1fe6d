import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from chargegame import flow as fl
from chargegame.instances import RandomParams, fig1_structure, fig2_flow_example, fig3_t2poa, random_instance
from chargegame.model import SINK, SOURCE, TRANSACTION, ExpandedGraph, apply_strategy, build_expanded_graph, make_instance
from chargegame.verify import FIG2_PROFILES, oracle_disagreements, sample_profile


def networkx_value(graph):
    """Max-flow value from networkx on the integer-scaled graph (parallel arcs merged)."""
    scale = fl.common_denominator(graph)
    caps = fl.integer_caps(graph, scale)
    g = nx.DiGraph()
    g.add_nodes_from(graph.nodes)
    for e, c in zip(graph.edges, caps):
        if g.has_edge(e.tail, e.head):
            g[e.tail][e.head]["capacity"] += c
        else:
            g.add_edge(e.tail, e.head, capacity=c)
    return Fraction(nx.maximum_flow_value(g, SOURCE, SINK), scale)


def strategy_graph(name, profile):
    inst = {"fig2": fig2_flow_example}[name]()
    return apply_strategy(build_expanded_graph(inst), profile)


def test_fig1_value():
    assert fl.max_flow(build_expanded_graph(fig1_structure()))[0].value == 1


def test_fig3_value():
    assert fl.max_flow(build_expanded_graph(fig3_t2poa()))[0].value == 2


def test_no_demand_no_flow():
    inst = make_instance(["u", "w"], [("e", "u", "w")], 2, grid_capacity={"e": 1}, agents=[("a", "u", [1])])
    assert fl.max_flow(build_expanded_graph(inst))[0].value == 0


def test_fig2c_saturation():
    g = strategy_graph("fig2", FIG2_PROFILES["c"])
    flow, _ = fl.max_flow(g)
    assert not fl.saturated_in_all_max_flows(g, flow, g.transaction_index("a", 1)[0])
    assert fl.saturated_in_all_max_flows(g, flow, g.transaction_index("c", 1)[0])
    assert fl.saturated_in_all_max_flows(g, flow, g.transaction_index("c", 2)[1])


def test_zero_capacity_edge_saturated():
    g = strategy_graph("fig2", FIG2_PROFILES["a"])
    flow, _ = fl.max_flow(g)
    ci, _ = g.transaction_index("a", 1)
    assert g.edges[ci].capacity == 0
    assert fl.saturated_in_all_max_flows(g, flow, ci)


def test_reduction_fig2d_drops():
    g = strategy_graph("fig2", FIG2_PROFILES["d"])
    ci, _ = g.transaction_index("b", 1)
    assert fl.max_flow(g)[0].value == 2
    assert fl.max_flow_value_with_reduced_capacity(g, ci, 1) == 1


def test_reduction_fig2c_stays():
    g = strategy_graph("fig2", FIG2_PROFILES["c"])
    ci, _ = g.transaction_index("a", 1)
    assert fl.max_flow_value_with_reduced_capacity(g, ci, 1) == 2


def test_reduction_delta_range():
    g = strategy_graph("fig2", FIG2_PROFILES["c"])
    ci, _ = g.transaction_index("a", 1)
    with pytest.raises(ValueError):
        fl.max_flow_value_with_reduced_capacity(g, ci, 0)
    with pytest.raises(ValueError):
        fl.max_flow_value_with_reduced_capacity(g, ci, 2)


def test_non_maximal_flow_rejected():
    g = strategy_graph("fig2", FIG2_PROFILES["d"])
    zero = fl.Flow(tuple(Fraction(0) for _ in g.edges), Fraction(0))
    with pytest.raises(fl.NotMaximal):
        fl.saturation_verdicts(g, zero, [0])
    with pytest.raises(fl.NotMaximal):
        fl.min_cut(g, zero)


def random_graph(seed, T=3):
    inst = random_instance(seed, RandomParams(nodes=4, T=T, agents=3, max_capacity=3))
    base = build_expanded_graph(inst)
    return inst, apply_strategy(base, sample_profile(inst, random.Random(seed)))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_flow_constraints_and_certificate(seed):
    _, g = random_graph(seed)
    flow, cut = fl.max_flow(g)
    assert fl.check_flow(g, flow) == []
    assert fl.cut_capacity(g, cut) == flow.value


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_value_matches_networkx(seed):
    inst, g = random_graph(seed)
    assert fl.max_flow(g)[0].value == networkx_value(g)
    relaxed = build_expanded_graph(inst)
    assert fl.max_flow(relaxed)[0].value == networkx_value(relaxed)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_oracles_agree(seed):
    _, g = random_graph(seed)
    assert oracle_disagreements(g) == []


def shuffled(graph: ExpandedGraph, seed: int) -> tuple[ExpandedGraph, list]:
    """Same network with edges inserted in a different order; returns the old->new index map."""
    order = list(range(len(graph.edges)))
    random.Random(seed).shuffle(order)
    edges = []
    new_index = [0] * len(order)
    for pos, old in enumerate(order):
        e = graph.edges[old]
        edges.append(type(e)(pos, e.tail, e.head, e.kind, e.capacity, e.t, e.agent, e.host_edge))
        new_index[old] = pos
    return ExpandedGraph(graph.instance, graph.nodes, tuple(edges), graph.mode), new_index


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 1000))
def test_insertion_order_does_not_matter(seed, perm):
    _, g = random_graph(seed)
    h, new_index = shuffled(g, perm)
    fg, fh = fl.max_flow(g)[0], fl.max_flow(h)[0]
    assert fg.value == fh.value
    tx = [e.index for e in g.edges if e.kind in TRANSACTION]
    vg = fl.saturation_verdicts(g, fg, tx)
    vh = fl.saturation_verdicts(h, fh, [new_index[i] for i in tx])
    assert all(vg[i] == vh[new_index[i]] for i in tx)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 7))
def test_homogeneity(seed, c):
    inst, _ = random_graph(seed)
    assert fl.max_flow(build_expanded_graph(inst.scaled(c)))[0].value == c * fl.max_flow(build_expanded_graph(inst))[0].value


def test_fractional_capacities_exact():
    inst = make_instance(
        ["u", "w"], [("e", "u", "w")], 1,
        demands={"u": ["5/3"], "w": ["-7/4"]}, grid_capacity={"e": "3/2"},
    )
    assert fl.max_flow(build_expanded_graph(inst))[0].value == Fraction(3, 2)
