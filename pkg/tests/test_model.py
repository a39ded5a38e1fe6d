import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chargegame.instances import RandomParams, fig1_structure, fig2_flow_example, fig5_asc_pos, random_instance
from chargegame.model import (
    SINK,
    SOURCE,
    TRANSACTION,
    EdgeKind,
    InfeasibleProfile,
    InvalidInstance,
    apply_strategy,
    build_expanded_graph,
    make_instance,
    normalize_profile,
    q,
    validate_instance,
)
from chargegame.verify import sample_profile


def test_quantities_are_exact():
    assert q("3/2") == Fraction(3, 2)
    assert q(-4) == Fraction(-4)
    with pytest.raises(TypeError):
        q(0.5)


def test_fig1_validates():
    assert validate_instance(fig1_structure()) == []


def test_negative_battery_capacity_reported():
    inst = make_instance(["u"], [], 2, agents=[("a", "u", [-1])])
    assert any("capacity < 0" in v for v in validate_instance(inst))


def test_unknown_location_reported():
    inst = make_instance(["u"], [], 2, agents=[("a", "nowhere", [1])])
    assert any("unknown location" in v for v in validate_instance(inst))


def test_two_agents_one_node_reported():
    inst = make_instance(["u"], [], 2, agents=[("a", "u", [1]), ("b", "u", [1])])
    assert any("already hosts" in v for v in validate_instance(inst))


def test_invalid_instance_rejected_by_builder():
    inst = make_instance(["u"], [], 2, agents=[("a", "u", [-1])])
    with pytest.raises(InvalidInstance):
        build_expanded_graph(inst)


def test_fig1_graph_counts():
    g = build_expanded_graph(fig1_structure())
    assert len(g.nodes) == 2 * 2 + 2 * 2 + 2
    assert len(g.edges_of_kind(EdgeKind.BATTERY)) == 2
    assert len(g.edges_of_kind(*TRANSACTION)) == 8


def test_no_agents_no_battery_part():
    inst = make_instance(["u", "w"], [("e", "u", "w")], 3, demands={"u": [1, 0, 0]}, grid_capacity={"e": 1})
    g = build_expanded_graph(inst)
    assert not g.edges_of_kind(EdgeKind.BATTERY, *TRANSACTION)
    assert all(n[0] == "v" for n in g.nodes if n not in (SOURCE, SINK))


def test_fig5_battery_edges():
    g = build_expanded_graph(fig5_asc_pos(4))
    assert len([n for n in g.nodes if n[0] == "v"]) == 4
    assert len([n for n in g.nodes if n[0] == "b"]) == 4
    battery = g.edges_of_kind(EdgeKind.BATTERY)
    assert [e.capacity for e in battery] == [1, 1, 1]


def test_source_sink_capacities():
    inst = fig1_structure()
    g = build_expanded_graph(inst)
    for e in g.edges:
        if e.kind is EdgeKind.SOURCE:
            assert e.capacity == max(0, inst.demand(e.head[1], e.t))
        if e.kind is EdgeKind.SINK:
            assert e.capacity == max(0, -inst.demand(e.tail[1], e.t))
        if e.kind in TRANSACTION:
            assert e.capacity == inst.total_supply()


def test_fig2_strategy_capacities():
    inst = fig2_flow_example()
    g = apply_strategy(build_expanded_graph(inst), {"c": (1, -1)})
    c1, d1 = g.transaction_index("c", 1)
    c2, d2 = g.transaction_index("c", 2)
    assert (g.edges[c1].capacity, g.edges[d1].capacity) == (1, 0)
    assert (g.edges[c2].capacity, g.edges[d2].capacity) == (0, 1)
    assert g.mode == "strategy"


def test_zero_profile_zero_transactions():
    inst = fig2_flow_example()
    g = apply_strategy(build_expanded_graph(inst), {})
    assert all(e.capacity == 0 for e in g.edges_of_kind(*TRANSACTION))


def test_full_battery_cycle_feasible():
    inst = fig1_structure()
    g = apply_strategy(build_expanded_graph(inst), {"a": (2, -2)})
    assert g.edges[g.transaction_index("a", 1)[0]].capacity == 2


@pytest.mark.parametrize("strategy", [(3, -3), (-1, 1), (1, -2)])
def test_infeasible_profiles_rejected(strategy):
    with pytest.raises(InfeasibleProfile):
        apply_strategy(build_expanded_graph(fig1_structure()), {"a": strategy})


def test_profile_mapping_and_sequence_agree():
    inst = fig2_flow_example()
    assert normalize_profile(inst, {"c": (1, -1)}) == normalize_profile(inst, [(0, 0), (0, 0), (1, -1)])


def test_rebuild_is_deterministic():
    inst = random_instance(3)
    assert build_expanded_graph(inst) == build_expanded_graph(inst)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_apply_strategy_touches_only_transactions(seed):
    inst = random_instance(seed, RandomParams(nodes=3, T=3, agents=2))
    base = build_expanded_graph(inst)
    gs = apply_strategy(base, sample_profile(inst, random.Random(seed)))
    for e, f in zip(base.edges, gs.edges):
        if e.kind not in TRANSACTION:
            assert e == f
    for a in inst.agent_ids:
        for t in range(1, inst.T + 1):
            ci, di = gs.transaction_index(a, t)
            assert gs.edges[ci].capacity == 0 or gs.edges[di].capacity == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5))
def test_scaling_scales_every_capacity(seed, c):
    inst = random_instance(seed, RandomParams(nodes=3, T=3, agents=2))
    prof = sample_profile(inst, random.Random(seed))
    big = apply_strategy(build_expanded_graph(inst.scaled(c)), [[c * x for x in row] for row in prof])
    small = apply_strategy(build_expanded_graph(inst), prof)
    assert [e.capacity for e in big.edges] == [c * e.capacity for e in small.edges]
