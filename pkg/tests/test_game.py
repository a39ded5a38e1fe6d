import pickle
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chargegame import flow as fl
from chargegame.game import (
    NEG_INF,
    ProfileEvaluator,
    admissibility,
    optimal_welfare,
    profile_from_flow,
    utilities,
    welfare,
)
from chargegame.instances import (
    RandomParams,
    fig1_structure,
    fig2_flow_example,
    fig3_t2poa,
    fig5_asc_pos,
    fig6_supply_sign,
    fig7_strong_poa,
    random_instance,
)
from chargegame.model import EdgeKind, InfeasibleProfile, build_expanded_graph, make_instance, normalize_profile
from chargegame.verify import FIG2_PROFILES, sample_profile


def test_neg_inf_orders_below_everything():
    assert NEG_INF < Fraction(-10**9)
    assert not NEG_INF > 0
    assert max([NEG_INF, Fraction(0)]) == 0
    assert sorted([Fraction(1), NEG_INF]) == [NEG_INF, 1]
    assert pickle.loads(pickle.dumps(NEG_INF)) is NEG_INF


def test_fig2a_admissible():
    assert admissibility(fig2_flow_example(), FIG2_PROFILES["a"]).profile


def test_fig2c_verdicts():
    v = admissibility(fig2_flow_example(), FIG2_PROFILES["c"])
    assert v.agents == {"a": False, "b": False, "c": True}
    assert not v.profile


def test_zero_profile_admissible():
    for inst in (fig1_structure(), fig3_t2poa(), fig7_strong_poa(5)):
        assert admissibility(inst, {}).profile


def test_fig2c_utilities():
    u = utilities(fig2_flow_example(), FIG2_PROFILES["c"], (1, 2))
    assert u == {"a": NEG_INF, "b": NEG_INF, "c": 1}


def test_zero_strategy_zero_utility():
    assert utilities(fig1_structure(), {}, (2, 1)) == {"a": 0, "b": 0}


def test_fig6_depicted_profile():
    u = utilities(fig6_supply_sign(), {"a": (1, -1, 0), "b": (0, 1, -1)}, (0, -1, 1))
    assert u["a"] == -1


def test_price_length_checked():
    with pytest.raises(ValueError):
        utilities(fig1_structure(), {}, (1, 2, 3))


def test_welfare_examples():
    assert welfare(fig3_t2poa(), {"c": (1, -1)}) == 1
    assert welfare(fig5_asc_pos(4), {}) == 0
    assert welfare(fig2_flow_example(), FIG2_PROFILES["d"]) == 2


def test_optimal_welfare_examples():
    assert optimal_welfare(fig3_t2poa()) == 2
    assert optimal_welfare(fig5_asc_pos(4)) == 2
    for T in (3, 4, 6):
        assert optimal_welfare(fig7_strong_poa(T)) == 1


def test_fig1_flow_profile():
    inst = fig1_structure()
    g = build_expanded_graph(inst)
    flow, _ = fl.max_flow(g)
    prof = profile_from_flow(inst, flow, g)
    moved = [a for a, s in prof.items() if any(s)]
    assert len(moved) == 1 and prof[moved[0]] == (1, -1)
    assert admissibility(inst, prof).profile
    assert welfare(inst, prof) == 1


def test_fig3_flow_profile():
    inst = fig3_t2poa()
    g = build_expanded_graph(inst)
    prof = profile_from_flow(inst, fl.max_flow(g)[0], g)
    assert prof == {"a": (1, -1), "c": (0, 0), "e": (1, -1)}
    assert welfare(inst, prof) == 2


def test_zero_flow_zero_profile():
    inst = make_instance(["u"], [], 2, agents=[("a", "u", [1])])
    g = build_expanded_graph(inst)
    assert profile_from_flow(inst, fl.max_flow(g)[0], g) == {"a": (0, 0)}


def test_flow_profile_rejects_non_maximum_flow():
    inst = fig1_structure()
    g = build_expanded_graph(inst)
    with pytest.raises(fl.NotMaximal):
        profile_from_flow(inst, fl.Flow(tuple(Fraction(0) for _ in g.edges), Fraction(0)), g)


def test_flow_profile_of_a_detour_flow_is_inadmissible():
    # A maximum flow may store energy that a same-step path could deliver directly.
    inst = make_instance(
        ["u", "w"], [("u-w", "u", "w")], 2,
        demands={"u": [1, 1], "w": [0, -1]}, grid_capacity={"u-w": 1}, agents=[("a", "u", [1])],
    )
    g = build_expanded_graph(inst)
    path = {
        (EdgeKind.SOURCE, ("v", "u", 1)), (EdgeKind.CHARGE, ("v", "u", 1)), (EdgeKind.BATTERY, ("b", "a", 1)),
        (EdgeKind.DISCHARGE, ("b", "a", 2)), (EdgeKind.GRID, ("v", "u", 2)), (EdgeKind.SINK, ("v", "w", 2)),
    }
    values = tuple(Fraction(int((e.kind, e.tail if e.kind is not EdgeKind.SOURCE else e.head) in path)) for e in g.edges)
    detour = fl.Flow(values, Fraction(1))
    assert fl.check_flow(g, detour) == []
    prof = profile_from_flow(inst, detour, g)
    assert prof == {"a": (1, -1)}
    assert welfare(inst, prof) == 1
    assert not admissibility(inst, prof).profile
    # the engine's own flow takes the direct path
    assert profile_from_flow(inst, fl.max_flow(g)[0], g) == {"a": (0, 0)}


def test_charging_at_the_last_step_is_inadmissible():
    inst = fig5_asc_pos(4)
    v = admissibility(inst, {"a": (1, -1, 0, 1)})
    assert not v.agents["a"]


def test_infeasible_profile_rejected():
    with pytest.raises(InfeasibleProfile):
        admissibility(fig1_structure(), {"b": (2, -2)})


def _random_case(seed):
    inst = random_instance(seed, RandomParams(nodes=3, T=3, agents=3, max_capacity=2))
    return inst, sample_profile(inst, random.Random(seed))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_evaluator_matches_graph_path(seed):
    inst, prof = _random_case(seed)
    ev = ProfileEvaluator(inst).evaluate(prof)
    v = admissibility(inst, prof)
    assert ev.admissible == tuple(v.agents[a] for a in inst.agent_ids)
    assert ev.welfare == welfare(inst, prof)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_welfare_bounded_by_optimum(seed):
    inst, prof = _random_case(seed)
    assert welfare(inst, prof) <= optimal_welfare(inst)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_engine_flow_profiles_are_optimal(seed):
    inst, _ = _random_case(seed)
    g = build_expanded_graph(inst)
    flow, _ = fl.max_flow(g)
    prof = profile_from_flow(inst, flow, g)
    assert welfare(inst, prof) == flow.value == optimal_welfare(inst)
    assert admissibility(inst, prof).profile


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_utility_is_payoff_or_neg_inf(seed):
    inst, prof = _random_case(seed)
    prices = tuple(range(1, inst.T + 1))
    u = utilities(inst, prof, prices)
    v = admissibility(inst, prof)
    for a, s in zip(inst.agent_ids, normalize_profile(inst, prof)):
        expected = -sum(x * p for x, p in zip(s, prices)) if v.agents[a] else NEG_INF
        assert u[a] == expected
