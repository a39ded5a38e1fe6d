import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chargegame.game import optimal_welfare
from chargegame.instances import (
    PAPER_IDS,
    InstanceFormatError,
    RandomParams,
    fig1_structure,
    fig5_asc_pos,
    fig6_supply_sign,
    fig7_strong_poa,
    instance_to_dict,
    load_instance,
    paper_instance,
    random_instance,
    save_instance,
)
from chargegame.model import EdgeKind, InvalidInstance, build_expanded_graph, validate_instance


@pytest.mark.parametrize("ident", PAPER_IDS)
def test_paper_instances_validate(ident):
    inst, prices = paper_instance(ident)
    assert validate_instance(inst) == []
    assert prices is None or len(prices) == inst.T


@pytest.mark.parametrize(
    "ident,opt",
    [
        ("fig1_structure", 1),
        ("fig2_flow_example", 2),
        ("fig3_t2poa", 2),
        ("fig4_no_ne", Fraction(5, 2)),
        ("fig5_asc_pos:4", 2),
        ("fig5_asc_pos:5", 2),
        ("fig5_asc_pos:6", 3),
        ("fig6_supply_sign:1,1", 1),
        ("fig6_supply_sign:2,3", 1),
        ("fig7_strong_poa:4", 1),
        ("fig7_strong_poa:6", 1),
    ],
)
def test_optimal_welfare_of_figures(ident, opt):
    assert optimal_welfare(paper_instance(ident)[0]) == opt


def test_fig7_single_path_through_three_batteries():
    inst = fig7_strong_poa(4)
    g = build_expanded_graph(inst)
    live = [e for e in g.edges if e.kind is EdgeKind.GRID and e.capacity > 0]
    assert [(e.host_edge, e.t) for e in live] == [("v1-v2", 2), ("v2-v3", 3)]
    assert len(inst.agents) == 3


@pytest.mark.parametrize("bad", ["fig5_asc_pos:1", "fig7_strong_poa:2", "fig6_supply_sign:0,1", "fig1_structure:3", "fig9"])
def test_out_of_range_parameters(bad):
    with pytest.raises(ValueError):
        paper_instance(bad)


def test_fig6_prices():
    assert paper_instance("fig6_supply_sign:2,3")[1] == (0, -2, 3)


def test_random_is_deterministic():
    assert random_instance(42) == random_instance(42)


def test_random_zero_density_has_zero_optimum():
    inst = random_instance(5, RandomParams(demand_density=0))
    assert all(d == 0 for row in inst.demands.values() for d in row)
    assert optimal_welfare(inst) == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_random_instances_validate_and_round_trip(seed):
    inst = random_instance(seed, RandomParams(nodes=4, T=4, agents=3))
    assert validate_instance(inst) == []
    assert load_instance(save_instance(inst)) == inst


@pytest.mark.parametrize("ident", ["fig1_structure", "fig4_no_ne", "fig6_supply_sign:1,1", "fig7_strong_poa:5"])
def test_round_trip(ident):
    inst = paper_instance(ident)[0]
    assert load_instance(save_instance(inst)) == inst


def test_rational_capacity_parsed():
    doc = instance_to_dict(fig1_structure())
    doc["edges"][0]["capacity"] = ["3/2", 1]
    inst = load_instance(json.dumps(doc))
    assert inst.capacity(doc["edges"][0]["id"], 1) == Fraction(3, 2)


def test_zero_horizon_rejected():
    doc = instance_to_dict(fig1_structure())
    doc["T"] = 0
    with pytest.raises(InstanceFormatError, match="T"):
        load_instance(json.dumps(doc))


def test_unknown_field_rejected():
    doc = instance_to_dict(fig1_structure())
    doc["agents"][0]["colour"] = "red"
    with pytest.raises(InstanceFormatError, match=r"agents\[0\].*colour"):
        load_instance(json.dumps(doc))


def test_syntax_error_has_location():
    with pytest.raises(InstanceFormatError, match="line 2"):
        load_instance('{"T": 2,\n "nodes": [,]}')


@pytest.mark.parametrize("value", [0.5, "1.5", "1/0", True])
def test_bad_numbers_rejected(value):
    doc = instance_to_dict(fig1_structure())
    doc["demands"]["u"][0] = value
    with pytest.raises(InstanceFormatError, match=r"demands\.u\[0\]"):
        load_instance(json.dumps(doc))


def test_negative_capacity_is_invalid():
    doc = instance_to_dict(fig5_asc_pos(2))
    doc["agents"][0]["battery_capacity"] = [-1]
    with pytest.raises(InvalidInstance, match="capacity < 0"):
        load_instance(json.dumps(doc))
    assert load_instance(json.dumps(doc), validate=False).agents[0].battery_capacity == (-1,)


def test_saved_text_is_stable():
    assert save_instance(fig6_supply_sign()) == save_instance(fig6_supply_sign())
