"""Acceptance checks against the results reproduced from the figures.

Each check returns a ``CheckResult``; ``run_checks`` runs any subset. The CLI
``verify-paper`` command and ``tests/test_acceptance.py`` both call into here.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from . import flow as fl
from .equilibria import (
    INFINITY,
    Game,
    efficiency_ratios,
    enumerate_equilibria,
    fraction_gcd,
    is_k_strong,
    is_nash,
    strategy_grid,
    verify_no_ne_construction,
)
from .game import NEG_INF, admissibility, optimal_welfare, profile_from_flow, utilities, welfare
from .instances import RandomParams, paper_instance, random_instance
from .model import TRANSACTION, Instance, apply_strategy, build_expanded_graph, normalize_profile
from .pricing import make_price_profile

PAPER_SUITE = (
    "fig1_structure",
    "fig2_flow_example",
    "fig3_t2poa",
    "fig4_no_ne",
    "fig5_asc_pos:4",
    "fig6_supply_sign:1,1",
    "fig7_strong_poa:4",
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:>2}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


def zero_profile(instance: Instance) -> tuple:
    return tuple(tuple(Fraction(0) for _ in range(instance.T)) for _ in instance.agents)


def sample_profile(instance: Instance, rng: random.Random, g=1) -> tuple:
    """A uniformly drawn grid strategy for each agent."""
    return tuple(rng.choice(strategy_grid(instance, a, g)) for a in instance.agent_ids)


def instance_granularity(instance: Instance) -> Fraction:
    """Coarsest grid dividing every demand and capacity, capped at 1."""
    values = [d for row in instance.demands.values() for d in row]
    values += [k for row in instance.grid_capacity.values() for k in row]
    values += [k for a in instance.agents for k in a.battery_capacity]
    return fraction_gcd(1, *values)


def oracle_disagreements(graph) -> list[int]:
    """Transaction edges where residual reachability and capacity reduction disagree."""
    flow, _ = fl.max_flow(graph)
    edges = [e.index for e in graph.edges if e.kind in TRANSACTION]
    fast = fl.saturation_verdicts(graph, flow, edges)
    return [i for i in edges if fast[i] != fl.saturated_by_reduction(graph, i)]


# -- the criteria ------------------------------------------------------------

FIG2_PROFILES = {
    "a": {"c": (1, -1)},
    "b": {"a": (1, -1), "c": (1, -1)},
    "c": {"a": (1, -1), "b": (1, -1), "c": (1, -1)},
    "d": {"b": (1, -1), "c": (1, -1)},
}


def check_fig2_golden():
    inst, prices = paper_instance("fig2_flow_example")
    problems = []
    for label in "abd":
        if not admissibility(inst, FIG2_PROFILES[label]).profile:
            problems.append(f"({label}) not admissible")
    u = utilities(inst, FIG2_PROFILES["c"], prices)
    if u != {"a": NEG_INF, "b": NEG_INF, "c": Fraction(1)}:
        problems.append(f"(c) utilities {u}")
    w = welfare(inst, FIG2_PROFILES["d"])
    if w != 2:
        problems.append(f"(d) welfare {w}")
    return not problems, "; ".join(problems) or "(a),(b),(d) admissible; (c) a,b -inf, c 1; (d) welfare 2"


def check_oracle_equivalence(random_count: int = 200):
    graphs = 0
    edges = 0
    bad = []
    rng = random.Random(2024)

    def run(label, graph):
        nonlocal graphs, edges
        graphs += 1
        edges += sum(1 for e in graph.edges if e.kind in TRANSACTION)
        if oracle_disagreements(graph):
            bad.append(label)

    for ident in PAPER_SUITE:
        inst, _ = paper_instance(ident)
        graph = build_expanded_graph(inst)
        run(f"{ident} relaxed", graph)
        profiles = [zero_profile(inst), normalize_profile(inst, profile_from_flow(inst, fl.max_flow(graph)[0], graph))]
        if ident == "fig2_flow_example":
            profiles += [normalize_profile(inst, p) for p in FIG2_PROFILES.values()]
        profiles += [sample_profile(inst, rng, "1/2") for _ in range(8)]
        for j, prof in enumerate(profiles):
            run(f"{ident} profile {j}", apply_strategy(graph, prof))
    for seed in range(random_count):
        inst = random_instance(seed, _random_params(seed))
        graph = build_expanded_graph(inst)
        run(f"seed {seed} relaxed", graph)
        for j in range(3):
            run(f"seed {seed} profile {j}", apply_strategy(graph, sample_profile(inst, rng)))
    detail = f"{graphs} graphs, {edges} transaction edges, {len(bad)} disagreeing graphs"
    if bad:
        detail += f" (first: {bad[0]})"
    return not bad, detail


def _random_params(seed: int) -> RandomParams:
    return RandomParams(nodes=1 + seed % 4, T=1 + (seed // 4) % 4, agents=1 + seed % 3, max_capacity=2)


def check_t2_existence():
    out = []
    for ident in ("fig1_structure", "fig3_t2poa"):
        inst, _ = paper_instance(ident)
        prices = make_price_profile("ascending", inst, 1, 1)
        graph = build_expanded_graph(inst)
        prof = profile_from_flow(inst, fl.max_flow(graph)[0], graph)
        ok, witness = is_nash(inst, prices, prof, 1)
        if not ok:
            return False, f"{ident}: {prof} beaten by {witness}"
        out.append(f"{ident} welfare {welfare(inst, prof)}")
    return True, "flow profiles are Nash: " + ", ".join(out)


def check_t2_poa():
    inst, _ = paper_instance("fig3_t2poa")
    rep = efficiency_ratios(inst, (1, 2), 1)
    welfares = sorted(e.welfare for e in rep.equilibria)
    ok = {1, 2} <= set(welfares) and rep.poa == 2 and rep.pos == 1 and rep.opt == 2
    return ok, f"equilibrium welfares {[str(w) for w in welfares]}, OPT {rep.opt}, PoA {rep.poa}, PoS {rep.pos}"


def check_no_equilibrium():
    inst, prices = paper_instance("fig4_no_ne")
    game = Game(inst, prices, Fraction(1, 2))
    eqs = enumerate_equilibria(inst, prices, Fraction(1, 2), game=game)
    cert = verify_no_ne_construction(Fraction(1, 2), game=game)
    ok = not eqs and cert.holds
    detail = (
        f"{len(eqs)} grid equilibria among {cert.profiles} profiles; "
        f"{len(cert.targeted)} precondition candidates, "
        f"{len(cert.inequality_counterexamples)} satisfy 8(z_a+z_c)+2(y_a+y_c)>=11, "
        f"{len(cert.formula_mismatches)} where a hand-built deviation is not admissible"
    )
    if eqs:
        detail += f"; first equilibrium {_fmt_profile(eqs[0])}"
    return ok, detail


def check_ascending_pos():
    parts = []
    ok = True
    for T in (4, 6):
        inst, prices = paper_instance(f"fig5_asc_pos:{T}")
        rep = efficiency_ratios(inst, prices, 1)
        best = [e.welfare for e in rep.equilibria]
        optimal = tuple(Fraction((-1) ** t) for t in range(T))
        nash, witness = is_nash(inst, prices, {"a": optimal}, 1)
        good = rep.opt == T // 2 and best == [1] and rep.pos == T // 2 and not nash and witness is not None
        ok &= good
        parts.append(f"T={T}: OPT {rep.opt}, equilibria {len(best)}, PoS {rep.pos}, optimum beaten by {_fmt_strategy(witness[1]) if witness else None}")
    return ok, "; ".join(parts)


def check_supply_sign():
    inst, prices = paper_instance("fig6_supply_sign:1,1")
    rep = efficiency_ratios(inst, prices, 1)
    only_zero = [e.profile for e in rep.equilibria] == [dict(zip(inst.agent_ids, zero_profile(inst)))]
    u = utilities(inst, {"a": (1, -1, 0), "b": (0, 1, -1)}, prices)
    w = welfare(inst, {"a": (1, -1, 0), "b": (0, 1, -1)})
    ok = only_zero and rep.opt == 1 and rep.pos is INFINITY and u["a"] == -1 and w == 1
    return ok, f"only all-zero: {only_zero}, OPT {rep.opt}, PoS {rep.pos}, depicted profile welfare {w} with u_a {u['a']}"


def check_cooperation():
    parts = []
    ok = True
    for T in (4, 5):
        inst, prices = paper_instance(f"fig7_strong_poa:{T}")
        zero = zero_profile(inst)
        holds, _ = is_k_strong(inst, prices, zero, T - 2, 1)
        breaks, coalition = is_k_strong(inst, prices, zero, T - 1, 1)
        rep = efficiency_ratios(inst, prices, 1, k=T - 2)
        good = holds and not breaks and coalition is not None and rep.poa is INFINITY
        ok &= good
        parts.append(f"T={T}: {T - 2}-strong {holds}, {T - 1}-strong {breaks} (coalition {sorted(coalition or [])}), PoA {rep.poa}")
    return ok, "; ".join(parts)


def strong_bound_cases(random_count: int = 50):
    """(label, instance, ascending prices) for the (T-1)-strong bound."""
    cases = []
    for ident in PAPER_SUITE:
        inst, _ = paper_instance(ident)
        if inst.T >= 2 and inst.agents:
            cases.append((ident, inst, make_price_profile("ascending", inst, 1, 1)))
    inst, _ = paper_instance("fig4_no_ne")
    cases.append(("fig4_no_ne figure prices", inst, (1, 11, 12, 13)))
    seed = 0
    while len(cases) < len(PAPER_SUITE) + 1 + random_count:
        params = RandomParams(nodes=2 + seed % 3, T=2 + seed % 3, agents=1 + seed % 3, max_capacity=1, demand_density=0.5)
        inst = random_instance(10_000 + seed, params)
        seed += 1
        if inst.agents:
            cases.append((f"random {10_000 + seed - 1}", inst, make_price_profile("ascending", inst, 1, 1)))
    return cases


def check_strong_bound(random_count: int = 50):
    found = 0
    worst = Fraction(0)
    for label, inst, prices in strong_bound_cases(random_count):
        k = min(len(inst.agents), inst.T - 1)
        g = Fraction(1, 2) if label.startswith("fig4") else 1
        rep = efficiency_ratios(inst, prices, g, k=k)
        for e in rep.equilibria:
            found += 1
            if rep.opt == 0:
                continue
            if e.welfare == 0 or rep.opt / e.welfare > inst.T:
                return False, f"{label}: OPT {rep.opt} vs equilibrium welfare {e.welfare} with T={inst.T}"
            worst = max(worst, rep.opt / e.welfare / inst.T)
    return True, f"{found} strong equilibria checked, max (OPT/welfare)/T = {worst}"


def check_properties(pairs: int = 1000, scaled: int = 100):
    problems = []
    # non-negative utilities and admissibility of every equilibrium; uniform prices
    for ident in PAPER_SUITE:
        inst, prices = paper_instance(ident)
        g = instance_granularity(inst)
        rep = efficiency_ratios(inst, prices, g)
        for e in rep.equilibria:
            if any(u is NEG_INF or u < 0 for u in e.utilities.values()):
                problems.append(f"{ident}: negative utility in {e.profile}")
        uni = make_price_profile("uniform", inst, 1)
        game = Game(inst, uni, g)
        eqs = set(enumerate_equilibria(inst, uni, g, game=game))
        admissible = {p for p in _all_profiles(game) if all(game.ev.evaluate(p).admissible)}
        if eqs != admissible:
            problems.append(f"{ident}: uniform equilibria differ from admissible profiles")
        pos = efficiency_ratios(inst, uni, g).pos
        if pos != 1:
            problems.append(f"{ident}: uniform PoS {pos}")
    # welfare never beats the optimum
    rng = random.Random(7)
    for j in range(pairs):
        inst = random_instance(50_000 + j, _random_params(j))
        prof = sample_profile(inst, rng)
        if welfare(inst, prof) > optimal_welfare(inst):
            problems.append(f"random {50_000 + j}: welfare above optimum")
    # homogeneity under integer scaling
    for j in range(scaled):
        inst = random_instance(60_000 + j, _random_params(j))
        c = 2 + j % 4
        prof = sample_profile(inst, rng)
        big = inst.scaled(c)
        bigprof = tuple(tuple(c * x for x in row) for row in prof)
        if optimal_welfare(big) != c * optimal_welfare(inst) or welfare(big, bigprof) != c * welfare(inst, prof):
            problems.append(f"random {60_000 + j}: scaling by {c} broke homogeneity")
        if admissibility(big, bigprof).agents != admissibility(inst, prof).agents:
            problems.append(f"random {60_000 + j}: scaling by {c} changed admissibility")
    # every max_flow call checks its own min-cut certificate; count a fresh batch here
    certified = 0
    for j in range(pairs // 10):
        graph = build_expanded_graph(random_instance(70_000 + j, _random_params(j)))
        flow, cut = fl.max_flow(graph)
        certified += fl.cut_capacity(graph, cut) == flow.value and not fl.check_flow(graph, flow)
    if certified != pairs // 10:
        problems.append("min-cut certificate mismatch")
    detail = "; ".join(problems[:3]) or f"paper suite + {pairs} welfare pairs + {scaled} scalings + {certified} certificates"
    return not problems, detail


def _all_profiles(game: Game):
    import itertools

    return itertools.product(*game.grids)


def _fmt_strategy(s) -> str:
    return "(" + ",".join(str(x) for x in s) + ")"


def _fmt_profile(prof) -> str:
    return " ".join(_fmt_strategy(s) for s in prof)


CHECKS = (
    (1, "Fig 2 admissibility golden suite", check_fig2_golden),
    (2, "residual vs capacity-reduction oracle", check_oracle_equivalence),
    (3, "T=2 flow profile is a Nash equilibrium", check_t2_existence),
    (4, "T=2 price of anarchy 2", check_t2_poa),
    (5, "no equilibrium on the four-step gadget", check_no_equilibrium),
    (6, "ascending prices PoS floor(T/2)", check_ascending_pos),
    (7, "supply-sign PoS infinite", check_supply_sign),
    (8, "cooperation threshold T-1", check_cooperation),
    (9, "(T-1)-strong PoA at most T", check_strong_bound),
    (10, "property suites", check_properties),
)


def run_check(number: int) -> CheckResult:
    for n, name, fn in CHECKS:
        if n == number:
            start = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # a crash is a failed criterion, reported like any other
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            return CheckResult(n, name, bool(passed), detail, time.perf_counter() - start)
    raise ValueError(f"no acceptance check numbered {number}")


def run_checks(numbers=None) -> list[CheckResult]:
    numbers = numbers or [n for n, _, _ in CHECKS]
    return [run_check(n) for n in numbers]
