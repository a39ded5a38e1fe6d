"""Grid strategy spaces, best responses, Nash / k-strong checks and PoA/PoS.

Strategies are searched on the grid g*Z. Search is exact on that grid; the
pruning only drops strategies whose payoff is already too low to matter
(a payoff is fixed by the strategy and the prices; the other agents only decide
whether it is admissible).
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm, prod

from .game import NEG_INF, ProfileEvaluator, optimal_welfare, strategy_value
from .model import Instance, normalize_profile, q

DEFAULT_GRANULARITY = Fraction(1, 2)
DEFAULT_BUDGET = 10**7


class IncompatibleGranularity(ValueError):
    def __init__(self, g, refinement):
        self.g, self.refinement = g, refinement
        super().__init__(f"granularity {g} does not divide every battery capacity; try g={refinement}")


class BudgetExceeded(RuntimeError):
    def __init__(self, size, budget):
        self.size, self.budget = size, budget
        super().__init__(f"search space has {size} profiles, budget is {budget}")


class _Token:
    def __init__(self, text):
        self.text = text

    def __repr__(self):
        return self.text.upper().replace("-", "_")

    def __str__(self):
        return self.text

    def __reduce__(self):
        return (_token, (self.text,))


def _token(text):
    return {"inf": INFINITY, "no-equilibrium": NO_EQUILIBRIUM}[text]


INFINITY = _Token("inf")
NO_EQUILIBRIUM = _Token("no-equilibrium")


def fraction_gcd(*xs) -> Fraction:
    xs = [Fraction(x) for x in xs if x != 0]
    if not xs:
        return Fraction(0)
    den = lcm(*(x.denominator for x in xs))
    return Fraction(gcd(*(x.numerator * (den // x.denominator) for x in xs)), den)


def strategy_grid(instance: Instance, agent: str, g=DEFAULT_GRANULARITY) -> list[tuple]:
    """All battery-feasible strategies of ``agent`` with entries in g*Z, sorted.

    Stored energy stays within the battery for t < T; the last step may only
    discharge, down to an empty battery.
    """
    g = q(g)
    if g <= 0:
        raise ValueError(f"granularity must be positive, got {g}")
    caps = instance.agent(agent).battery_capacity
    if any((c / g).denominator != 1 for c in caps):
        raise IncompatibleGranularity(g, fraction_gcd(g, *caps))
    units = [int(c / g) for c in caps]
    T = instance.T
    out = []

    def rec(t, level, acc):
        if t == T:
            for final in range(0, level + 1):
                out.append(tuple(g * x for x in acc + [final - level]))
            return
        for nxt in range(0, units[t - 1] + 1):
            rec(t + 1, nxt, acc + [nxt - level])

    rec(1, 0, [])
    out.sort()
    return out


@dataclass
class Equilibrium:
    profile: dict
    utilities: dict
    welfare: Fraction


@dataclass
class EquilibriumReport:
    prices: tuple
    granularity: Fraction
    k: int
    equilibria: list
    opt: Fraction
    best_welfare: Fraction | None
    worst_welfare: Fraction | None
    poa: object
    pos: object
    notes: list = field(default_factory=list)


class Game:
    """Grid search context for one (instance, prices, granularity)."""

    def __init__(self, instance: Instance, prices, g=DEFAULT_GRANULARITY, evaluator: ProfileEvaluator | None = None):
        self.instance = instance
        self.g = q(g)
        self.ev = evaluator or ProfileEvaluator(instance, prices)
        if self.ev.prices is None:
            self.ev.prices = tuple(q(p) for p in prices)
        self.prices = self.ev.prices
        self.agents = instance.agent_ids
        self.grids = [strategy_grid(instance, a, self.g) for a in self.agents]
        self.values = [{s: strategy_value(s, self.prices) for s in grid} for grid in self.grids]
        # deviations in the order a best-response scan wants them
        self.by_value = [sorted(grid, key=lambda s, i=i: (-self.values[i][s], s)) for i, grid in enumerate(self.grids)]

    @property
    def space_size(self) -> int:
        return prod(len(gr) for gr in self.grids)

    def value(self, i: int, s: tuple) -> Fraction:
        v = self.values[i].get(s)
        return strategy_value(s, self.prices) if v is None else v

    def utilities(self, prof: tuple) -> tuple:
        return self.ev.utilities(prof)

    def best_response(self, prof: tuple, i: int) -> tuple:
        """Highest-utility grid strategy of agent ``i``; ties go to the lexicographically smallest."""
        for s in self.by_value[i]:
            dev = prof[:i] + (s,) + prof[i + 1:]
            if self.ev.evaluate(dev).admissible[i]:
                return s, self.values[i][s]
        raise AssertionError("the all-zero strategy is always admissible")

    def improving_deviation(self, prof: tuple, i: int, current=None):
        """Best response of agent ``i`` if it strictly beats her current utility, else None."""
        if current is None:
            current = self.ev.utility(prof, i)
        s, u = self.best_response(prof, i)
        return (s, u) if u > current else None

    def nash_witness(self, prof: tuple):
        utils = self.utilities(prof)
        for i in range(len(self.agents)):
            dev = self.improving_deviation(prof, i, utils[i])
            if dev is not None:
                return i, dev[0], dev[1]
        return None

    def coalition_witness(self, prof: tuple, k: int, exact_size: bool = False):
        """A coalition of at most (or exactly) k agents whose joint grid move strictly helps every member."""
        utils = self.utilities(prof)
        n = len(self.agents)
        sizes = [k] if exact_size else range(1, k + 1)
        for size in sizes:
            for coalition in itertools.combinations(range(n), size):
                options = []
                for i in coalition:
                    cur = utils[i]
                    opts = [s for s in self.grids[i] if cur is NEG_INF or self.values[i][s] > cur]
                    if not opts:
                        break
                    options.append(opts)
                else:
                    for choice in itertools.product(*options):
                        dev = list(prof)
                        for i, s in zip(coalition, choice):
                            dev[i] = s
                        dev = tuple(dev)
                        if dev == prof:
                            continue
                        adm = self.ev.evaluate(dev).admissible
                        if all(adm[i] for i in coalition):
                            return coalition, choice
        return None

    def candidates(self):
        """Grid profiles in which no agent has a negative payoff, in lexicographic order."""
        nonneg = [[s for s in grid if self.values[i][s] >= 0] for i, grid in enumerate(self.grids)]
        return itertools.product(*nonneg)

    def is_equilibrium(self, prof: tuple, k: int = 1, exact_size: bool = False) -> bool:
        if not all(self.ev.evaluate(prof).admissible):
            return False
        if k == 1 and not exact_size:
            return self.nash_witness(prof) is None
        if not exact_size and self.nash_witness(prof) is not None:
            return False
        return self.coalition_witness(prof, k, exact_size) is None


def _prepare(instance, prices, g, profile=None):
    game = Game(instance, prices, g)
    prof = None if profile is None else normalize_profile(instance, profile)
    return game, prof


def best_response(instance: Instance, prices, profile, agent: str, g=DEFAULT_GRANULARITY):
    game, prof = _prepare(instance, prices, g, profile)
    return game.best_response(prof, instance.agent_ids.index(agent))


def is_nash(instance: Instance, prices, profile, g=DEFAULT_GRANULARITY):
    """Return ``(True, None)`` or ``(False, (agent, improving strategy, its utility))``."""
    game, prof = _prepare(instance, prices, g, profile)
    w = game.nash_witness(prof)
    if w is None:
        return True, None
    i, s, u = w
    return False, (game.agents[i], s, u)


def is_k_strong(instance: Instance, prices, profile, k: int, g=DEFAULT_GRANULARITY, exact_size: bool = False):
    """Return ``(True, None)`` or ``(False, {agent: deviation})`` for an improving coalition."""
    if not 1 <= k <= len(instance.agents):
        raise ValueError(f"k must lie in [1, {len(instance.agents)}], got {k}")
    game, prof = _prepare(instance, prices, g, profile)
    w = game.coalition_witness(prof, k, exact_size)
    if w is None:
        return True, None
    coalition, choice = w
    return False, {game.agents[i]: s for i, s in zip(coalition, choice)}


def _worker_count(workers):
    if workers is None:
        workers = int(os.environ.get("CHARGEGAME_WORKERS", "1") or 1)
    return max(1, workers)


def _check_chunk(args):
    instance, prices, g, k, exact_size, chunk = args
    game = Game(instance, prices, g)
    return [prof for prof in chunk if game.is_equilibrium(prof, k, exact_size)]


def enumerate_equilibria(
    instance: Instance,
    prices,
    g=DEFAULT_GRANULARITY,
    k: int = 1,
    budget: int = DEFAULT_BUDGET,
    exact_size: bool = False,
    workers: int | None = None,
    game: Game | None = None,
) -> list[tuple]:
    """All grid profiles that are k-strong equilibria, in lexicographic order."""
    game = game or Game(instance, prices, g)
    if instance.agents and not 1 <= k <= len(instance.agents):
        raise ValueError(f"k must lie in [1, {len(instance.agents)}], got {k}")
    size = game.space_size
    if size > budget:
        raise BudgetExceeded(size, budget)
    cands = list(game.candidates())
    workers = _worker_count(workers)
    if workers == 1 or len(cands) < 64:
        return [p for p in cands if game.is_equilibrium(p, k, exact_size)]
    step = -(-len(cands) // (workers * 4))
    chunks = [cands[i:i + step] for i in range(0, len(cands), step)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_check_chunk, [(instance, game.prices, game.g, k, exact_size, c) for c in chunks])
        return [p for part in parts for p in part]


def ratio(opt: Fraction, welfare: Fraction | None):
    if welfare is None:
        return NO_EQUILIBRIUM
    if opt == 0:
        return Fraction(1)  # 0/0
    if welfare == 0:
        return INFINITY
    return opt / welfare


def efficiency_ratios(
    instance: Instance,
    prices,
    g=DEFAULT_GRANULARITY,
    k: int = 1,
    budget: int = DEFAULT_BUDGET,
    exact_size: bool = False,
    workers: int | None = None,
) -> EquilibriumReport:
    game = Game(instance, prices, g)
    profiles = enumerate_equilibria(instance, prices, g, k, budget, exact_size, workers, game=game)
    opt = optimal_welfare(instance, game.ev.graph)
    eqs = []
    for prof in profiles:
        ev = game.ev.evaluate(prof)
        eqs.append(Equilibrium(dict(zip(game.agents, prof)), dict(zip(game.agents, game.utilities(prof))), ev.welfare))
    best = max((e.welfare for e in eqs), default=None)
    worst = min((e.welfare for e in eqs), default=None)
    notes = [f"strategies searched on the grid g={game.g}"]
    if opt == 0:
        notes.append("OPT = 0: ratios reported as 1 by the 0/0 convention")
    return EquilibriumReport(
        prices=game.prices,
        granularity=game.g,
        k=k,
        equilibria=eqs,
        opt=opt,
        best_welfare=best,
        worst_welfare=worst,
        poa=ratio(opt, worst),
        pos=ratio(opt, best),
        notes=notes,
    )


# --- non-existence certificate for the four-step two-agent gadget -------------

NO_NE_PRICES = (1, 11, 12, 13)


@dataclass
class TargetedCheck:
    """The two hand-built deviations evaluated at one equilibrium candidate."""

    profile: tuple
    z: tuple  # step-2 discharge of (a, c)
    y: tuple  # step-3 charge of (a, c)
    current: tuple  # utilities of (a, c)
    deviations: dict  # agent -> (strategy, utility by formula, actual utility)
    inequality_holds: bool

    @property
    def improving(self) -> dict:
        return {a: actual > cur for (a, (_, _, actual)), cur in zip(self.deviations.items(), self.current)}

    @property
    def formula_matches(self) -> dict:
        return {a: formula == actual for a, (_, formula, actual) in self.deviations.items()}


@dataclass
class NoNECertificate:
    granularity: Fraction
    prices: tuple
    profiles: int
    witness_counts: dict
    failures: list  # grid profiles with no improving grid deviation
    targeted: list  # TargetedCheck per candidate meeting the proof's preconditions

    @property
    def inequality_counterexamples(self) -> list:
        return [c for c in self.targeted if c.inequality_holds]

    @property
    def formula_mismatches(self) -> list:
        return [c for c in self.targeted if not all(c.formula_matches.values())]

    @property
    def holds(self) -> bool:
        return not self.failures and not self.inequality_counterexamples


def deviation_witness(game: Game, prof: tuple):
    """``(agent index, strategy, utility, reason)`` strictly improving on ``prof``, or None.

    Cheap witnesses first: an agent with negative or -inf utility gains by doing nothing.
    """
    zero = [tuple(Fraction(0) for _ in range(game.instance.T)) for _ in game.agents]
    for i, s in enumerate(prof):
        if game.value(i, s) < 0:
            return i, zero[i], Fraction(0), "negative payoff"
    utils = game.utilities(prof)
    for i, u in enumerate(utils):
        if u is NEG_INF:
            return i, zero[i], Fraction(0), "inadmissible"
    w = game.nash_witness(prof)
    return None if w is None else (*w, "best response")


def targeted_check(game: Game, prof: tuple) -> TargetedCheck:
    half3 = Fraction(3, 2)
    (sa, sc) = prof
    z = (max(Fraction(0), -sa[1]), max(Fraction(0), -sc[1]))
    y = (max(Fraction(0), sa[2]), max(Fraction(0), sc[2]))
    current = game.utilities(prof)
    devs = {}
    for i, other in ((0, 1), (1, 0)):
        s_new = (1 - z[other], -1 + z[other], half3 - y[other], -half3 + y[other])
        dev = (s_new, prof[1]) if i == 0 else (prof[0], s_new)
        formula = 10 * (1 - z[other]) + half3 - y[other]
        devs[game.agents[i]] = (s_new, formula, game.ev.utility(dev, i))
    ineq = 8 * (z[0] + z[1]) + 2 * (y[0] + y[1]) >= 11
    return TargetedCheck(prof, z, y, current, devs, ineq)


def _meets_preconditions(game: Game, prof: tuple) -> bool:
    sa, sc = prof
    if not all(game.ev.evaluate(prof).admissible):
        return False
    if any(game.value(i, s) < 0 for i, s in enumerate(prof)):
        return False
    if sa[0] + sc[0] != 1 or sa[3] + sc[3] != Fraction(-3, 2):
        return False
    for s in prof:
        if s[1] < 0 and s[2] > 0:
            return False
    return True


def verify_no_ne_construction(g=DEFAULT_GRANULARITY, game: Game | None = None) -> NoNECertificate:
    """Search the no-equilibrium gadget exhaustively and replay the hand-built deviations.

    Every grid profile gets a strictly improving deviation or lands in ``failures``.
    """
    from .instances import fig4_no_ne

    g = q(g)
    if (Fraction(1, 2) / g).denominator != 1:
        raise ValueError(f"granularity {g} must divide 1/2")
    if game is None:
        game = Game(fig4_no_ne(), NO_NE_PRICES, g)
    counts = {"negative payoff": 0, "inadmissible": 0, "best response": 0}
    failures, targeted = [], []
    nonneg = [sum(1 for s in grid if game.values[i][s] >= 0) for i, grid in enumerate(game.grids)]
    counts["negative payoff"] = game.space_size - prod(nonneg)
    for prof in game.candidates():
        w = deviation_witness(game, prof)
        if w is None:
            failures.append(prof)
        else:
            counts[w[3]] += 1
        if _meets_preconditions(game, prof):
            targeted.append(targeted_check(game, prof))
    return NoNECertificate(game.g, game.prices, game.space_size, counts, failures, targeted)
