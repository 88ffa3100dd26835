"""Instance generators: the hard instances from the literature as fixtures,
seeded random restricted instances and binary instances."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from chorealloc.model import Instance, make_instance, parse_cost

TABLES = ("table1", "table2", "table3")


def gen_table_instance(which: str, eps) -> Instance:
    """Two-agent hard instances, parametrised by ``eps``.

    table1: e1 costs 1+eps to both; e2 is free for agent 2, e3 free for agent 1.
    table2: table1 plus e4 costing 1 to both.
    table3: e1 costs 1/2+eps, e2/e3 cost 1/2-eps with the same zero pattern (needs eps < 1/2).
    """
    eps = parse_cost(eps)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    one = Fraction(1)
    half = Fraction(1, 2)
    zeros = {1: ["e3"], 2: ["e2"]}
    if which == "table1":
        items = [("e1", one + eps), ("e2", one), ("e3", one)]
    elif which == "table2":
        items = [("e1", one + eps), ("e2", one), ("e3", one), ("e4", one)]
    elif which == "table3":
        if eps >= half:
            raise ValueError(f"table3 needs eps < 1/2, got {eps}")
        items = [("e1", half + eps), ("e2", half - eps), ("e3", half - eps)]
    else:
        raise ValueError(f"unknown table {which!r}; choose from {', '.join(TABLES)}")
    return make_instance(2, items, zeros)


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: int
    cost_low: Fraction = Fraction(1)
    cost_high: Fraction = Fraction(10)
    zero_prob: float = 0.3
    seed: int = 0
    denominator: int = 100

    def __post_init__(self):
        if self.n < 1 or self.m < 0:
            raise ValueError("need n >= 1 and m >= 0")
        if not 0 <= self.zero_prob <= 1:
            raise ValueError(f"zero probability {self.zero_prob} outside [0, 1]")
        low, high = Fraction(self.cost_low), Fraction(self.cost_high)
        if low < 0 or high < low:
            raise ValueError(f"bad cost range [{low}, {high}]")
        if self.denominator < 1:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "cost_low", low)
        object.__setattr__(self, "cost_high", high)


def gen_random_restricted(spec: GenSpec) -> Instance:
    """Costs are multiples of ``1/denominator`` drawn uniformly from the range."""
    rng = random.Random(spec.seed)
    d = spec.denominator
    lo = -((-spec.cost_low * d) // 1)  # ceil
    hi = (spec.cost_high * d) // 1
    if lo > hi:
        raise ValueError("cost range contains no multiple of 1/denominator")
    items = [(f"e{k + 1}", Fraction(rng.randint(int(lo), int(hi)), d)) for k in range(spec.m)]
    zeros = {
        a: [e for e, _ in items if rng.random() < spec.zero_prob]
        for a in range(1, spec.n + 1)
    }
    return make_instance(spec.n, items, zeros)


def gen_binary(n: int, m: int, seed: int = 0, zero_prob: float = 0.3) -> Instance:
    spec = GenSpec(n, m, Fraction(1), Fraction(1), zero_prob, seed, denominator=1)
    return gen_random_restricted(spec)


def random_suite(count: int, seed: int = 0, n_range=(2, 4), m_range=(4, 8)):
    """Reproducible mix of random restricted instances.

    Alternates coarse integer costs (many ties) with fine 1/100 costs.
    """
    rng = random.Random(seed)
    for t in range(count):
        n = rng.randint(*n_range)
        m = rng.randint(*m_range)
        zero_prob = rng.choice((0.0, 0.15, 0.3, 0.5))
        if t % 2:
            spec = GenSpec(n, m, Fraction(1), Fraction(10), zero_prob, rng.randrange(2**32))
        else:
            spec = GenSpec(n, m, Fraction(1), Fraction(5), zero_prob, rng.randrange(2**32), denominator=1)
        yield gen_random_restricted(spec)


def gen_identical(n: int, m: int, seed: int = 0, high: int = 20) -> Instance:
    """Instance with no zero sets: every item lies in M+."""
    spec = GenSpec(n, m, Fraction(1), Fraction(high), 0.0, seed, denominator=1)
    return gen_random_restricted(spec)
