"""Instances where irrelevant items cannot be assigned at all, and the
exhaustive search for an EFX orientation.

An item costs ``c(e)`` to each agent it is relevant to and is unassignable
to everyone else. When every item has exactly two relevant agents the
instance is a multigraph: agents are vertices, items are edges, and an
allocation orients each edge towards one endpoint.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from chorealloc.errors import BudgetExceeded, InstanceError
from chorealloc.model import parse_cost

SEARCH_BUDGET = 10**7


class _Unassignable:
    """Cost of an item to an agent it is not relevant to. Compares above every number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("INFINITE")

    def __gt__(self, other):
        return other is not self

    def __lt__(self, other):
        return False

    def __ge__(self, other):
        return True

    def __le__(self, other):
        return other is self


INFINITE = _Unassignable()


@dataclass(frozen=True)
class InftyInstance:
    n: int
    costs: tuple[Fraction, ...]
    relevance: tuple[frozenset[int], ...]  # relevant agents (1-based) per item
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("need at least one agent")
        if len(self.costs) != len(self.relevance):
            raise InstanceError("costs and relevance sets differ in length")
        for k, (c, rel) in enumerate(zip(self.costs, self.relevance)):
            if c < 0:
                raise InstanceError(f"item {k} has negative cost")
            if not rel:
                raise InstanceError(f"item {k} is relevant to no agent")
            if any(not 1 <= a <= self.n for a in rel):
                raise InstanceError(f"item {k} names an agent outside 1..{self.n}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{k + 1}" for k in range(len(self.costs))))

    @property
    def m(self) -> int:
        return len(self.costs)

    def cost(self, agent: int, item: int):
        """``c(e)`` if relevant, else :data:`INFINITE`."""
        return self.costs[item] if agent in self.relevance[item] else INFINITE

    def is_graph(self) -> bool:
        return all(len(r) == 2 for r in self.relevance)

    def degree(self, agent: int) -> int:
        return sum(agent in r for r in self.relevance)


def graph_instance(n: int, edges: Sequence[tuple[int, int, object]]) -> InftyInstance:
    """Instance with one item per edge ``(u, v, cost)``."""
    costs = []
    rel = []
    labels = []
    for u, v, c in edges:
        if u == v:
            raise InstanceError(f"self-loop at agent {u}")
        costs.append(parse_cost(c))
        rel.append(frozenset((u, v)))
        labels.append(f"e{u}{v}" if max(u, v) < 10 else f"e{u}-{v}")
    return InftyInstance(n, tuple(costs), tuple(rel), tuple(labels))


def complete_graph(k: int, cost=1) -> InftyInstance:
    return graph_instance(k, [(u, v, cost) for u, v in itertools.combinations(range(1, k + 1), 2)])


def example1_instance(heavy=1000, light=1) -> InftyInstance:
    """Complete graph on agents 1-4 with heavy edges, plus light pendants 1-5, 2-6, 3-7, 4-8."""
    edges = [(u, v, heavy) for u, v in itertools.combinations(range(1, 5), 2)]
    edges += [(u, u + 4, light) for u in range(1, 5)]
    return graph_instance(8, edges)


@dataclass(frozen=True)
class OrientationSearchResult:
    total: int
    efx_count: int
    witness: tuple[frozenset[int], ...] | None = None

    def to_json(self, instance: InftyInstance) -> dict:
        out = {"total": self.total, "efx": self.efx_count}
        if self.witness is not None:
            out["witness"] = {
                str(a): [instance.labels[k] for k in sorted(b)]
                for a, b in enumerate(self.witness, start=1)
            }
        return out


def envy_free_up_to_any(instance: InftyInstance, bundles: Sequence[frozenset[int]], i: int, j: int) -> bool:
    """EFX of agent ``i`` towards ``j``; vacuous when ``j`` holds an item irrelevant to ``i``."""
    other = bundles[j - 1]
    if any(i not in instance.relevance[k] for k in other):
        return True
    mine = bundles[i - 1]
    if not mine:
        return True
    own = sum((instance.costs[k] for k in mine), Fraction(0))
    theirs = sum((instance.costs[k] for k in other), Fraction(0))
    cheapest = min(instance.costs[k] for k in mine)
    return own - cheapest <= theirs


def is_efx_orientation(instance: InftyInstance, bundles: Sequence[frozenset[int]]) -> bool:
    agents = range(1, instance.n + 1)
    return all(envy_free_up_to_any(instance, bundles, i, j) for i in agents for j in agents if i != j)


def search_efx_orientation(
    instance: InftyInstance, budget: int = SEARCH_BUDGET, keep_witness: bool = True
) -> OrientationSearchResult:
    """Count EFX allocations among all assignments of items to relevant agents."""
    choices = [sorted(r) for r in instance.relevance]
    total = math.prod(len(c) for c in choices)
    if total > budget:
        raise BudgetExceeded("EFX orientation search", total, budget)
    count = 0
    witness = None
    for owners in itertools.product(*choices):
        bundles = [set() for _ in range(instance.n)]
        for k, a in enumerate(owners):
            bundles[a - 1].add(k)
        frozen = tuple(frozenset(b) for b in bundles)
        if is_efx_orientation(instance, frozen):
            count += 1
            if witness is None and keep_witness:
                witness = frozen
    return OrientationSearchResult(total, count, witness)
