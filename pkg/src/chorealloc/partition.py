"""Partitioning of identically-costed items into ``n`` bundles.

Items are addressed by their position in the ``costs`` list; a partition is
a tuple of frozensets of positions. All ties are broken towards the
smallest bundle index, then the smallest item position.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from chorealloc.errors import BudgetExceeded

DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True)
class RebalanceRound:
    round: int
    big: int
    least: int
    item: int
    potential_before: Fraction
    potential_after: Fraction

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "big": self.big,
            "least": self.least,
            "item": self.item,
            "potential_before": str(self.potential_before),
            "potential_after": str(self.potential_after),
        }


@dataclass(frozen=True)
class PartitionResult:
    """A partition with its makespan.

    ``optimal`` is set only when the makespan is certified minimal.
    ``start`` is the partition the rebalancing loop began from and
    ``trace`` its rounds (both trivial for a bare partitioner).
    """

    partition: tuple[frozenset[int], ...]
    makespan: Fraction
    optimal: bool
    trace: tuple[RebalanceRound, ...] = ()
    start: tuple[frozenset[int], ...] | None = None
    loop: str | None = None

    @property
    def rounds(self) -> int:
        return len(self.trace)

    def to_json(self, labels: Sequence[str] | None = None) -> dict:
        def show(part):
            if labels is None:
                return [sorted(b) for b in part]
            return [[labels[k] for k in sorted(b)] for b in part]

        out = {
            "partition": show(self.partition),
            "makespan": str(self.makespan),
            "optimal": self.optimal,
        }
        if self.loop is not None:
            out["loop"] = self.loop
            out["start"] = show(self.start)
            out["rounds"] = [r.to_json() for r in self.trace]
        return out


def _load(bundle, costs) -> Fraction:
    return sum((costs[k] for k in bundle), Fraction(0))


def _makespan(partition, costs) -> Fraction:
    return max((_load(b, costs) for b in partition), default=Fraction(0))


def _decreasing_order(costs: Sequence[Fraction]) -> list[int]:
    # stable: equal costs keep input order
    return sorted(range(len(costs)), key=lambda k: -costs[k])


def _check_inputs(costs, n) -> list[Fraction]:
    if n < 1:
        raise ValueError(f"need at least one bundle, got n={n}")
    costs = [Fraction(c) for c in costs]
    if any(c < 0 for c in costs):
        raise ValueError("costs must be non-negative")
    return costs


def potential(partition, costs) -> Fraction:
    """Sum of squared bundle costs."""
    return sum((_load(b, costs) ** 2 for b in partition), Fraction(0))


def lpt_partition(costs: Sequence[Fraction], n: int) -> PartitionResult:
    """Longest-processing-time greedy: largest item first onto the lightest bundle."""
    costs = _check_inputs(costs, n)
    bundles: list[set[int]] = [set() for _ in range(n)]
    loads = [Fraction(0)] * n
    for k in _decreasing_order(costs):
        j = min(range(n), key=lambda b: loads[b])
        bundles[j].add(k)
        loads[j] += costs[k]
    partition = tuple(frozenset(b) for b in bundles)
    return PartitionResult(partition, max(loads), optimal=False)


def exact_min_makespan_partition(
    costs: Sequence[Fraction], n: int, budget: int = DEFAULT_NODE_BUDGET
) -> PartitionResult:
    """Minimum-makespan ``n``-partition by depth-first branch and bound.

    Items are placed in decreasing cost order. Symmetry is broken by
    trying only the first empty bundle and skipping bundles whose load
    equals an earlier candidate's. The incumbent starts from LPT, and
    the search stops as soon as it meets ``max(max item, total / n)``.

    Raises :class:`BudgetExceeded` after ``budget`` search nodes.
    """
    costs = _check_inputs(costs, n)
    incumbent = lpt_partition(costs, n)
    if not costs:
        return PartitionResult(incumbent.partition, Fraction(0), optimal=True)

    order = _decreasing_order(costs)
    total = sum(costs, Fraction(0))
    lower = max(costs[order[0]], total / n)
    best = incumbent.makespan
    best_assign: list[int] | None = None
    if best == lower:
        return PartitionResult(incumbent.partition, best, optimal=True)

    m = len(order)
    loads = [Fraction(0)] * n
    assign = [0] * m
    nodes = 0

    def search(depth: int) -> bool:
        # returns True once the lower bound is met
        nonlocal best, best_assign, nodes
        if depth == m:
            best = max(loads)
            best_assign = list(assign)
            return best == lower
        c = costs[order[depth]]
        tried = set()  # equal loads, including the empty ones, are symmetric
        for j in range(n):
            load = loads[j]
            if load in tried:
                continue
            tried.add(load)
            if load + c < best:
                nodes += 1
                if nodes > budget:
                    raise BudgetExceeded("exact min-makespan search", None, budget)
                assign[depth] = j
                loads[j] = load + c
                done = search(depth + 1)
                loads[j] = load
                if done:
                    return True
        return False

    search(0)

    if best_assign is None:
        return PartitionResult(incumbent.partition, incumbent.makespan, optimal=True)
    bundles: list[set[int]] = [set() for _ in range(n)]
    for d, j in enumerate(best_assign):
        bundles[j].add(order[d])
    partition = tuple(frozenset(b) for b in bundles)
    return PartitionResult(partition, best, optimal=True)


def _positive(costs) -> list[Fraction]:
    costs = [Fraction(c) for c in costs]
    if any(c <= 0 for c in costs):
        # a zero-cost move leaves every load unchanged and the loop would cycle
        raise ValueError("rebalancing needs strictly positive item costs")
    return costs


def _rebalance(partition, costs, loop: str) -> PartitionResult:
    costs = _positive(costs)
    start = tuple(frozenset(b) for b in partition)
    bundles = [set(b) for b in start]
    loads = [_load(b, costs) for b in bundles]
    n = len(bundles)
    rounds: list[RebalanceRound] = []

    def reduced(j: int) -> Fraction:
        if not bundles[j]:
            return Fraction(0)
        pick = min if loop == "efx" else max
        return loads[j] - pick(costs[k] for k in bundles[j])

    while True:
        big = max(range(n), key=lambda j: (reduced(j), -j))
        least = min(range(n), key=lambda j: loads[j])
        if reduced(big) <= loads[least]:
            break
        if loop == "efx":
            item = min(bundles[big], key=lambda k: (costs[k], k))
        else:
            item = min(bundles[big], key=lambda k: (-costs[k], k))
        before = sum((x * x for x in loads), Fraction(0))
        bundles[big].remove(item)
        bundles[least].add(item)
        loads[big] -= costs[item]
        loads[least] += costs[item]
        after = sum((x * x for x in loads), Fraction(0))
        rounds.append(RebalanceRound(len(rounds) + 1, big, least, item, before, after))

    final = tuple(frozenset(b) for b in bundles)
    return PartitionResult(
        final, max(loads, default=Fraction(0)), optimal=False,
        trace=tuple(rounds), start=start, loop=loop,
    )


def efx_rebalance(partition, costs: Sequence[Fraction]) -> PartitionResult:
    """Move cheapest items off the worst bundle until every bundle is EFX-feasible.

    While the largest "cost minus cheapest item" exceeds the smallest bundle
    cost, the cheapest item of the first such bundle moves to the first
    least-loaded bundle. Each move lowers the sum of squared loads by
    ``2 * c(e) * (c_hat(big) - c(least))`` and never raises the makespan.
    """
    return _rebalance(partition, costs, "efx")


def ef1_rebalance(partition, costs: Sequence[Fraction]) -> PartitionResult:
    """Like :func:`efx_rebalance` with the most expensive item; at most ``n * m`` rounds."""
    return _rebalance(partition, costs, "ef1")
