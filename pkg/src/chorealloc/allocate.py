"""The three end-to-end allocation algorithms.

All three first split the consistently-costed items ``M+`` into ``n``
bundles (Phase 1), then hand the zero-cost items ``M0`` out (Phase 2) and
finally decide which agent receives which bundle (Phase 3).

``solve_efx_mms``       exact min-makespan partition + EFX rebalancing
``solve_efx_mms_poly``  LPT partition, no search
``solve_ef1_mms_po``    exact min-makespan partition + EF1 rebalancing;
                        every zero-cost item goes to an agent who values it at 0
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, replace

from chorealloc.model import Allocation, Instance, bundle_cost, classify
from chorealloc.partition import (
    DEFAULT_NODE_BUDGET,
    PartitionResult,
    ef1_rebalance,
    efx_rebalance,
    exact_min_makespan_partition,
    lpt_partition,
)

ALGORITHMS = ("efx-mms", "efx-mms-poly", "ef1-mms-po")


@dataclass(frozen=True)
class Phase2Step:
    agent: int
    items: frozenset[int]
    bundle: int


@dataclass(frozen=True)
class ModificationLog:
    """Who touched which bundle while the zero-cost items were handed out.

    ``last_modifier[j]`` is the last agent that modified bundle ``j`` (0 if
    untouched) and ``modifications[j]`` counts all its modifications.
    ``bundles`` is the partition at the end of Phase 2.
    """

    last_modifier: tuple[int, ...]
    modifications: tuple[int, ...]
    bundles: tuple[frozenset[int], ...]
    steps: tuple[Phase2Step, ...] = ()


@dataclass(frozen=True)
class SolveTrace:
    algorithm: str
    agent_order: tuple[int, ...]
    phase1: PartitionResult  # bundles hold instance item indices
    log: ModificationLog
    assignment: tuple[int, ...]  # assignment[a - 1] = bundle index of agent a
    allocation: Allocation

    def to_json(self, instance: Instance) -> dict:
        ids = instance.item_ids
        return {
            "algorithm": self.algorithm,
            "agent_order": list(self.agent_order),
            "phase1": self.phase1.to_json(ids),
            "phase2": [
                {"agent": s.agent, "items": [ids[k] for k in sorted(s.items)], "bundle": s.bundle}
                for s in self.log.steps
            ],
            "last_modifier": list(self.log.last_modifier),
            "modifications": list(self.log.modifications),
            "assignment": {str(a): j for a, j in enumerate(self.assignment, start=1)},
        }


def _order(instance: Instance, agent_order) -> tuple[int, ...]:
    if agent_order is None:
        return tuple(instance.agents)
    order = tuple(int(a) for a in agent_order)
    if sorted(order) != list(instance.agents):
        raise ValueError(f"agent order {order} is not a permutation of 1..{instance.n}")
    return order


def phase2_assign_zeros(
    instance: Instance, partition: Sequence[frozenset[int]], agent_order=None
) -> tuple[tuple[frozenset[int], ...], ModificationLog]:
    """Each agent in turn adds its still-unallocated zero-cost items to its cheapest bundle.

    An agent with nothing left to add still counts as modifying that bundle.
    Items with ``c(e) = 0`` are zero to everyone and go with the first agent.
    """
    order = _order(instance, agent_order)
    classes = classify(instance)
    bundles = [set(b) for b in partition]
    n = len(bundles)
    last = [0] * n
    count = [0] * n
    remaining = set(classes.m_zero)
    steps = []
    for agent in order:
        take = frozenset(classes.zero_for(agent) & remaining)
        costs = [bundle_cost(instance, agent, b) for b in bundles]
        j = min(range(n), key=lambda b: costs[b])
        bundles[j] |= take
        remaining -= take
        last[j] = agent
        count[j] += 1
        steps.append(Phase2Step(agent, take, j))
    assert not remaining, "zero-cost items left after every agent's turn"
    final = tuple(frozenset(b) for b in bundles)
    return final, ModificationLog(tuple(last), tuple(count), final, tuple(steps))


def bundle_assignment(log: ModificationLog, agents: Sequence[int]) -> tuple[int, ...]:
    """Bundle index per agent: last modifiers keep their bundle, the rest go in index order."""
    n = len(log.last_modifier)
    owner: dict[int, int] = {}
    for j, agent in enumerate(log.last_modifier):
        if agent:
            if agent in owner:
                raise ValueError(f"agent {agent} is last modifier of two bundles")
            owner[agent] = j
    free_bundles = iter(j for j in range(n) if log.last_modifier[j] == 0)
    for agent in sorted(agents):
        if agent not in owner:
            owner[agent] = next(free_bundles)
    return tuple(owner[a] for a in sorted(agents))


def phase3_assign_bundles(
    partition: Sequence[frozenset[int]], log: ModificationLog, agents: Sequence[int]
) -> Allocation:
    assignment = bundle_assignment(log, agents)
    return Allocation(tuple(frozenset(partition[j]) for j in assignment))


def _phase1(instance: Instance, kind: str, budget: int) -> PartitionResult:
    plus = sorted(classify(instance).m_plus)
    costs = [instance.costs[k] for k in plus]
    if kind == "lpt":
        base = lpt_partition(costs, instance.n)
        result = efx_rebalance(base.partition, costs)
        assert result.rounds == 0, "LPT output must already be EFX-feasible"
    else:
        base = exact_min_makespan_partition(costs, instance.n, budget=budget)
        loop = efx_rebalance if kind == "efx" else ef1_rebalance
        result = loop(base.partition, costs)

    def lift(part):
        return tuple(frozenset(plus[p] for p in b) for b in part)

    # item positions in M+ back to instance indices
    trace = tuple(replace(r, item=plus[r.item]) for r in result.trace)
    return replace(
        result,
        partition=lift(result.partition),
        start=lift(result.start),
        trace=trace,
        optimal=base.optimal and result.makespan == base.makespan,
    )


def _finish(instance, algorithm, order, phase1, bundles, log, assignment) -> tuple[Allocation, SolveTrace]:
    allocation = Allocation(tuple(bundles[j] for j in assignment))
    trace = SolveTrace(algorithm, order, phase1, log, assignment, allocation)
    return allocation, trace


def _efx_family(instance, agent_order, kind, algorithm, budget):
    order = _order(instance, agent_order)
    phase1 = _phase1(instance, kind, budget)
    bundles, log = phase2_assign_zeros(instance, phase1.partition, order)
    assignment = bundle_assignment(log, instance.agents)
    return _finish(instance, algorithm, order, phase1, bundles, log, assignment)


def solve_efx_mms(
    instance: Instance, agent_order=None, budget: int = DEFAULT_NODE_BUDGET
) -> tuple[Allocation, SolveTrace]:
    """EFX and MMS allocation.

    Raises :class:`~chorealloc.errors.BudgetExceeded` if the exact
    partition of ``M+`` does not fit the node budget.
    """
    return _efx_family(instance, agent_order, "efx", "efx-mms", budget)


def solve_efx_mms_poly(instance: Instance, agent_order=None) -> tuple[Allocation, SolveTrace]:
    """EFX and 4/3-MMS allocation in polynomial time."""
    return _efx_family(instance, agent_order, "lpt", "efx-mms-poly", DEFAULT_NODE_BUDGET)


def solve_ef1_mms_po(
    instance: Instance, agent_order=None, budget: int = DEFAULT_NODE_BUDGET
) -> tuple[Allocation, SolveTrace]:
    """EF1, MMS and PO allocation.

    Agents take bundles in order (lowest remaining index first) together with
    their unallocated zero-cost items, so every item of ``M0`` ends with an
    agent who pays nothing for it and the social cost equals ``c(M+)``.
    """
    order = _order(instance, agent_order)
    phase1 = _phase1(instance, "ef1", budget)
    classes = classify(instance)
    remaining = set(classes.m_zero)
    bundles = [set(b) for b in phase1.partition]
    n = instance.n
    steps = []
    assignment = [0] * n
    for j, agent in enumerate(order):
        take = frozenset(classes.zero_for(agent) & remaining)
        bundles[j] |= take
        remaining -= take
        assignment[agent - 1] = j
        steps.append(Phase2Step(agent, take, j))
    assert not remaining, "zero-cost items left after every agent's turn"
    final = tuple(frozenset(b) for b in bundles)
    log = ModificationLog(tuple(order), (1,) * n, final, tuple(steps))
    return _finish(instance, "ef1-mms-po", order, phase1, final, log, tuple(assignment))


SOLVERS = {
    "efx-mms": solve_efx_mms,
    "efx-mms-poly": solve_efx_mms_poly,
    "ef1-mms-po": solve_ef1_mms_po,
}


def solve(instance: Instance, algorithm: str, agent_order=None, budget: int = DEFAULT_NODE_BUDGET):
    if algorithm not in SOLVERS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    if algorithm == "efx-mms-poly":
        return solve_efx_mms_poly(instance, agent_order)
    return SOLVERS[algorithm](instance, agent_order, budget=budget)


def replay(instance: Instance, trace: SolveTrace) -> Allocation:
    """Rebuild the allocation from the Phase-1 partition, the Phase-2 steps and the assignment."""
    bundles = [set(b) for b in trace.phase1.partition]
    for step in trace.log.steps:
        bundles[step.bundle] |= step.items
    return Allocation(tuple(frozenset(bundles[j]) for j in trace.assignment))

