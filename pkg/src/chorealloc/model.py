"""Restricted additive cost instances and the cost primitives.

Every item ``e`` has an inherent cost ``c(e)``; agent ``i`` pays either
``0`` (when ``e`` is in its zero set) or ``c(e)``. Costs are exact
:class:`fractions.Fraction` values throughout, since the fairness
predicates and the rebalancing loops compare costs with strict
inequalities.

Agents are numbered ``1..n``. Items carry opaque string ids externally and
dense indices ``0..m-1`` internally; bundles are frozensets of indices.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from chorealloc.errors import (
    AllocationError,
    DuplicateItem,
    InstanceError,
    InvalidAgentCount,
    NegativeCost,
    UnknownItem,
)

Cost = Fraction
Bundle = frozenset  # frozenset[int] of item indices
Partition = tuple  # tuple[Bundle, ...], semantically unordered

_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_cost(value) -> Fraction:
    """Parse ``"p/q"``, an integer literal, an int, or a Fraction.

    Floats are rejected: they are not exact.

    >>> parse_cost("10/8")
    Fraction(5, 4)
    >>> parse_cost(3)
    Fraction(3, 1)
    """
    if isinstance(value, bool):
        raise InstanceError(f"not a rational cost: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL.match(value)
        if match:
            num, den = match.groups()
            if den is not None and int(den) == 0:
                raise InstanceError(f"zero denominator in {value!r}")
            return Fraction(int(num), int(den) if den is not None else 1)
    raise InstanceError(f"not a rational cost: {value!r}")


def format_cost(value: Fraction) -> str:
    return str(value)


@dataclass(frozen=True)
class Instance:
    """A validated restricted instance.

    ``zero_sets[a - 1]`` holds the item indices agent ``a`` pays nothing
    for. Use :func:`validate_instance` or :func:`make_instance` to build one.
    """

    n: int
    item_ids: tuple[str, ...]
    costs: tuple[Fraction, ...]
    zero_sets: tuple[frozenset[int], ...]
    _index: Mapping[str, int] = field(repr=False, compare=False, hash=False, default=None)
    _matrix: tuple[tuple[Fraction, ...], ...] = field(
        repr=False, compare=False, hash=False, default=None
    )

    def __post_init__(self):
        object.__setattr__(self, "_index", {e: k for k, e in enumerate(self.item_ids)})
        matrix = tuple(
            tuple(Fraction(0) if k in zeros else c for k, c in enumerate(self.costs))
            for zeros in self.zero_sets
        )
        object.__setattr__(self, "_matrix", matrix)

    @property
    def m(self) -> int:
        return len(self.item_ids)

    @property
    def agents(self) -> range:
        return range(1, self.n + 1)

    @property
    def items(self) -> range:
        return range(len(self.item_ids))

    def index(self, item_id: str) -> int:
        try:
            return self._index[item_id]
        except KeyError:
            raise UnknownItem(f"unknown item id {item_id!r}") from None

    def bundle(self, *item_ids: str) -> frozenset[int]:
        """Bundle of the given item ids, e.g. ``inst.bundle("e1", "e3")``."""
        return frozenset(self.index(e) for e in item_ids)

    def ids(self, bundle: Iterable[int]) -> list[str]:
        return [self.item_ids[k] for k in sorted(bundle)]

    def cost(self, agent: int, item: int) -> Fraction:
        """Agent ``agent``'s cost for item index ``item``."""
        self._check_agent(agent)
        if not 0 <= item < self.m:
            raise UnknownItem(f"unknown item index {item!r}")
        return self._matrix[agent - 1][item]

    def row(self, agent: int) -> tuple[Fraction, ...]:
        self._check_agent(agent)
        return self._matrix[agent - 1]

    def _check_agent(self, agent: int) -> None:
        if not 1 <= agent <= self.n:
            raise InstanceError(f"agent {agent} outside 1..{self.n}")

    def to_json(self) -> dict:
        zero_sets = {}
        for a in self.agents:
            zeros = self.zero_sets[a - 1]
            if zeros:
                zero_sets[str(a)] = self.ids(zeros)
        return {
            "n": self.n,
            "items": [
                {"id": e, "cost": format_cost(c)} for e, c in zip(self.item_ids, self.costs)
            ],
            "zero_sets": zero_sets,
        }


def make_instance(n: int, items, zero_sets=None) -> Instance:
    """Build an instance from Python values.

    ``items`` is a sequence of ``(id, cost)`` pairs or a mapping id -> cost;
    ``zero_sets`` maps 1-based agents to iterables of item ids.
    """
    if isinstance(items, Mapping):
        items = list(items.items())
    raw = {
        "n": n,
        "items": [{"id": e, "cost": c} for e, c in items],
        "zero_sets": {str(a): list(z) for a, z in (zero_sets or {}).items()},
    }
    return validate_instance(raw)


def validate_instance(raw: Mapping) -> Instance:
    """Validate the JSON instance description and canonicalize its costs.

    The format is ``{"n": int, "items": [{"id": str, "cost": "p/q" | int}],
    "zero_sets": {"<agent>": [ids]}}`` with agents numbered from 1.
    """
    if not isinstance(raw, Mapping):
        raise InstanceError("instance must be a JSON object")
    n = raw.get("n")
    if isinstance(n, bool) or not isinstance(n, int):
        raise InvalidAgentCount(f"n must be an integer, got {n!r}")
    if n < 1:
        raise InvalidAgentCount(f"n must be at least 1, got {n}")

    ids: list[str] = []
    costs: list[Fraction] = []
    seen: set[str] = set()
    for entry in raw.get("items", []):
        if not isinstance(entry, Mapping) or "id" not in entry or "cost" not in entry:
            raise InstanceError(f"malformed item entry {entry!r}")
        item_id = entry["id"]
        if not isinstance(item_id, str):
            raise InstanceError(f"item id must be a string, got {item_id!r}")
        if item_id in seen:
            raise DuplicateItem(f"duplicate item id {item_id!r}")
        cost = parse_cost(entry["cost"])
        if cost < 0:
            raise NegativeCost(f"item {item_id!r} has negative cost {cost}")
        seen.add(item_id)
        ids.append(item_id)
        costs.append(cost)

    index = {e: k for k, e in enumerate(ids)}
    zero_sets = [set() for _ in range(n)]
    raw_zero = raw.get("zero_sets", {}) or {}
    if not isinstance(raw_zero, Mapping):
        raise InstanceError("zero_sets must be an object keyed by agent")
    for key, members in raw_zero.items():
        try:
            agent = int(key)
        except (TypeError, ValueError):
            raise InstanceError(f"zero_sets key {key!r} is not an agent number") from None
        if not 1 <= agent <= n:
            raise InstanceError(f"zero_sets key {key!r} outside agents 1..{n}")
        for item_id in members:
            if item_id not in index:
                raise UnknownItem(f"zero set of agent {agent} references unknown item {item_id!r}")
            zero_sets[agent - 1].add(index[item_id])

    return Instance(
        n=n,
        item_ids=tuple(ids),
        costs=tuple(costs),
        zero_sets=tuple(frozenset(z) for z in zero_sets),
    )


@dataclass(frozen=True)
class ItemClassification:
    """Split of the items into consistently-costed ``m_plus`` and ``m_zero``.

    ``per_agent_zero[a - 1]`` is agent ``a``'s declared zero set and
    ``free`` holds the items with ``c(e) = 0``, which cost nothing to anyone.
    """

    m_plus: frozenset[int]
    m_zero: frozenset[int]
    per_agent_zero: tuple[frozenset[int], ...]
    free: frozenset[int]

    def zero_for(self, agent: int) -> frozenset[int]:
        """All items agent ``agent`` pays nothing for."""
        return self.per_agent_zero[agent - 1] | self.free


def classify(instance: Instance) -> ItemClassification:
    free = frozenset(k for k in instance.items if instance.costs[k] == 0)
    declared = frozenset().union(*instance.zero_sets) if instance.zero_sets else frozenset()
    m_zero = declared | free
    m_plus = frozenset(instance.items) - m_zero
    return ItemClassification(
        m_plus=m_plus,
        m_zero=m_zero,
        per_agent_zero=instance.zero_sets,
        free=free,
    )


def bundle_cost(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    row = instance.row(agent)
    total = Fraction(0)
    for k in bundle:
        if not 0 <= k < len(row):
            raise UnknownItem(f"unknown item index {k!r}")
        total += row[k]
    return total


def c_hat(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Bundle cost after dropping its cheapest item (0 for an empty bundle)."""
    values = [instance.cost(agent, k) for k in bundle]
    if not values:
        return Fraction(0)
    return sum(values, Fraction(0)) - min(values)


def c_bar(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Bundle cost after dropping its most expensive item (0 for an empty bundle)."""
    values = [instance.cost(agent, k) for k in bundle]
    if not values:
        return Fraction(0)
    return sum(values, Fraction(0)) - max(values)


@dataclass(frozen=True)
class Allocation:
    """Bundles indexed by agent: ``bundles[a - 1]`` goes to agent ``a``."""

    bundles: tuple[frozenset[int], ...]

    @property
    def n(self) -> int:
        return len(self.bundles)

    def __getitem__(self, agent: int) -> frozenset[int]:
        if not 1 <= agent <= len(self.bundles):
            raise KeyError(agent)
        return self.bundles[agent - 1]

    def items(self):
        return ((a, b) for a, b in enumerate(self.bundles, start=1))

    def to_json(self, instance: Instance) -> dict:
        return {str(a): instance.ids(b) for a, b in self.items()}


def check_allocation(instance: Instance, allocation: Allocation) -> None:
    """Raise :class:`AllocationError` unless ``allocation`` partitions the items among all agents."""
    if allocation.n != instance.n:
        raise AllocationError(f"allocation has {allocation.n} bundles for {instance.n} agents")
    seen: set[int] = set()
    for agent, bundle in allocation.items():
        for k in bundle:
            if not 0 <= k < instance.m:
                raise AllocationError(f"agent {agent} holds unknown item index {k}")
            if k in seen:
                raise AllocationError(f"item {instance.item_ids[k]!r} allocated twice")
            seen.add(k)
    if len(seen) != instance.m:
        missing = instance.ids(set(instance.items) - seen)
        raise AllocationError(f"unallocated items: {missing}")


def allocation_from_json(instance: Instance, bundles: Mapping) -> Allocation:
    """Parse ``{"<agent>": [ids]}``; missing agents receive nothing."""
    result = [set() for _ in range(instance.n)]
    for key, members in bundles.items():
        try:
            agent = int(key)
        except (TypeError, ValueError):
            raise AllocationError(f"bundle key {key!r} is not an agent number") from None
        if not 1 <= agent <= instance.n:
            raise AllocationError(f"bundle key {key!r} outside agents 1..{instance.n}")
        for item_id in members:
            try:
                result[agent - 1].add(instance.index(item_id))
            except UnknownItem as exc:
                raise AllocationError(str(exc)) from None
    allocation = Allocation(tuple(frozenset(b) for b in result))
    check_allocation(instance, allocation)
    return allocation
