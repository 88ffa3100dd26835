"""Independent oracles: fairness predicates, exact MMS values, Pareto
optimality, social-cost accounting and the brute-force price of fairness.

Nothing here calls into the allocation algorithms; the module only reads
instances, allocations and modification logs.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from chorealloc.errors import AllocationError, BudgetExceeded
from chorealloc.model import Allocation, Instance, bundle_cost, c_hat, check_allocation, classify

ENUMERATION_BUDGET = 10**8
MMS_BUDGET = 10**7


@dataclass(frozen=True)
class PairCheck:
    """Verdict of agent ``i`` towards agent ``j``.

    ``witness`` is the removed item that clears envy (EF1 pass), or the
    item whose removal still leaves envy (EFX failure); otherwise ``None``.
    """

    passed: bool
    witness: int | None = None


@dataclass(frozen=True)
class MMSCheck:
    cost: Fraction
    mms: Fraction
    alpha: Fraction
    passed: bool

    @property
    def ratio(self) -> Fraction | None:
        return None if self.mms == 0 else self.cost / self.mms


@dataclass(frozen=True)
class FairnessReport:
    ef: dict
    ef1: dict
    efx: dict
    mms: dict | None = None

    @property
    def is_ef(self) -> bool:
        return all(v.passed for v in self.ef.values())

    @property
    def is_ef1(self) -> bool:
        return all(v.passed for v in self.ef1.values())

    @property
    def is_efx(self) -> bool:
        return all(v.passed for v in self.efx.values())

    @property
    def is_alpha_mms(self) -> bool | None:
        if self.mms is None:
            return None
        return all(v.passed for v in self.mms.values())

    def implications_hold(self) -> bool:
        """EF implies EFX implies EF1, pair by pair."""
        return all(
            (not self.ef[p].passed or self.efx[p].passed) and (not self.efx[p].passed or self.ef1[p].passed)
            for p in self.ef
        )

    def to_json(self, instance: Instance) -> dict:
        def pairs(table):
            out = []
            for (i, j), v in sorted(table.items()):
                row = {"agent": i, "other": j, "pass": v.passed}
                if v.witness is not None:
                    row["witness"] = instance.item_ids[v.witness]
                out.append(row)
            return out

        out = {
            "ef": self.is_ef,
            "ef1": self.is_ef1,
            "efx": self.is_efx,
            "pairs": {"ef": pairs(self.ef), "ef1": pairs(self.ef1), "efx": pairs(self.efx)},
        }
        if self.mms is not None:
            out["alpha_mms"] = self.is_alpha_mms
            out["mms"] = {
                str(a): {
                    "cost": str(v.cost),
                    "mms": str(v.mms),
                    "alpha": str(v.alpha),
                    "ratio": None if v.ratio is None else str(v.ratio),
                    "pass": v.passed,
                }
                for a, v in sorted(self.mms.items())
            }
        return out


@dataclass(frozen=True)
class EfficiencyReport:
    """Social cost against ``OPT = c(M+)`` and the N0/N1/N2 group split.

    N0, N1 and N2 hold agents whose bundle was modified 0, 1 and at least 2
    times while zero-cost items were handed out.
    """

    social_cost: Fraction
    opt: Fraction
    n0: tuple[int, ...] = ()
    n1: tuple[int, ...] = ()
    n2: tuple[int, ...] = ()
    cost_n01: Fraction = Fraction(0)
    cost_n2: Fraction = Fraction(0)
    po: bool | None = None
    grouped: bool = False

    @property
    def ratio(self) -> Fraction | None:
        return None if self.opt == 0 else self.social_cost / self.opt

    @property
    def groups_balanced(self) -> bool:
        return len(self.n0) >= len(self.n2)

    @property
    def group_bounds_hold(self) -> bool:
        return self.cost_n01 <= self.opt and self.cost_n2 <= self.opt

    def to_json(self) -> dict:
        out = {
            "social_cost": str(self.social_cost),
            "opt": str(self.opt),
            "ratio": None if self.ratio is None else str(self.ratio),
            "po": self.po,
        }
        if self.grouped:
            out.update({
                "N0": list(self.n0),
                "N1": list(self.n1),
                "N2": list(self.n2),
                "cost_N0_N1": str(self.cost_n01),
                "cost_N2": str(self.cost_n2),
                "groups_balanced": self.groups_balanced,
                "group_bounds_hold": self.group_bounds_hold,
            })
        return out


def _pairs(n: int):
    return ((i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j)


def check_ef(instance: Instance, allocation: Allocation) -> dict[tuple[int, int], PairCheck]:
    out = {}
    for i, j in _pairs(instance.n):
        own = bundle_cost(instance, i, allocation[i])
        out[i, j] = PairCheck(own <= bundle_cost(instance, i, allocation[j]))
    return out


def check_ef1(instance: Instance, allocation: Allocation) -> dict[tuple[int, int], PairCheck]:
    out = {}
    for i, j in _pairs(instance.n):
        mine = allocation[i]
        if not mine:
            out[i, j] = PairCheck(True)
            continue
        own = bundle_cost(instance, i, mine)
        other = bundle_cost(instance, i, allocation[j])
        witness = next(
            (e for e in sorted(mine) if own - instance.cost(i, e) <= other), None
        )
        out[i, j] = PairCheck(witness is not None, witness)
    return out


def check_efx(instance: Instance, allocation: Allocation) -> dict[tuple[int, int], PairCheck]:
    out = {}
    for i, j in _pairs(instance.n):
        mine = allocation[i]
        own = bundle_cost(instance, i, mine)
        other = bundle_cost(instance, i, allocation[j])
        witness = next(
            (e for e in sorted(mine) if own - instance.cost(i, e) > other), None
        )
        out[i, j] = PairCheck(witness is None, witness)
    return out


def check_efx_feasible(instance: Instance, partition: Sequence, agent: int, bundle_index: int) -> bool:
    """Is ``partition[bundle_index]`` EFX-feasible to ``agent`` within ``partition``?

    The minimum ranges over every bundle, the candidate included.
    """
    cheapest = min(bundle_cost(instance, agent, b) for b in partition)
    return c_hat(instance, agent, partition[bundle_index]) <= cheapest


def mms_value(
    instance: Instance, agent: int, item_set: Iterable[int] | None = None,
    k_bundles: int | None = None, budget: int = MMS_BUDGET,
) -> Fraction:
    """Exact maximin share of ``agent`` over ``item_set`` (default: all items) in ``k_bundles``.

    Dynamic programme over subsets: ``best[t][S]`` is the least achievable
    maximum when ``S`` is split into ``t`` bundles. Items the agent values
    at zero are dropped first since they never change the maximum.
    """
    items = instance.items if item_set is None else item_set
    k = instance.n if k_bundles is None else k_bundles
    if k < 1:
        raise ValueError("need at least one bundle")
    values = [instance.cost(agent, e) for e in items]
    return _mms_of_values(values, k, budget)


def _mms_of_values(values: Sequence[Fraction], k: int, budget: int) -> Fraction:
    values = [v for v in values if v > 0]
    m = len(values)
    if m == 0:
        return Fraction(0)
    k = min(k, m)
    if k == 1:
        return sum(values, Fraction(0))
    work = 3**m * (k - 1)
    if work > budget:
        raise BudgetExceeded("MMS subset enumeration", work, budget)

    full = (1 << m) - 1
    load = [Fraction(0)] * (full + 1)
    for mask in range(1, full + 1):
        low = mask & -mask
        load[mask] = load[mask ^ low] + values[low.bit_length() - 1]

    best = load[:]  # one bundle
    for _ in range(k - 1):
        nxt = best[:]
        for mask in range(1, full + 1):
            low = mask & -mask
            rest = mask ^ low
            top = best[mask]
            # the bundle holding the lowest item: low | sub for every sub of rest
            sub = rest
            while True:
                bundle = low | sub
                cand = max(load[bundle], best[mask ^ bundle])
                if cand < top:
                    top = cand
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            nxt[mask] = top
        best = nxt
    return best[full]


def mms_values(instance: Instance, budget: int = MMS_BUDGET) -> dict[int, Fraction]:
    return {a: mms_value(instance, a, budget=budget) for a in instance.agents}


def check_alpha_mms(
    instance: Instance, allocation: Allocation, alpha=1, mms: dict[int, Fraction] | None = None,
    budget: int = MMS_BUDGET,
) -> dict[int, MMSCheck]:
    """Per-agent ``c_i(X_i) <= alpha * MMS_i``; with ``MMS_i = 0`` the bundle must cost 0."""
    alpha = Fraction(alpha)
    if mms is None:
        mms = mms_values(instance, budget)
    out = {}
    for a in instance.agents:
        cost = bundle_cost(instance, a, allocation[a])
        out[a] = MMSCheck(cost, mms[a], alpha, cost <= alpha * mms[a])
    return out


def fairness_report(
    instance: Instance, allocation: Allocation, alpha=None, mms_budget: int = MMS_BUDGET
) -> FairnessReport:
    check_allocation(instance, allocation)
    mms = None if alpha is None else check_alpha_mms(instance, allocation, alpha, budget=mms_budget)
    return FairnessReport(
        check_ef(instance, allocation), check_ef1(instance, allocation),
        check_efx(instance, allocation), mms,
    )


def social_cost(instance: Instance, allocation: Allocation) -> Fraction:
    return sum((bundle_cost(instance, a, b) for a, b in allocation.items()), Fraction(0))


def opt_social_cost(instance: Instance) -> Fraction:
    """``c(M+)``: every other item can go to an agent who pays nothing for it."""
    return sum((instance.costs[k] for k in classify(instance).m_plus), Fraction(0))


def _check_enumeration(instance: Instance, budget: int, what: str) -> None:
    size = instance.n ** instance.m
    if size > budget:
        raise BudgetExceeded(what, size, budget)


def check_po(
    instance: Instance, allocation: Allocation, mode: str = "sufficient",
    budget: int = ENUMERATION_BUDGET,
) -> bool:
    """Pareto optimality.

    ``sufficient``: passes iff the social cost is minimal, which implies PO
    (a failure does not prove domination). ``exhaustive``: searches every
    allocation for one that is no worse for all agents and better for one.
    """
    if mode == "sufficient":
        return social_cost(instance, allocation) == opt_social_cost(instance)
    if mode != "exhaustive":
        raise ValueError(f"unknown PO mode {mode!r}")
    _check_enumeration(instance, budget, "exhaustive PO check")
    return _find_dominating(instance, allocation) is None


def _find_dominating(instance: Instance, allocation: Allocation):
    # depth-first over item owners, pruning as soon as some agent exceeds its current cost
    caps = [bundle_cost(instance, a, allocation[a]) for a in instance.agents]
    rows = [instance.row(a) for a in instance.agents]
    n, m = instance.n, instance.m
    loads = [Fraction(0)] * n
    owner = [0] * m

    def dfs(k: int):
        if k == m:
            if loads != caps:  # all <= caps, so some strict
                return list(owner)
            return None
        for a in range(n):
            c = rows[a][k]
            if loads[a] + c <= caps[a]:
                loads[a] += c
                owner[k] = a
                found = dfs(k + 1)
                loads[a] -= c
                if found is not None:
                    return found
        return None

    found = dfs(0)
    if found is None:
        return None
    bundles = [set() for _ in range(n)]
    for k, a in enumerate(found):
        bundles[a].add(k)
    return Allocation(tuple(frozenset(b) for b in bundles))


def group_accounting(
    instance: Instance, allocation: Allocation, log, assignment: Sequence[int] | None = None,
    po_mode: str | None = None,
) -> EfficiencyReport:
    """Split agents by how often their bundle was modified and sum their costs.

    ``log`` is a :class:`~chorealloc.allocate.ModificationLog`;
    ``assignment[a - 1]`` names the bundle index agent ``a`` received and is
    inferred by matching bundle contents when omitted.
    """
    counts = log.modifications
    if sum(counts) != instance.n:
        raise AllocationError(f"modification counts sum to {sum(counts)}, expected {instance.n}")
    for last, d in zip(log.last_modifier, counts):
        if (last != 0) != (d >= 1):
            raise AllocationError("last modifier and modification count disagree")
    if assignment is None:
        assignment = _infer_assignment(allocation, log)
    if sorted(assignment) != list(range(len(counts))):
        raise AllocationError("assignment is not a bijection between agents and bundles")
    for a in instance.agents:
        if log.bundles and allocation[a] != log.bundles[assignment[a - 1]]:
            raise AllocationError(f"agent {a}'s bundle differs from logged bundle {assignment[a - 1]}")

    groups: dict[int, list[int]] = {0: [], 1: [], 2: []}
    for a in instance.agents:
        groups[min(counts[assignment[a - 1]], 2)].append(a)
    cost = {a: bundle_cost(instance, a, allocation[a]) for a in instance.agents}
    po = None if po_mode is None else check_po(instance, allocation, po_mode)
    return EfficiencyReport(
        social_cost=sum(cost.values(), Fraction(0)),
        opt=opt_social_cost(instance),
        n0=tuple(groups[0]),
        n1=tuple(groups[1]),
        n2=tuple(groups[2]),
        cost_n01=sum((cost[a] for a in groups[0] + groups[1]), Fraction(0)),
        cost_n2=sum((cost[a] for a in groups[2]), Fraction(0)),
        po=po,
        grouped=True,
    )


def _infer_assignment(allocation: Allocation, log) -> tuple[int, ...]:
    out = []
    for a, bundle in allocation.items():
        matches = [j for j, b in enumerate(log.bundles) if b == bundle]
        if not matches:
            raise AllocationError(f"agent {a}'s bundle is not in the modification log")
        # identical (e.g. empty) bundles are interchangeable unless their counts differ
        last_owned = [j for j in matches if log.last_modifier[j] == a]
        if last_owned:
            out.append(last_owned[0])
        elif len({log.modifications[j] for j in matches}) == 1:
            taken = set(out)
            out.append(next((j for j in matches if j not in taken), matches[0]))
        else:
            raise AllocationError(f"cannot tell which logged bundle agent {a} holds")
    return tuple(out)


def efficiency_report(instance: Instance, allocation: Allocation, po_mode: str | None = None) -> EfficiencyReport:
    """Social cost and OPT without group accounting (no log available)."""
    po = None if po_mode is None else check_po(instance, allocation, po_mode)
    return EfficiencyReport(social_cost(instance, allocation), opt_social_cost(instance), po=po)


@dataclass(frozen=True)
class EFXOptimum:
    social_cost: Fraction
    allocation: Allocation
    opt: Fraction
    max_total_cost: Fraction  # max_i c_i(M)
    examined: int = 0
    efx_count: int = 0

    @property
    def price(self) -> Fraction | None:
        """Ratio of the cheapest EFX social cost to OPT (None when OPT = 0)."""
        return None if self.opt == 0 else self.social_cost / self.opt

    @property
    def cost_fraction(self) -> Fraction | None:
        """Additive gap to OPT normalised by the largest total cost."""
        if self.max_total_cost == 0:
            return None
        return (self.social_cost - self.opt) / self.max_total_cost


def enumerate_allocations(instance: Instance, budget: int = ENUMERATION_BUDGET):
    """Every allocation, as item-owner tuples in lexicographic order."""
    _check_enumeration(instance, budget, "allocation enumeration")
    for owners in itertools.product(range(instance.n), repeat=instance.m):
        bundles = [set() for _ in range(instance.n)]
        for k, a in enumerate(owners):
            bundles[a].add(k)
        yield Allocation(tuple(frozenset(b) for b in bundles))


def is_efx(instance: Instance, allocation: Allocation) -> bool:
    return all(v.passed for v in check_efx(instance, allocation).values())


def min_efx_social_cost(instance: Instance, budget: int = ENUMERATION_BUDGET) -> EFXOptimum:
    best = None
    examined = efx_count = 0
    for allocation in enumerate_allocations(instance, budget):
        examined += 1
        if not is_efx(instance, allocation):
            continue
        efx_count += 1
        sc = social_cost(instance, allocation)
        if best is None or sc < best[0]:
            best = (sc, allocation)
    assert best is not None, "restricted instances always admit an EFX allocation"
    total = max(bundle_cost(instance, a, instance.items) for a in instance.agents)
    return EFXOptimum(best[0], best[1], opt_social_cost(instance), total, examined, efx_count)
