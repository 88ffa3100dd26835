from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chorealloc.errors import AllocationError, DuplicateItem, InstanceError, InvalidAgentCount, NegativeCost, UnknownItem
from chorealloc.model import (
    Allocation,
    allocation_from_json,
    bundle_cost,
    c_bar,
    c_hat,
    check_allocation,
    classify,
    make_instance,
    parse_cost,
    validate_instance,
)

from oracles import removals


def test_table1_is_valid(table1):
    assert table1.n == 2
    assert table1.costs == (Fraction(5, 4), Fraction(1), Fraction(1))
    assert table1.row(1) == (Fraction(5, 4), Fraction(1), Fraction(0))
    assert table1.row(2) == (Fraction(5, 4), Fraction(0), Fraction(1))


def test_empty_instance():
    inst = validate_instance({"n": 1, "items": []})
    assert inst.m == 0
    assert classify(inst).m_plus == frozenset()


@pytest.mark.parametrize(
    "raw, exc",
    [
        ({"n": 2, "items": [{"id": "e1", "cost": 1}, {"id": "e1", "cost": 2}]}, DuplicateItem),
        ({"n": 2, "items": [{"id": "e1", "cost": "-1/2"}]}, NegativeCost),
        ({"n": 2, "items": [{"id": "e1", "cost": 1}], "zero_sets": {"1": ["e9"]}}, UnknownItem),
        ({"n": 0, "items": []}, InvalidAgentCount),
        ({"n": 2, "items": [{"id": "e1", "cost": 1.5}]}, InstanceError),
        ({"n": 2, "items": [{"id": "e1", "cost": "1/0"}]}, InstanceError),
        ({"n": 2, "items": [{"id": "e1", "cost": 1}], "zero_sets": {"3": ["e1"]}}, InstanceError),
        ({"n": "2", "items": []}, InvalidAgentCount),
    ],
)
def test_rejects(raw, exc):
    with pytest.raises(exc):
        validate_instance(raw)


def test_costs_canonicalised():
    inst = validate_instance({"n": 1, "items": [{"id": "a", "cost": "6/8"}, {"id": "b", "cost": "3"}]})
    assert inst.costs == (Fraction(3, 4), Fraction(3))
    assert inst.costs[0].denominator == 4


@pytest.mark.parametrize("text", ["0", "7", "5/4", "100/3", "0/5"])
def test_cost_string_round_trip(text):
    value = parse_cost(text)
    assert parse_cost(str(value)) == value


@given(st.fractions(min_value=0, max_value=1000))
def test_cost_round_trip_property(value):
    assert parse_cost(str(value)) == value


def test_classify_table1(table1):
    cls = classify(table1)
    assert cls.m_plus == table1.bundle("e1")
    assert cls.m_zero == table1.bundle("e2", "e3")
    assert cls.per_agent_zero == (table1.bundle("e3"), table1.bundle("e2"))


def test_classify_table2(table2):
    cls = classify(table2)
    assert cls.m_plus == table2.bundle("e1", "e4")
    assert cls.m_zero == table2.bundle("e2", "e3")


def test_classify_identical_costs():
    inst = make_instance(3, [("a", 2), ("b", 3), ("c", 1)])
    cls = classify(inst)
    assert cls.m_plus == frozenset({0, 1, 2})
    assert cls.m_zero == frozenset()


def test_zero_cost_items_go_to_m_zero():
    inst = make_instance(2, [("a", 0), ("b", 3)])
    cls = classify(inst)
    assert cls.m_zero == frozenset({0})
    assert cls.free == frozenset({0})
    assert cls.zero_for(2) == frozenset({0})


def test_bundle_cost(table1):
    assert bundle_cost(table1, 2, table1.bundle("e2", "e3")) == 1
    assert bundle_cost(table1, 1, table1.bundle("e1", "e2")) == Fraction(9, 4)
    assert bundle_cost(table1, 1, frozenset()) == 0
    with pytest.raises(UnknownItem):
        bundle_cost(table1, 1, {7})
    with pytest.raises(UnknownItem):
        table1.bundle("nope")


def test_c_hat_examples(table1):
    assert c_hat(table1, 2, table1.bundle("e2", "e3")) == 1
    assert c_hat(table1, 1, table1.bundle("e1")) == 0
    ident = make_instance(1, [("x", 6), ("y", 5)])
    assert c_hat(ident, 1, {0, 1}) == 6


def test_c_bar_examples(table1):
    ident = make_instance(1, [("x", 4), ("y", 3), ("z", 2)])
    assert c_bar(ident, 1, {0, 1, 2}) == 5
    assert c_bar(ident, 1, {0}) == 0
    assert c_bar(table1, 1, table1.bundle("e1", "e2")) == 1
    assert c_hat(ident, 1, set()) == 0 and c_bar(ident, 1, set()) == 0


costs = st.lists(st.integers(0, 20), min_size=1, max_size=7)


@given(costs, st.data())
def test_removal_bounds(values, data):
    n = 2
    zeros = data.draw(st.sets(st.integers(0, len(values) - 1)))
    inst = make_instance(
        n, [(f"e{k}", v) for k, v in enumerate(values)], {1: [f"e{k}" for k in zeros]}
    )
    bundle = frozenset(data.draw(st.sets(st.integers(0, len(values) - 1), min_size=1)))
    for agent in (1, 2):
        options = removals(inst, agent, bundle)
        assert c_bar(inst, agent, bundle) == min(options)
        assert c_hat(inst, agent, bundle) == max(options)
        item_costs = [inst.cost(agent, k) for k in bundle]
        total = bundle_cost(inst, agent, bundle)
        assert c_hat(inst, agent, bundle) + min(item_costs) == total
        assert c_bar(inst, agent, bundle) + max(item_costs) == total


@given(st.lists(st.integers(0, 9), max_size=8), st.lists(st.sets(st.integers(0, 7)), min_size=1, max_size=4))
def test_classification_invariants(values, zero_lists):
    n = len(zero_lists)
    ids = [f"e{k}" for k in range(len(values))]
    zeros = {a + 1: [ids[k] for k in z if k < len(ids)] for a, z in enumerate(zero_lists)}
    inst = make_instance(n, list(zip(ids, values)), zeros)
    cls = classify(inst)
    assert cls.m_plus | cls.m_zero == frozenset(inst.items)
    assert not cls.m_plus & cls.m_zero
    for k in cls.m_plus:
        assert len({inst.cost(a, k) for a in inst.agents}) == 1
        assert inst.costs[k] > 0
    assert classify(inst) == cls


def test_instance_json_round_trip(table2):
    assert validate_instance(table2.to_json()) == table2


def test_allocation_checks(table1):
    ok = Allocation((table1.bundle("e1"), table1.bundle("e2", "e3")))
    check_allocation(table1, ok)
    assert allocation_from_json(table1, {"1": ["e1"], "2": ["e2", "e3"]}) == ok
    with pytest.raises(AllocationError):
        check_allocation(table1, Allocation((table1.bundle("e1"), table1.bundle("e2"))))
    with pytest.raises(AllocationError):
        allocation_from_json(table1, {"1": ["e1", "e2"], "2": ["e2", "e3"]})
    with pytest.raises(AllocationError):
        allocation_from_json(table1, {"1": ["e1", "e2", "e3"], "5": []})
