from fractions import Fraction

import pytest

from chorealloc.allocate import ALGORITHMS, solve
from chorealloc.gen import GenSpec, gen_binary, gen_identical, gen_random_restricted, gen_table_instance, random_suite
from chorealloc.model import classify, validate_instance
from chorealloc.verify import social_cost


def test_table_matrices():
    eps = Fraction(1, 10)
    t1 = gen_table_instance("table1", eps)
    assert [t1.row(a) for a in (1, 2)] == [(Fraction(11, 10), 1, 0), (Fraction(11, 10), 0, 1)]
    t2 = gen_table_instance("table2", eps)
    assert [t2.row(a) for a in (1, 2)] == [(Fraction(11, 10), 1, 0, 1), (Fraction(11, 10), 0, 1, 1)]
    t3 = gen_table_instance("table3", eps)
    assert t3.row(1) == (Fraction(3, 5), Fraction(2, 5), 0)
    assert t3.row(2) == (Fraction(3, 5), 0, Fraction(2, 5))


@pytest.mark.parametrize("which, eps", [("table3", "1/2"), ("table1", 0), ("table9", "1/4"), ("table2", "-1/4")])
def test_table_rejects(which, eps):
    with pytest.raises(ValueError):
        gen_table_instance(which, eps)


def test_random_is_deterministic():
    spec = GenSpec(3, 6, seed=42)
    assert gen_random_restricted(spec) == gen_random_restricted(spec)
    assert gen_random_restricted(spec) != gen_random_restricted(GenSpec(3, 6, seed=43))
    assert list(random_suite(10, seed=5)) == list(random_suite(10, seed=5))


def test_random_costs_in_range():
    inst = gen_random_restricted(GenSpec(2, 50, Fraction(3, 2), Fraction(4), seed=1, denominator=4))
    assert all(Fraction(3, 2) <= c <= 4 and (c * 4).denominator == 1 for c in inst.costs)
    assert validate_instance(inst.to_json()) == inst


def test_zero_probability_extremes():
    none = gen_random_restricted(GenSpec(3, 8, zero_prob=0.0, seed=3))
    assert classify(none).m_zero == frozenset()
    everything = gen_random_restricted(GenSpec(3, 8, zero_prob=1.0, seed=3))
    assert classify(everything).m_plus == frozenset()
    for algorithm in ALGORITHMS:
        alloc, _ = solve(everything, algorithm)
        assert social_cost(everything, alloc) == 0


def test_binary_and_identical():
    inst = gen_binary(3, 9, seed=2)
    assert set(inst.costs) == {1}
    assert gen_binary(2, 0).m == 0
    ident = gen_identical(4, 10, seed=1, high=7)
    assert classify(ident).m_plus == frozenset(range(10))
    assert all(1 <= c <= 7 and c.denominator == 1 for c in ident.costs)


def test_suite_ranges():
    suite = list(random_suite(60, seed=0))
    assert {i.n for i in suite} <= {2, 3, 4} and {i.m for i in suite} <= set(range(4, 9))
    assert any(c.denominator > 1 for i in suite for c in i.costs)
    assert any(classify(i).m_zero for i in suite)


@pytest.mark.parametrize("kwargs", [dict(n=0, m=2), dict(n=2, m=-1), dict(n=2, m=2, zero_prob=1.5),
                                    dict(n=2, m=2, cost_low=5, cost_high=1), dict(n=2, m=2, denominator=0)])
def test_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        GenSpec(**kwargs)
