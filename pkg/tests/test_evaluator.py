import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ckh.errors import NonTerminating
from ckh.evaluator import Strategy, evaluate_closed
from ckh.foams import parse_diagram, random_closed_diagram
from ckh.rewriter import iteration_bound, negative_control
from ckh.ring import ONE, X, Y, Z
from ckh.rules import active_table

seeds = st.integers(0, 10 ** 6)
weights = st.sampled_from([(2,), (1, 1), (2, 2), (1, 1, 2), (1, 2, 1), (1, 1, 1, 1)])


def test_empty_diagram_is_identity():
    assert evaluate_closed(parse_diagram("11;")) == {(): ONE}


def test_dotted_sphere_is_unit():
    table = active_table()
    assert evaluate_closed(parse_diagram("2;;cupB1@0,dot1@1,capA1@0")) == {(): table.sphere[0]}
    assert evaluate_closed(parse_diagram("2;;cupB1@0,dot2@1,capA1@0")) == {(): table.sphere[1]}


def test_undotted_sphere_vanishes():
    assert evaluate_closed(parse_diagram("2;;cupB1@0,capA1@0")) == {}


def test_doubly_dotted_sphere_vanishes():
    assert evaluate_closed(parse_diagram("2;;cupB1@0,dot1@1,dot1@1,capA1@0")) == {}


def test_clockwise_bubble():
    assert evaluate_closed(parse_diagram("11;;cupA1@0,capB1@0")) == {(1,): Z, (2,): X * Y * Z}


def test_two_dots_on_one_strip_vanish():
    assert evaluate_closed(parse_diagram("1;;dot1@0,dot1@0")) == {}


def test_dot_order_scalar():
    assert evaluate_closed(parse_diagram("11;;dot2@0,dot1@0")) == {(1, 2): X * Y}


@given(seeds, weights, st.integers(0, 10), seeds)
def test_strategy_independence(seed, weight, n, seed2):
    dg = random_closed_diagram(random.Random(seed), weight, n)
    base = evaluate_closed(dg)
    for k in range(2):
        strat = Strategy(random.Random(seed2 + k), nc_rate=0.5, max_steps=iteration_bound(dg))
        assert evaluate_closed(dg, strategy=strat) == base


@given(seeds, weights, st.integers(0, 10))
def test_guarded_eager_necks_stay_within_bound(seed, weight, n):
    dg = random_closed_diagram(random.Random(seed), weight, n)
    strat = Strategy(None, 0.0, guard=True, eager_nc=True, max_steps=iteration_bound(dg))
    assert evaluate_closed(dg, strategy=strat) == evaluate_closed(dg)


def test_unguarded_neck_loops():
    dg = negative_control()
    strat = Strategy(None, 0.0, guard=False, eager_nc=True, max_steps=iteration_bound(dg))
    with pytest.raises(NonTerminating):
        evaluate_closed(dg, strategy=strat)
