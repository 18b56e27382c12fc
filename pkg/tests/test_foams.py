import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ckh.errors import BoundaryMismatch, NotDisjoint, ParseError
from ckh.foams import (
    DOTS,
    SUPERPOSITION,
    FoamDiagram,
    Slice,
    check_legal,
    degree,
    diagram_from_json,
    diagram_to_json,
    disjoint_at,
    format_diagram,
    identity_diagram,
    interchange_scalar,
    mirror,
    parse_diagram,
    random_closed_diagram,
    vcompose,
)
from ckh.ring import ONE, X, Y, Bidegree
from ckh.webs import Web, identity, parse_web

seeds = st.integers(0, 10 ** 6)
weights = st.sampled_from([(2,), (1, 1), (2, 2), (1, 1, 2), (1, 2, 1), (1, 1, 1, 1)])


def random_diagram(seed, weight, n=6):
    return random_closed_diagram(random.Random(seed), weight, n)


# legality


def test_identity_is_legal():
    for text in ["2;", "11;m1,s1", "1111;m1,m3"]:
        assert check_legal(identity_diagram(parse_web(text)))


def test_dot_in_shaded_region():
    rep = check_legal(parse_diagram("2;;dot1@0"))
    assert not rep and rep.condition == DOTS and rep.slice_index == 0


def test_adjacent_colour_crossing_rejected():
    rep = check_legal(parse_diagram("111;m1,s1,m2;x1,2@1"))
    assert not rep and rep.condition == SUPERPOSITION


def test_dot_in_unshaded_region_is_legal():
    assert check_legal(parse_diagram("11;;dot1@0,dot2@0"))


# degree


def test_degree_examples():
    assert degree(identity_diagram(identity((1, 1)))) == Bidegree(0, 0)
    assert degree(parse_diagram("11;;dot1@0")) == Bidegree(1, 1)
    assert degree(parse_diagram("2;;cupB1@0,dot1@1,capA1@0")) == Bidegree(0, 0)


@given(seeds, weights, seeds, weights)
def test_degree_additive(s1, w1, s2, w2):
    a = random_diagram(s1, w1)
    b = random_diagram(s2, w1)
    assert degree(vcompose(a, b)) == degree(a) + degree(b)


# composition


def test_vcompose_identity():
    d = parse_diagram("2;;cupB1@0,dot1@1,capA1@0")
    assert vcompose(identity_diagram(d.target), d) == d
    assert vcompose(d, identity_diagram(d.source)) == d


def test_vcompose_bubble_is_legal():
    cup = parse_diagram("2;;cupB1@0")
    cap = FoamDiagram(cup.target, (Slice("capA", 1, 0),))
    bubble = vcompose(cap, cup)
    assert check_legal(bubble)
    assert bubble.target.word == ()


def test_vcompose_mismatch():
    with pytest.raises(BoundaryMismatch):
        vcompose(parse_diagram("2;;cupB1@0"), parse_diagram("2;;cupB1@0"))


def test_slice_type_error():
    with pytest.raises(BoundaryMismatch):
        parse_diagram("2;;capA1@0")


# interchange


def test_swap_zero_degree_generator():
    d = parse_diagram("1111;m1,s1,m3,s3;x1,3@1,dot1@0")
    new, c = interchange_scalar(d, 0)
    assert c == ONE
    assert new.target == d.target


def test_swap_two_dots():
    d = parse_diagram("11;;dot1@0,dot2@0")
    new, c = interchange_scalar(d, 0)
    assert c == X * Y
    assert new.slices == (Slice("dot", 2, 0), Slice("dot", 1, 0))


def test_swap_overlapping():
    d = parse_diagram("2;;cupB1@0,capA1@0")
    with pytest.raises(NotDisjoint):
        interchange_scalar(d, 0)


@given(seeds, weights)
def test_interchange_twice_is_identity(seed, weight):
    d = random_diagram(seed, weight, 8)
    for k in range(len(d) - 1):
        if not disjoint_at(d, k):
            continue
        new, c1 = interchange_scalar(d, k)
        back, c2 = interchange_scalar(new, k)
        assert c1 * c2 == ONE
        assert back.target == d.target and degree(back) == degree(d)
        if all(p.slices[k].width_out and p.slices[k + 1].width_in for p in (d, new)):
            # zero-width contact has two valid placements, otherwise the swap is an involution
            assert back == d


@given(seeds, weights)
def test_legality_invariant_under_interchange(seed, weight):
    d = random_diagram(seed, weight, 8)
    assert check_legal(d)
    for k in range(len(d) - 1):
        if disjoint_at(d, k):
            assert check_legal(interchange_scalar(d, k)[0])


# mirror and formats


@given(seeds, weights)
def test_mirror_involution(seed, weight):
    d = random_diagram(seed, weight)
    assert mirror(mirror(d)) == d
    assert check_legal(mirror(d))


@given(seeds, weights)
def test_text_and_json_round_trip(seed, weight):
    d = random_diagram(seed, weight)
    assert parse_diagram(format_diagram(d)) == d
    assert diagram_from_json(json.loads(json.dumps(diagram_to_json(d)))) == d


def test_text_format_example():
    d = parse_diagram("11;m1,s1;dot1@0")
    assert format_diagram(d) == "11;m1,s1;dot1@0"


@pytest.mark.parametrize("text", ["11", "11;;blob1@0", "11;;dot1@0,,zz"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_diagram(text)
