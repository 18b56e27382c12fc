import pytest
from hypothesis import given
from hypothesis import strategies as st

from ckh.complexes import anticommutation_failures, d_squared_zero, smith_homology, totalize, vertices
from ckh.errors import CocycleFailure, NotClosed, UnknownCircle
from ckh.pipeline import compute_ckh, parse_sliced
from ckh.ring import EVEN, ODD, ONE, X, Y, LaurentPoly, RingElem
from ckh.sl2 import (
    XY,
    Saddle,
    WedgeElement,
    basis,
    check_cocycle,
    coboundary,
    cocycle_defect,
    delta_map,
    kauffman_euler,
    kom_sl2,
    letter,
    m_map,
    psi,
    resolve,
    scalar_assignment,
    square_ratio,
    unit,
    wedge_mul,
)

HOPF = "cup1; cup1; x+2; x+2; cap3; cap1"
TREFOIL = "cup1; cup1; x+2; x+2; x+2; cap3; cap1"
FIG8 = "cup1; cup1; x+2; x+2; x-1; x-1; cap2; cap1"

coefs = st.sampled_from([ONE, -ONE, X, Y, XY, ONE + X])
wedges = st.dictionaries(
    st.sampled_from(basis(3)), coefs, max_size=3
).map(lambda t: WedgeElement(3, t))


# the quasi-exterior algebra


def test_letters_commute_up_to_xy():
    a0, a1 = letter(2, 0), letter(2, 1)
    assert wedge_mul(a0, a1).terms == {(0, 1): ONE}
    assert wedge_mul(a1, a0).terms == {(0, 1): XY}
    assert wedge_mul(a0, a0).is_zero()


def test_unit_is_neutral():
    p = WedgeElement(3, {(0, 2): X, (1,): ONE})
    assert wedge_mul(unit(3), p) == p == wedge_mul(p, unit(3))


@given(wedges, wedges, wedges)
def test_wedge_associative(p, q, r):
    assert wedge_mul(wedge_mul(p, q), r) == wedge_mul(p, wedge_mul(q, r))


def test_wedge_validation():
    with pytest.raises(UnknownCircle):
        WedgeElement(2, {(2,): ONE})
    with pytest.raises(ValueError):
        WedgeElement(2, {(1, 0): ONE})
    with pytest.raises(UnknownCircle):
        wedge_mul(unit(1), unit(2))
    assert str(WedgeElement(2, {})) == "0"


def test_merge_identifies_letters():
    sad = Saddle("merge", (0, 1), 0, {2: 1})
    assert m_map(letter(3, 1), sad, 2).terms == {(0,): ONE}
    assert m_map(WedgeElement(3, {(0, 1): ONE}), sad, 2).is_zero()
    assert m_map(letter(3, 2), sad, 2).terms == {(1,): ONE}


def test_split_multiplies_by_ordered_sum():
    sad = Saddle("split", (0, 1), 0, {})
    assert delta_map(unit(1), sad, 2).terms == {(0,): ONE, (1,): XY}
    # (a0 + XY a1) a0 = XY XY a0 a1
    assert delta_map(letter(1, 0), sad, 2).terms == {(0, 1): ONE}
    rev = Saddle("split", (1, 0), 0, {})
    assert delta_map(unit(1), rev, 2).terms == {(1,): ONE, (0,): XY}


def test_basis_sizes():
    assert [len(basis(n)) for n in range(4)] == [1, 2, 4, 8]
    assert basis(2) == [(), (0,), (1,), (0, 1)]


# resolutions


@pytest.mark.parametrize(
    "text, counts",
    [
        ("cup1; cap1", [1]),
        ("cup1; x+1; cap1", [1, 2]),
        (HOPF, [2, 1, 1, 2]),
        (TREFOIL, [2, 1, 1, 2, 1, 2, 2, 3]),
    ],
)
def test_circle_counts(text, counts):
    cube = resolve(parse_sliced(text))
    assert [cube.count(v) for v in vertices(cube.n)] == counts


def test_resolve_rejects_open_and_bad_order():
    with pytest.raises(NotClosed):
        resolve(parse_sliced("bottom u d\nx+1"))
    with pytest.raises(ValueError):
        resolve(parse_sliced(HOPF), order=[0, 0])


def test_flip_reverses_split_ends():
    d = parse_sliced("cup1; x+1; cap1")
    a, b = resolve(d).saddles[((0,), 0)], resolve(d, flips=[0]).saddles[((0,), 0)]
    assert a.kind == b.kind == "split"
    assert a.ends == tuple(reversed(b.ends))


# psi and the scalar assignment


@pytest.mark.parametrize("text", [HOPF, TREFOIL, FIG8])
def test_psi_values(text):
    assert set(psi(resolve(parse_sliced(text))).values()) <= {ONE, XY}


def test_trefoil_psi_is_xy():
    assert set(psi(resolve(parse_sliced(TREFOIL))).values()) == {XY}


@pytest.mark.parametrize("order", [None, [2, 0, 1], [1, 2, 0]])
@pytest.mark.parametrize("flips", [(), (0,), (1, 2)])
def test_cocycle_on_trefoil(order, flips):
    ps = psi(resolve(parse_sliced(TREFOIL), order, flips))
    check_cocycle(ps, 3)
    assert cocycle_defect(ps, (0, 0, 0), 0, 1, 2) == ONE


def test_cocycle_detects_tampering():
    ps = psi(resolve(parse_sliced(TREFOIL)))
    ps[((0, 0, 0), 0, 1)] = -ps[((0, 0, 0), 0, 1)]
    with pytest.raises(CocycleFailure):
        check_cocycle(ps, 3)


@pytest.mark.parametrize("text", [HOPF, TREFOIL, FIG8])
def test_scalar_assignment_has_coboundary_psi(text):
    cube = resolve(parse_sliced(text))
    ps = psi(cube)
    eps = scalar_assignment(ps, cube.n)
    for (v, k, l), val in ps.items():
        assert coboundary(eps, v, k, l) == val


def test_square_ratio_cases():
    a = {(0, 0): ONE, (1, 0): X}
    assert square_ratio(a, {(0, 0): Y, (1, 0): X * Y}) == ("unique", Y)
    # 1 + X absorbs X, so two units fit
    assert square_ratio({(0, 0): ONE + X}, {(0, 0): Y + X * Y}) == ("ambiguous", ONE)
    assert square_ratio({}, {}) == ("zero", ONE)
    with pytest.raises(CocycleFailure):
        square_ratio(a, {})
    with pytest.raises(CocycleFailure):
        square_ratio(a, {(0, 0): ONE + Y})


# the complex


@pytest.mark.parametrize("text", [HOPF, TREFOIL, FIG8])
def test_kom_is_a_complex(text):
    h = kom_sl2(parse_sliced(text))
    assert anticommutation_failures(h) == []
    assert d_squared_zero(totalize(h))


@pytest.mark.parametrize("text", [HOPF, TREFOIL, FIG8])
def test_oracle_matches_pipeline(text):
    d = parse_sliced(text)
    for s in (EVEN, ODD):
        assert smith_homology(totalize(kom_sl2(d)), s) == compute_ckh(d, s)


def test_oracle_invariant_under_flips_and_order():
    d = parse_sliced(TREFOIL)
    base = smith_homology(totalize(kom_sl2(d)), ODD)
    for order, flips in (([1, 2, 0], ()), (None, (0, 2)), ([2, 1, 0], (1,))):
        assert smith_homology(totalize(kom_sl2(d, order, flips)), ODD) == base


def test_kauffman_euler_values():
    assert kauffman_euler(parse_sliced("cup1; cap1")) == LaurentPoly({(-1, 0): 1, (1, 0): 1})
    assert kauffman_euler(parse_sliced(FIG8)) == LaurentPoly({(-5, 0): 1, (5, 0): 1})
    tref = kauffman_euler(parse_sliced(TREFOIL))
    assert tref == LaurentPoly({(-9, 0): -1, (-5, 0): 1, (-3, 0): 1, (-1, 0): 1})
    with pytest.raises(NotClosed):
        kauffman_euler(parse_sliced("bottom u d\nx+1"))


def test_xy_constant():
    assert XY == RingElem.monomial(x=1, y=1)
