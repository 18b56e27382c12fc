import pytest
from hypothesis import given
from hypothesis import strategies as st

from ckh.errors import NotAUnit, ParseError
from ckh.ring import (
    EVEN,
    ODD,
    ONE,
    Q_PLUS_QINV,
    X,
    Y,
    Z,
    ZERO,
    ZINV,
    Bidegree,
    LaurentPoly,
    RingElem,
    Specialization,
    format_elem,
    mu,
    mu_symmetry_check,
    parse_elem,
    unit_inverse,
)

small = st.integers(-5, 5)
bidegrees = st.tuples(small, small)
monomials = st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(-3, 3))
elems = st.dictionaries(monomials, st.integers(-4, 4), max_size=4).map(RingElem)
signs = st.sampled_from([1, -1])
specs = st.builds(Specialization, signs, signs, signs)


# mu


def test_mu_zero_left_is_one():
    assert mu((0, 0), (3, -2)) == ONE


def test_mu_z_example():
    assert mu((1, 0), (0, 1)) == Z


def test_mu_dot_dot_is_xy():
    assert mu((1, 1), (1, 1)) == X * Y


@pytest.mark.parametrize("g,h", [((1, 0), (0, 1)), ((1, 1), (1, 1)), ((0, 0), (5, 7))])
def test_mu_symmetry_examples(g, h):
    assert mu_symmetry_check(g, h)


@given(bidegrees, bidegrees)
def test_mu_symmetry_property(g, h):
    assert mu(g, h) * mu(h, g) == ONE


@given(bidegrees, bidegrees, bidegrees)
def test_mu_bilinear(g, h, k):
    gh = (g[0] + h[0], g[1] + h[1])
    assert mu(gh, k) == mu(g, k) * mu(h, k)
    assert mu(k, gh) == mu(k, g) * mu(k, h)


# units


def test_unit_inverse_one():
    assert unit_inverse(ONE) == ONE


def test_unit_inverse_neg_xyz():
    u = -(X * Y * Z)
    assert unit_inverse(u) == -(X * Y * ZINV)


@pytest.mark.parametrize("text", ["1 + X*Y", "2", "0", "2*X"])
def test_unit_inverse_rejects(text):
    with pytest.raises(NotAUnit):
        unit_inverse(parse_elem(text))


def test_one_plus_xy_is_zero_divisor():
    assert (ONE - X * Y) * (ONE + X * Y) == ZERO


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("x", [0, 1])
@pytest.mark.parametrize("y", [0, 1])
@pytest.mark.parametrize("z", range(-2, 3))
def test_unit_inverse_all_shapes(sign, x, y, z):
    u = RingElem.monomial(x=x, y=y, z=z, c=sign)
    assert u.is_unit()
    assert unit_inverse(u) * u == ONE


# ring axioms


def test_x_y_square_to_one():
    assert X * X == ONE and Y * Y == ONE and Z * ZINV == ONE


@given(elems, elems, elems)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + (-a) == ZERO


@given(elems)
def test_canonical_form_has_no_zero_coefficients(a):
    assert all(c != 0 for c in a.terms.values())


# specialization


def test_specialize_examples():
    v = ONE + X * Y
    assert v.specialize(EVEN) == 2
    assert v.specialize(ODD) == 0
    assert (Z * Z).specialize(Specialization(1, 1, -1)) == 1


@given(elems, elems, specs)
def test_specialize_is_ring_morphism(a, b, s):
    assert s(a * b) == s(a) * s(b)
    assert s(a + b) == s(a) + s(b)


# text and JSON forms


@pytest.mark.parametrize("text", ["-X*Y*Z^-2 + 3", "Z", "0", "1", "-1", "2*X*Z^3 - Y"])
def test_text_round_trip(text):
    v = parse_elem(text)
    assert parse_elem(format_elem(v)) == v


def test_parse_example_terms():
    v = parse_elem("-X*Y*Z^-2 + 3")
    assert v == -(X * Y * ZINV * ZINV) + 3 * ONE


def test_parse_rejects_garbage():
    with pytest.raises(ParseError):
        parse_elem("W^2")


@given(elems)
def test_json_round_trip(a):
    assert RingElem.from_json(a.to_json()) == a


def test_json_shape():
    data = parse_elem("-X*Y*Z^-2 + 3").to_json()
    assert {"c": -1, "x": 1, "y": 1, "z": -2} in data
    assert {"c": 3, "x": 0, "y": 0, "z": 0} in data


# bidegrees and Laurent polynomials


def test_bidegree_qdeg():
    assert Bidegree(1, 1).qdeg == 2
    assert Bidegree(2, -3).qdeg == -1
    assert Bidegree(1, 2) + Bidegree(3, 4) == Bidegree(4, 6)


def test_laurent_power():
    assert Q_PLUS_QINV ** 2 == LaurentPoly({(2, 0): 1, (0, 0): 2, (-2, 0): 1})
    assert Q_PLUS_QINV ** 0 == LaurentPoly({(0, 0): 1})


def test_laurent_eval_t():
    p = LaurentPoly({(1, 1): 2, (1, 0): 1})
    assert p.eval_t(-1) == LaurentPoly({(1, 0): -1})


def test_laurent_str():
    assert str(LaurentPoly({(-5, 0): 1, (5, 0): 1})) == "q^-5 + q^5"
    assert str(LaurentPoly()) == "0"
