"""Covering Khovanov homology via graded gl2-foams."""

from .ring import (  # noqa: F401
    EVEN, ODD, ONE, ZERO, X, Y, Z, Bidegree, LaurentPoly, RingElem,
    Specialization, mu, parse_elem, unit_inverse,
)

__version__ = "0.1.0"
