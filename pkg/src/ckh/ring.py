"""Exact arithmetic in k = Z[X, Y, Z, Z^-1] / (X^2 = Y^2 = 1).

Elements are stored as a map from monomials ``(x, y, z)`` with
``x, y`` in ``{0, 1}`` and ``z`` an integer to nonzero integer
coefficients.  Values are immutable and hashable.
"""

from __future__ import annotations

import re
from typing import Dict, Iterable, Iterator, NamedTuple, Tuple, Union

from .errors import NotAUnit, ParseError

Monomial = Tuple[int, int, int]


class RingElem:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Union[Dict[Monomial, int], Iterable, None] = None):
        acc: Dict[Monomial, int] = {}
        if terms is not None:
            items = terms.items() if isinstance(terms, dict) else terms
            for (x, y, z), c in items:
                key = (x & 1, y & 1, z)
                acc[key] = acc.get(key, 0) + c
        self._terms = {k: v for k, v in acc.items() if v}
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c: int) -> "RingElem":
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, x: int = 0, y: int = 0, z: int = 0, c: int = 1) -> "RingElem":
        return cls({(x, y, z): c})

    @classmethod
    def coerce(cls, v) -> "RingElem":
        if isinstance(v, RingElem):
            return v
        if isinstance(v, int):
            return cls.const(v)
        raise TypeError(f"cannot coerce {type(v).__name__} to RingElem")

    @property
    def terms(self) -> Dict[Monomial, int]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, int]]:
        return iter(sorted(self._terms.items()))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    # arithmetic
    def __add__(self, other) -> "RingElem":
        other = RingElem.coerce(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0) + v
        return RingElem(out)

    __radd__ = __add__

    def __neg__(self) -> "RingElem":
        return RingElem({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "RingElem":
        return self + (-RingElem.coerce(other))

    def __rsub__(self, other) -> "RingElem":
        return RingElem.coerce(other) - self

    def __mul__(self, other) -> "RingElem":
        other = RingElem.coerce(other)
        out: Dict[Monomial, int] = {}
        for (x1, y1, z1), c1 in self._terms.items():
            for (x2, y2, z2), c2 in other._terms.items():
                k = ((x1 + x2) & 1, (y1 + y2) & 1, z1 + z2)
                out[k] = out.get(k, 0) + c1 * c2
        return RingElem(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RingElem":
        if n < 0:
            return unit_inverse(self) ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = RingElem.const(other)
        if not isinstance(other, RingElem):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def is_unit(self) -> bool:
        if len(self._terms) != 1:
            return False
        (c,) = self._terms.values()
        return c in (1, -1)

    def specialize(self, s: "Specialization") -> int:
        total = 0
        for (x, y, z), c in self._terms.items():
            total += c * (s.x ** x) * (s.y ** y) * (s.z ** (z % 2))
        return total

    def __str__(self) -> str:
        return format_elem(self)

    def __repr__(self) -> str:
        return f"RingElem({format_elem(self)!r})"

    def to_json(self) -> list:
        return [{"c": c, "x": x, "y": y, "z": z} for (x, y, z), c in self.items()]

    @classmethod
    def from_json(cls, data: list) -> "RingElem":
        return cls({(t["x"], t["y"], t["z"]): t["c"] for t in data})


ZERO = RingElem()
ONE = RingElem.const(1)
X = RingElem.monomial(x=1)
Y = RingElem.monomial(y=1)
Z = RingElem.monomial(z=1)
ZINV = RingElem.monomial(z=-1)


def unit_inverse(u: RingElem) -> RingElem:
    if not u.is_unit():
        raise NotAUnit(f"{u} is not a unit")
    ((x, y, z), c), = u._terms.items()
    return RingElem({(x, y, -z): c})


def _format_monomial(x: int, y: int, z: int) -> str:
    parts = []
    if x:
        parts.append("X")
    if y:
        parts.append("Y")
    if z == 1:
        parts.append("Z")
    elif z:
        parts.append(f"Z^{z}")
    return "*".join(parts)


def format_elem(v: RingElem) -> str:
    if v.is_zero():
        return "0"
    out = []
    # highest z first reads naturally; ties broken by (x, y)
    for (x, y, z), c in sorted(v._terms.items(), key=lambda kv: (-kv[0][2], -kv[0][0], -kv[0][1])):
        mono = _format_monomial(x, y, z)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{mag}*{mono}"
        else:
            body = str(mag)
        out.append((sign, body))
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


_TERM = re.compile(r"^(?:(\d+)(?:\*(.+))?|(.+))$")
_FACTOR = re.compile(r"^([XYZ])(?:\^(-?\d+))?$")


def parse_elem(text: str) -> RingElem:
    s = text.replace(" ", "")
    if not s:
        raise ParseError("empty ring element")
    terms: Dict[Monomial, int] = {}
    for chunk in re.split(r"(?<!\^)(?=[+-])", s):
        if not chunk:
            continue
        sign = -1 if chunk[0] == "-" else 1
        body = chunk[1:] if chunk[0] in "+-" else chunk
        m = _TERM.match(body)
        if not m:
            raise ParseError(f"bad term {body!r} in {text!r}")
        coef = int(m.group(1)) if m.group(1) else 1
        factors = m.group(2) if m.group(1) else m.group(3)
        x = y = z = 0
        for f in (factors.split("*") if factors else []):
            fm = _FACTOR.match(f)
            if not fm:
                raise ParseError(f"bad factor {f!r} in {text!r}")
            e = int(fm.group(2)) if fm.group(2) else 1
            if fm.group(1) == "X":
                x += e
            elif fm.group(1) == "Y":
                y += e
            else:
                z += e
        key = (x & 1, y & 1, z)
        terms[key] = terms.get(key, 0) + sign * coef
    return RingElem(terms)


class Bidegree(NamedTuple):
    a: int
    b: int

    def __add__(self, other) -> "Bidegree":  # type: ignore[override]
        return Bidegree(self.a + other[0], self.b + other[1])

    def __sub__(self, other) -> "Bidegree":
        return Bidegree(self.a - other[0], self.b - other[1])

    def __neg__(self) -> "Bidegree":
        return Bidegree(-self.a, -self.b)

    def scale(self, n: int) -> "Bidegree":
        return Bidegree(n * self.a, n * self.b)

    @property
    def qdeg(self) -> int:
        return self.a + self.b


ZERO_DEG = Bidegree(0, 0)


def mu(g, h) -> RingElem:
    a, b = g
    c, d = h
    return RingElem.monomial(x=a * c, y=b * d, z=a * d - b * c)


def mu_symmetry_check(g, h) -> bool:
    return mu(g, h) * mu(h, g) == ONE


class Specialization(NamedTuple):
    x: int
    y: int
    z: int

    def __call__(self, v: RingElem) -> int:
        return v.specialize(self)


EVEN = Specialization(1, 1, 1)
ODD = Specialization(1, -1, 1)
SPECIALIZATIONS = {"even": EVEN, "odd": ODD}


class LaurentPoly:
    """Integer Laurent polynomial in q and t, keyed by ``(q_exp, t_exp)``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Union[Dict[Tuple[int, int], int], None] = None):
        self._c = {k: v for k, v in (coeffs or {}).items() if v}

    @classmethod
    def q_power(cls, n: int, c: int = 1) -> "LaurentPoly":
        return cls({(n, 0): c})

    @property
    def coeffs(self) -> Dict[Tuple[int, int], int]:
        return dict(self._c)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, 0) + v
        return LaurentPoly(out)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + LaurentPoly({k: -v for k, v in other._c.items()})

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, int):
            return LaurentPoly({k: v * other for k, v in self._c.items()})
        out: Dict[Tuple[int, int], int] = {}
        for (q1, t1), c1 in self._c.items():
            for (q2, t2), c2 in other._c.items():
                k = (q1 + q2, t1 + t2)
                out[k] = out.get(k, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        out = LaurentPoly({(0, 0): 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPoly) and self._c == other._c

    def __hash__(self) -> int:
        return hash(frozenset(self._c.items()))

    def eval_t(self, t: int) -> "LaurentPoly":
        out: Dict[Tuple[int, int], int] = {}
        for (q, e), c in self._c.items():
            out[(q, 0)] = out.get((q, 0), 0) + c * t ** e
        return LaurentPoly(out)

    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for (q, t), c in sorted(self._c.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            mono = "".join(
                s for s in (
                    (f"q^{q}" if q not in (0, 1) else ("q" if q == 1 else "")),
                    (f"t^{t}" if t not in (0, 1) else ("t" if t == 1 else "")),
                ) if s
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


Q_PLUS_QINV = LaurentPoly({(1, 0): 1, (-1, 0): 1})
