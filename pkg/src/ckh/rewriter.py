"""Normalization of foams into reduced-foam bases.

Hom spaces are handled through a closed pairing.  A foam ``F: W0 -> W``
on weight ``lam`` is bent into a cup foam ``bend(F): 1_lam -> V`` with
``V = W . dual(W0)``.  Basis foams ``rep_delta`` are built as cup foams on
``V`` (cups and crossings only, one disk per glued component, one dot per
component of ``delta``) and bent back.  Test foams are the mirror images
of the cup foams on ``V``; pairing a test foam with ``bend(F)`` is a closed
diagram, evaluated by :mod:`ckh.evaluator`, and its coefficient on the
fully dotted identity of the ambient strips is a scalar.  The Gram matrix
of the basis is inverted once over ``k`` with unit pivots, which turns the
pairings of any foam into its coordinates.

The module also provides the termination measure, a deterministic
isotopy tidy-up with scalar tracking, a redex finder and the random
confluence check.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    BoundaryMismatch,
    IllegalDiagram,
    NonTerminating,
    NonUnitMatrix,
    NotDisjoint,
    WeightMismatch,
)
from .evaluator import Strategy, evaluate_closed
from .foams import (
    CAP_LETTERS,
    FoamDiagram,
    Slice,
    apply_slice,
    check_legal,
    format_diagram,
    interchange_scalar,
    slice_degree,
    mirror,
    random_closed_diagram,
    _moves,
    _doubles_of,
)
from .ring import ONE, ZERO, Bidegree, RingElem, unit_inverse
from .rules import active_table
from .webs import (
    Letter,
    Web,
    component_labels,
    flip,
    glued_components,
    identity,
    random_web,
    thin_positions,
    all_weights,
)

# ---------------------------------------------------------------------------
# words and bending


def dual_word(word: Sequence[Letter]) -> Tuple[Letter, ...]:
    return tuple(flip(x) for x in reversed(word))


def _cup_kind(letter: Letter) -> str:
    return "cupA" if letter[0] == "m" else "cupB"


def _cap_kind_for(letter: Letter) -> str:
    # cap removing ``flip(letter), letter``
    return "capA" if letter[0] == "m" else "capB"


def bend_slices(w0: Web) -> Tuple[Slice, ...]:
    """Nested cups creating ``W0 . dual(W0)`` from the empty word."""
    return tuple(Slice(_cup_kind(x), x[1], k) for k, x in enumerate(w0.word))


def unbend_slices(w0: Web, left: int) -> Tuple[Slice, ...]:
    """Caps removing ``dual(W0) . W0`` sitting right after ``left`` letters."""
    n = len(w0.word)
    return tuple(Slice(_cap_kind_for(w0.word[j]), w0.word[j][1], left + n - 1 - j) for j in range(n))


def bend(dg: FoamDiagram) -> FoamDiagram:
    """``F: W0 -> W`` becomes ``1 -> W . dual(W0)``."""
    w0 = dg.source
    return FoamDiagram(identity(w0.source), bend_slices(w0) + dg.slices)


# ---------------------------------------------------------------------------
# cup foams


def _components(weight, word) -> int:
    return glued_components(identity(weight), Web(weight, tuple(word)))


def cup_slices(weight, word: Sequence[Letter]) -> Tuple[Slice, ...]:
    """Cups and far crossings building ``word`` from the empty word.

    The thin surface of the result is one disk per glued component of
    ``word`` against the identity web.  Found by searching removals of
    adjacent letter pairs (births first, then saddles that split a
    component in two) and far swaps.
    """
    return _cup_slices_cached(tuple(weight), tuple(word))


@lru_cache(maxsize=4096)
def _cup_slices_cached(weight, word) -> Tuple[Slice, ...]:
    dead = set()

    def search(w, comps):
        if not w:
            return []
        if w in dead:
            return None
        dead.add(w)
        n = len(w)
        for i in range(n - 1):
            (k1, c1), (k2, c2) = w[i], w[i + 1]
            if c1 == c2 and k1 == "s" and k2 == "m":
                rest = search(w[:i] + w[i + 2:], comps - 1)
                if rest is not None:
                    return rest + [Slice("cupB", c1, i)]
        for i in range(n - 1):
            (k1, c1), (k2, c2) = w[i], w[i + 1]
            if c1 == c2 and k1 == "m" and k2 == "s":
                w2 = w[:i] + w[i + 2:]
                if _components(weight, w2) == comps + 1:
                    rest = search(w2, comps + 1)
                    if rest is not None:
                        return rest + [Slice("cupA", c1, i)]
        for i in range(n - 1):
            (k1, c1), (k2, c2) = w[i], w[i + 1]
            if abs(c1 - c2) >= 2:
                w2 = w[:i] + (w[i + 1], w[i]) + w[i + 2:]
                rest = search(w2, comps)
                if rest is not None:
                    return rest + [Slice("x", c2, i, c1)]
        return None

    found = search(word, _components(weight, word))
    if found is None:
        raise IllegalDiagram(f"no cup foam found for word {word} on {weight}")
    return tuple(found)


# ---------------------------------------------------------------------------
# bases


@dataclass(frozen=True)
class ReducedKey:
    source: Web
    target: Web
    delta: FrozenSet[int]

    def __str__(self) -> str:
        return "rep{" + ",".join(str(i) for i in sorted(self.delta)) + "}"


def _subsets(n: int) -> List[FrozenSet[int]]:
    out = []
    for size in range(n + 1):
        out += _combos(n, size)
    return out


def _combos(n, size):
    from itertools import combinations

    return [frozenset(c) for c in combinations(range(n), size)]


def _solve_unit(mat: List[List[RingElem]], rhs: List[List[RingElem]]) -> List[List[RingElem]]:
    """Solve ``mat @ X = rhs`` over k by elimination with unit pivots."""
    n = len(mat)
    a = [list(row) for row in mat]
    b = [list(row) for row in rhs]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col].is_unit()), None)
        if piv is None:
            raise NonUnitMatrix(f"no unit pivot in column {col}")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = unit_inverse(a[col][col])
        a[col] = [inv * v for v in a[col]]
        b[col] = [inv * v for v in b[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = [x - f * y for x, y in zip(b[r], b[col])]
    return b


class HomBasis:
    """Reduced-foam basis of ``Hom(W0, W)`` with its pairing data."""

    def __init__(self, w0: Web, w: Web):
        if w0.source != w.source or w0.target != w.target:
            raise WeightMismatch("webs are not parallel")
        self.source, self.target = w0, w
        self.weight = w0.source
        lam = self.weight
        self.vword = w.word + dual_word(w0.word)
        vweb = Web(lam, self.vword)
        _, vlab, nv = component_labels(identity(lam), vweb)
        lab0, lab1, n = component_labels(w0, w)
        if n != nv:
            raise IllegalDiagram("component count mismatch while bending")
        # translate components of V to components of W0 u W
        m = len(w.word)
        v_to_key: Dict[int, int] = {}
        for (r, p), comp in vlab.items():
            key = lab1[(r, p)] if r <= m else lab0[(len(self.vword) - r, p)]
            if v_to_key.setdefault(comp, key) != key:
                raise IllegalDiagram("inconsistent component labels while bending")
        self.n = n
        self.dot_site: Dict[int, Tuple[int, int]] = {}
        for (r, p), comp in sorted(vlab.items()):
            self.dot_site.setdefault(v_to_key[comp], (r, p))
        self.cups = cup_slices(lam, self.vword)
        self.keys = _subsets(n)
        self.top_key = tuple(thin_positions(lam))
        self.reps: Dict[FrozenSet[int], FoamDiagram] = {}
        self.tests: Dict[FrozenSet[int], Tuple[Slice, ...]] = {}
        for delta in self.keys:
            cup = self._cup_rep(delta)
            rep_slices = cup + unbend_slices(w0, len(w.word))
            self.reps[delta] = FoamDiagram(w0, rep_slices)
            self.tests[delta] = mirror(FoamDiagram(identity(lam), cup)).slices
        self.test_degree = {
            g: sum((slice_degree(s) for s in t), Bidegree(0, 0)) for g, t in self.tests.items()
        }
        self._inverse: Optional[List[List[RingElem]]] = None

    def _cup_rep(self, delta) -> Tuple[Slice, ...]:
        dots = tuple(Slice("dot", self.dot_site[i][1], self.dot_site[i][0]) for i in sorted(delta))
        return self.cups + dots

    def qdeg(self, delta) -> int:
        return self.reps[delta].degree.qdeg

    def pair(self, gamma, bent: FoamDiagram, strategy: Optional[Strategy] = None) -> RingElem:
        # evaluation is homogeneous: skip pairings of the wrong degree, unless the
        # guard is off and the raw rewriting itself is under test
        strategy = strategy or Strategy()
        top = len(self.top_key)
        deg = bent.degree + self.test_degree[gamma]
        if strategy.guard and tuple(deg) != (top, top):
            return ZERO
        closed = FoamDiagram(bent.source, bent.slices + self.tests[gamma])
        if strategy.max_steps is None:
            strategy = Strategy(strategy.rng, strategy.nc_rate, strategy.guard, strategy.eager_nc,
                                iteration_bound(closed))
        return evaluate_closed(closed, strategy=strategy).get(self.top_key, ZERO)

    def inverse_gram(self) -> List[List[RingElem]]:
        if self._inverse is None:
            gram = [[self.pair(g, bend(self.reps[d])) for d in self.keys] for g in self.keys]
            eye = [[ONE if i == j else ZERO for j in range(len(self.keys))] for i in range(len(self.keys))]
            self._inverse = _solve_unit(gram, eye)
        return self._inverse

    def coordinates(self, terms: Iterable[Tuple[RingElem, FoamDiagram]],
                    strategy: Optional[Strategy] = None) -> Dict[FrozenSet[int], RingElem]:
        b = [ZERO] * len(self.keys)
        for coef, dg in terms:
            if not coef:
                continue
            bent = bend(dg)
            for i, g in enumerate(self.keys):
                b[i] = b[i] + coef * self.pair(g, bent, strategy)
        inv = self.inverse_gram()
        out = {}
        for i, d in enumerate(self.keys):
            v = ZERO
            for j in range(len(self.keys)):
                if inv[i][j] and b[j]:
                    v = v + inv[i][j] * b[j]
            if v:
                out[d] = v
        return out


_BASES: Dict[Tuple, HomBasis] = {}


def hom_basis_data(w0: Web, w: Web) -> HomBasis:
    key = (w0.source, w0.word, w.source, w.word, active_table().source)
    if key not in _BASES:
        _BASES[key] = HomBasis(w0, w)
    return _BASES[key]


def hom_basis(w0: Web, w: Web) -> List[Tuple[ReducedKey, int]]:
    hb = hom_basis_data(w0, w)
    return [(ReducedKey(w0, w, d), hb.qdeg(d)) for d in hb.keys]


def rep(key: ReducedKey) -> FoamDiagram:
    return hom_basis_data(key.source, key.target).reps[key.delta]


# ---------------------------------------------------------------------------
# vectors


@dataclass(frozen=True)
class FoamVector:
    source: Web
    target: Web
    coeffs: Dict[FrozenSet[int], RingElem] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", {frozenset(k): v for k, v in self.coeffs.items() if v})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FoamVector)
            and self.source == other.source
            and self.target == other.target
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "FoamVector") -> "FoamVector":
        _same_boundary(self, other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, ZERO) + v
        return FoamVector(self.source, self.target, out)

    def __neg__(self) -> "FoamVector":
        return FoamVector(self.source, self.target, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "FoamVector") -> "FoamVector":
        return self + (-other)

    def scale(self, c: RingElem) -> "FoamVector":
        return FoamVector(self.source, self.target, {k: c * v for k, v in self.coeffs.items()})

    def terms(self) -> List[Tuple[RingElem, FoamDiagram]]:
        hb = hom_basis_data(self.source, self.target)
        return [(v, hb.reps[k]) for k, v in sorted(self.coeffs.items(), key=lambda kv: sorted(kv[0]))]

    def lines(self) -> List[str]:
        return [
            f"{v} * rep{{{','.join(str(i) for i in sorted(k))}}}"
            for k, v in sorted(self.coeffs.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        ]

    def to_json(self) -> Dict:
        return {
            "source": str(self.source),
            "target": str(self.target),
            "terms": [
                {"delta": sorted(k), "coef": str(v)}
                for k, v in sorted(self.coeffs.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
            ],
        }


def _same_boundary(a: FoamVector, b: FoamVector) -> None:
    if a.source != b.source or a.target != b.target:
        raise BoundaryMismatch("foam vectors have different boundaries")


def zero_vector(w0: Web, w: Web) -> FoamVector:
    return FoamVector(w0, w, {})


def identity_vector(w: Web) -> FoamVector:
    return normalize([(ONE, FoamDiagram(w, ()))])


def normalize(terms: Sequence[Tuple[RingElem, FoamDiagram]], strategy: Optional[Strategy] = None) -> FoamVector:
    """Expand a combination of diagrams ``W0 -> W`` in the reduced basis."""
    terms = [(RingElem.coerce(c), d) for c, d in terms]
    if not terms:
        raise BoundaryMismatch("normalize needs at least one diagram")
    w0, w = terms[0][1].source, terms[0][1].target
    for _, d in terms:
        if d.source != w0 or d.target != w:
            raise BoundaryMismatch("diagrams do not share a boundary")
        rep_ = check_legal(d)
        if not rep_:
            raise IllegalDiagram(f"{rep_.condition} at slice {rep_.slice_index}")
    hb = hom_basis_data(w0, w)
    return FoamVector(w0, w, hb.coordinates(terms, strategy))


def normalize_diagram(dg: FoamDiagram, strategy: Optional[Strategy] = None) -> FoamVector:
    return normalize([(ONE, dg)], strategy)


def compose_vec(upper: FoamVector, lower: FoamVector, strategy: Optional[Strategy] = None) -> FoamVector:
    if lower.target != upper.source:
        raise BoundaryMismatch("foam vectors are not composable")
    terms = []
    for cu, du in upper.terms():
        for cl, dl in lower.terms():
            terms.append((cu * cl, FoamDiagram(dl.source, dl.slices + du.slices)))
    if not terms:
        return zero_vector(lower.source, upper.target)
    return normalize(terms, strategy)


# ---------------------------------------------------------------------------
# termination measure


@dataclass(frozen=True)
class OrderMeasure:
    shadings: Tuple[int, ...]
    closed: Tuple[int, ...]
    dots: Tuple[int, ...]

    def vector(self) -> Tuple[int, ...]:
        return self.shadings + self.closed + self.dots

    def total(self) -> int:
        return sum(self.vector())

    def __lt__(self, other: "OrderMeasure") -> bool:
        return self.vector() < other.vector()


class _UF:
    def __init__(self):
        self.parent: Dict = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _trace(dg: FoamDiagram):
    """Letter ids per height, the strand union-find and the shading union-find."""
    weight = dg.weight
    d = sum(weight)
    strands, shades = _UF(), _UF()
    ids = list(range(len(dg.source.word)))
    nxt = len(ids)
    letters = {i: l for i, l in enumerate(dg.source.word)}
    boundary = set(ids)
    for i in ids:
        strands.find(i)

    def interval_name(word_ids, idx, c):
        # shaded c-interval containing gap ``idx`` is named by the m_c letter opening it
        for j in range(idx - 1, -1, -1):
            k, col = letters[word_ids[j]]
            if col == c:
                return word_ids[j] if k == "m" else None
        return ("amb", c)

    for c in range(1, d):
        shades.find(("amb", c))
    for i in ids:
        k, c = letters[i]
        if k == "m":
            shades.find(i)
    dots = []
    for sl in dg.slices:
        if sl.kind in ("cupA", "cupB"):
            a, b = nxt, nxt + 1
            nxt += 2
            la, lb = ("m", "s") if sl.kind == "cupA" else ("s", "m")
            letters[a], letters[b] = (la, sl.colour), (lb, sl.colour)
            strands.union(a, b)
            if sl.kind == "cupA":
                shades.find(a)
            else:
                outer = interval_name(ids, sl.pos, sl.colour)
                shades.union(b, outer)
            ids[sl.pos:sl.pos] = [a, b]
        elif sl.kind in CAP_LETTERS:
            x, y = ids[sl.pos], ids[sl.pos + 1]
            strands.union(x, y)
            if sl.kind == "capA":
                outer = interval_name(ids, sl.pos, sl.colour)
                shades.union(y, outer)
            del ids[sl.pos:sl.pos + 2]
        elif sl.kind == "x":
            ids[sl.pos], ids[sl.pos + 1] = ids[sl.pos + 1], ids[sl.pos]
        else:
            dots.append(sl.colour)
    boundary |= set(ids)
    return letters, strands, shades, boundary, dots


def measure(dg: FoamDiagram) -> OrderMeasure:
    """Counts of shadings, closed strands and dots per colour."""
    d = sum(dg.weight)
    letters, strands, shades, boundary, dots = _trace(dg)
    open_roots = {strands.find(i) for i in boundary}
    closed = [0] * max(d - 1, 0)
    seen = set()
    for i, (k, c) in letters.items():
        r = strands.find(i)
        if r in open_roots or r in seen:
            continue
        seen.add(r)
        closed[c - 1] += 1
    sh = [0] * max(d - 1, 0)
    seen = set()
    for node in list(shades.parent):
        r = shades.find(node)
        if r in seen:
            continue
        seen.add(r)
        c = node[1] if isinstance(node, tuple) else letters[node][1]
        sh[c - 1] += 1
    # the ambient shading only counts where the weight is doubled
    doubles = _doubles_of(dg.weight)
    for c in range(1, d):
        r = shades.find(("amb", c))
        members = [n for n in shades.parent if shades.find(n) == r]
        if c not in doubles and members == [("amb", c)]:
            sh[c - 1] -= 1
    nd = [0] * d
    for p in dots:
        nd[p - 1] += 1
    return OrderMeasure(tuple(sh), tuple(closed), tuple(nd))


def iteration_bound(dg: FoamDiagram) -> int:
    return 4 * (measure(dg).total() + len(dg.slices)) ** 2


# ---------------------------------------------------------------------------
# isotopy tidy-up


def _left_of(low: Slice, up: Slice) -> Optional[bool]:
    """Whether ``up`` may move below ``low`` in the canonical order."""
    c0, c1 = low.pos, low.pos + low.width_out
    a, b = up.pos, up.pos + up.width_in
    if b <= c0 and not (a == b == c0 == c1):
        return True
    if a == b == c0 == c1:
        return up.colour < low.colour
    return False


def _zigzag(dg: FoamDiagram, k: int) -> Optional[Tuple[FoamDiagram, RingElem]]:
    low, up = dg.slices[k], dg.slices[k + 1]
    if low.kind not in ("cupA", "cupB") or up.kind not in CAP_LETTERS:
        return None
    if up.colour != low.colour:
        return None
    table = active_table()
    kind = low.kind[-1]
    if up.pos == low.pos + 1:
        side = "left"
    elif up.pos == low.pos - 1:
        side = "right"
    else:
        return None
    new = FoamDiagram(dg.source, dg.slices[:k] + dg.slices[k + 2:])
    return new, table.zigzag[(kind, side)]


def tidy(dg: FoamDiagram, max_passes: int = 10000) -> Tuple[FoamDiagram, RingElem]:
    """Zigzag-free, canonically ordered representative; ``dg = scalar * result``."""
    scalar = ONE
    cur = dg
    for _ in range(max_passes):
        changed = False
        for k in range(len(cur.slices) - 1):
            z = _zigzag(cur, k)
            if z is not None:
                cur, s = z
                scalar = scalar * s
                changed = True
                break
            if _left_of(cur.slices[k], cur.slices[k + 1]):
                try:
                    cur, s = interchange_scalar(cur, k)
                except (NotDisjoint, BoundaryMismatch):
                    continue
                scalar = scalar * s
                changed = True
                break
        if not changed:
            return cur, scalar
    raise NonTerminating("tidy did not stabilize")




# ---------------------------------------------------------------------------
# thin surfaces and redexes


@dataclass(frozen=True)
class SurfaceComponent:
    euler: int
    dots: Tuple[int, ...]  # slice indices of the dots on it
    closed: bool


def _region_map(sl: Slice, r: int) -> Optional[int]:
    if sl.kind in ("dot", "x"):
        return r
    if r <= sl.pos:
        return r
    if r >= sl.pos + sl.width_in:
        return r + sl.width_out - sl.width_in
    return None


def surface_components(dg: FoamDiagram) -> List[SurfaceComponent]:
    """Components of the thin surface with Euler characteristic and dots."""
    from .webs import slot_graph

    uf = _UF()
    words = dg.words
    webs = [Web(dg.weight, w) for w in words]
    top_h = len(words) - 1
    edge = set()
    for h, web in enumerate(webs):
        g, nodes = slot_graph(web)
        last = len(web.word)
        for x in nodes:
            uf.union((h,) + x, (h,) + g.find(x))
            if h in (0, top_h) or x[0] in (0, last):
                edge.add((h,) + x)
    euler: Dict = {}
    dots: Dict = {}

    def bump(node, e):
        r = uf.find(node)
        euler[r] = euler.get(r, 0) + e

    for h, sl in enumerate(dg.slices):
        lo, hi = webs[h], webs[h + 1]
        his = set(slot_graph(hi)[1])
        for r in range(len(lo.word) + 1):
            r2 = _region_map(sl, r)
            if r2 is None:
                continue
            for p in thin_positions(lo.regions[r]):
                if (r2, p) in his:
                    uf.union((h, r, p), (h + 1, r2, p))
    g0, nodes0 = slot_graph(webs[0])
    last0 = len(webs[0].word)
    for x in {g0.find(x) for x in nodes0}:
        if any(y[0] in (0, last0) for y in nodes0 if g0.find(y) == x):
            bump((0,) + x, 1)
    for h, sl in enumerate(dg.slices):
        c = sl.colour
        if sl.kind == "cupB":
            bump((h + 1, sl.pos + 1, c), 1)
        elif sl.kind == "capA":
            bump((h, sl.pos + 1, c), 1)
        elif sl.kind == "cupA":
            bump((h + 1, sl.pos, c), -1)
        elif sl.kind == "capB":
            bump((h, sl.pos, c), -1)
        elif sl.kind == "dot":
            dots.setdefault(uf.find((h, sl.pos, c)), []).append(h)
    roots = {uf.find(n) for n in list(uf.parent)}
    edge_roots = {uf.find(n) for n in edge}
    return [
        SurfaceComponent(euler.get(r, 0), tuple(dots.get(r, ())), r not in edge_roots)
        for r in sorted(roots, key=str)
    ]


def _bubbles(dg: FoamDiagram) -> List[Tuple[str, int, int]]:
    """Cups whose two letters are later removed by a single cap."""
    ids = list(range(len(dg.source.word)))
    born: Dict[Tuple[int, int], Tuple[str, int]] = {}
    nxt = len(ids)
    out = []
    for h, sl in enumerate(dg.slices):
        if sl.kind in ("cupA", "cupB"):
            ids[sl.pos:sl.pos] = [nxt, nxt + 1]
            born[(nxt, nxt + 1)] = (sl.kind, h)
            nxt += 2
        elif sl.kind in CAP_LETTERS:
            pair = (ids[sl.pos], ids[sl.pos + 1])
            if pair in born:
                kind, h0 = born[pair]
                out.append(("bb_ccw" if kind == "cupB" else "bb_cw", h0, h))
            del ids[sl.pos:sl.pos + 2]
        elif sl.kind == "x":
            ids[sl.pos], ids[sl.pos + 1] = ids[sl.pos + 1], ids[sl.pos]
    return out


@dataclass(frozen=True)
class Redex:
    tag: str
    location: Tuple[int, ...]  # slice indices involved


def find_redex(dg: FoamDiagram) -> Optional[Redex]:
    """First redex of the tidied diagram in the order dd, bubbles, nc.

    A neck is only reported on a surface component that meets the
    boundary: cutting a neck whose two sides lie on one closed component
    never reduces the measure.
    """
    dg, _ = tidy(dg)
    comps = surface_components(dg)
    for comp in comps:
        if len(comp.dots) >= 2:
            return Redex("dd", tuple(sorted(comp.dots)[:2]))
    bubbles = _bubbles(dg)
    if bubbles:
        tag, h0, h1 = min(bubbles, key=lambda b: (b[2], b[1]))
        return Redex(tag, (h0, h1))
    for comp in comps:
        if comp.euler < 1 and not comp.closed:
            return Redex("nc", comp.dots)
    return None


def is_reduced(dg: FoamDiagram) -> bool:
    return find_redex(dg) is None


# ---------------------------------------------------------------------------
# rule patterns


@dataclass(frozen=True)
class RewriteRule:
    tag: str
    lhs: FoamDiagram
    rhs: Tuple[Tuple[RingElem, FoamDiagram], ...]
    guarded: bool = False

    def rhs_vector(self) -> FoamVector:
        if not self.rhs:
            return zero_vector(self.lhs.source, self.lhs.target)
        return normalize(list(self.rhs))


def _pattern(text: str) -> FoamDiagram:
    from .foams import parse_diagram

    return parse_diagram(text)


def _coefficient(lhs: FoamDiagram, basis_terms: Sequence[FoamDiagram]) -> Tuple[Tuple[RingElem, FoamDiagram], ...]:
    """Solve ``lhs = sum c_i term_i`` for units ``c_i`` in the reduced basis."""
    target = normalize_diagram(lhs)
    vecs = [normalize_diagram(t) for t in basis_terms]
    out = []
    rest = target
    for t, v in zip(basis_terms, vecs):
        (key, coef), = v.coeffs.items()
        c = rest.coeffs.get(key, ZERO) * unit_inverse(coef)
        if c:
            out.append((c, t))
            rest = rest - v.scale(c)
    if not rest.is_zero():
        raise IllegalDiagram(f"pattern {format_diagram(lhs)} is not spanned by its right side")
    return tuple(out)


def rule_table() -> List[RewriteRule]:
    """Local rules with right sides computed from the loaded scalars."""
    pats = {
        "dd": ("1;;dot1@0,dot1@0", []),
        "dm": ("11;m1,s1;dot1@0", ["11;m1,s1;dot2@0"]),
        "bb_ccw": ("2;;cupB1@0,capA1@0", []),
        "bb_cw": ("11;;cupA1@0,capB1@0", ["11;;dot1@0", "11;;dot2@0"]),
        "nc": ("2;s1,m1;", ["2;s1,m1;dot1@1,capA1@0,cupB1@0", "2;s1,m1;capA1@0,cupB1@0,dot1@1"]),
    }
    out = []
    for tag, (lhs, rhs) in pats.items():
        lhs_d = _pattern(lhs)
        out.append(RewriteRule(tag, lhs_d, _coefficient(lhs_d, [_pattern(r) for r in rhs]), tag == "nc"))
    return out


# ---------------------------------------------------------------------------
# random diagrams and confluence


def random_open_diagram(rng: random.Random, weight, n_slices: int, n_letters: int = 3,
                        dot_rate: float = 0.2) -> FoamDiagram:
    """A random legal diagram between random webs on ``weight``."""
    from .foams import _shading_walk  # noqa: F401  (legality walk used by _moves)

    weight = tuple(weight)
    d = sum(weight)
    doubles = _doubles_of(weight)
    src = random_web(rng, weight, n_letters)
    # keep the ends equal so that identity-like pairs stay parallel
    word = src.word
    slices: List[Slice] = []
    for _ in range(n_slices):
        moves = _moves(weight, word, doubles, d, allow_cups=len(word) < 2 * d + 2)
        moves = [m for m in moves if m.kind != "dot" or rng.random() < dot_rate]
        if not moves:
            break
        s = rng.choice(moves)
        slices.append(s)
        word = apply_slice(word, s)
    return FoamDiagram(src, tuple(slices))


@dataclass
class FuzzReport:
    seed: int
    count: int
    agreed: int
    counterexample: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None and self.agreed == self.count

    def to_json(self) -> Dict:
        return {"seed": self.seed, "count": self.count, "agreed": self.agreed,
                "ok": self.ok, "counterexample": self.counterexample}


def confluence_fuzz(seed: int = 0, size: int = 8, count: int = 200, max_d: int = 4,
                    nc_rate: float = 0.5) -> FuzzReport:
    """Normalize random diagrams under two random strategies and compare."""
    rng = random.Random(seed)
    weights = [w for d in range(1, max_d + 1) for w in all_weights(d)]
    agreed = 0
    for _ in range(count):
        dg = random_open_diagram(rng, rng.choice(weights), rng.randint(0, size), rng.randint(0, 3))
        s1 = Strategy(random.Random(rng.random()), nc_rate)
        s2 = Strategy(random.Random(rng.random()), nc_rate)
        if normalize_diagram(dg, s1) != normalize_diagram(dg, s2):
            return FuzzReport(seed, count, agreed, format_diagram(dg))
        agreed += 1
    return FuzzReport(seed, count, agreed)


def negative_control() -> FoamDiagram:
    """An undotted sphere: its two sides lie on one strand, the unguarded loop."""
    return _pattern("2;;cupB1@0,capA1@0")


def run_unguarded(dg: FoamDiagram) -> FoamVector:
    """Normalize with the distinct-strand guard switched off (test use only)."""
    return normalize_diagram(dg, Strategy(None, 0.0, guard=False, eager_nc=True))
