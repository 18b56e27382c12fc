"""Covering sl2 Khovanov homology from the cube of resolutions.

Each vertex carries the quasi-exterior algebra on its circles, in which
distinct generators commute up to ``XY`` and square to zero.  Merges
identify two generators; splits multiply by ``a_1 + XY a_2`` where the
split circles are ordered along the crossing arc.  Squares commute up to
a unit ``psi``, fixed empirically; a cochain ``eps`` with coboundary
``psi`` makes them commute and Koszul signs make them anti-commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .complexes import FreeModule, HypercubicComplex, Mat, ModuleBackend, bump, squares, vertices
from .errors import CocycleFailure, NoSolution, NotClosed, UnknownCircle
from .pipeline import SlicedTangle
from .ring import ONE, ZERO, Bidegree, LaurentPoly, Q_PLUS_QINV, RingElem, unit_inverse

XY = RingElem.monomial(x=1, y=1)

Vertex = Tuple[int, ...]
Node = Tuple[int, int]  # (height, strand position)


# ---------------------------------------------------------------------------
# the resolution cube


@dataclass(frozen=True)
class Saddle:
    kind: str  # "merge" or "split"
    ends: Tuple[int, int]  # merge: the two source circles; split: the target pair (c1, c2)
    circle: int  # merge: the target circle; split: the source circle
    relabel: Dict[int, int]  # untouched source circle -> target circle


@dataclass
class ResolutionCube:
    tangle: SlicedTangle
    order: Tuple[int, ...]  # cube direction j is crossing order[j]
    flips: FrozenSet[int]
    circles: Dict[Vertex, List[FrozenSet[Node]]]
    saddles: Dict[Tuple[Vertex, int], Saddle]

    @property
    def n(self) -> int:
        return len(self.order)

    def count(self, v: Vertex) -> int:
        return len(self.circles[v])


class _UF:
    def __init__(self):
        self.parent: Dict[Node, Node] = {}

    def find(self, a: Node) -> Node:
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: Node, b: Node) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _smoothing(d: SlicedTangle, k: int, bit: int) -> str:
    """``"P"`` (vertical strands) or ``"L"`` (turn-backs) for crossing slice ``k``."""
    zero = "P" if d.slices[k].kind == "x+" else "L"
    return zero if bit == 0 else ("L" if zero == "P" else "P")


def _circles(d: SlicedTangle, state: Dict[int, int]) -> List[FrozenSet[Node]]:
    uf = _UF()
    for h, s in enumerate(d.slices):
        i = s.pos - 1
        below, above = d.widths[h], d.widths[h + 1]
        for p in range(below):
            uf.find((h, p))
        if s.kind == "cup":
            for p in range(below):
                uf.union((h, p), (h + 1, p if p < i else p + 2))
            uf.union((h + 1, i), (h + 1, i + 1))
        elif s.kind == "cap":
            uf.union((h, i), (h, i + 1))
            for p in range(below):
                if p < i:
                    uf.union((h, p), (h + 1, p))
                elif p > i + 1:
                    uf.union((h, p), (h + 1, p - 2))
        else:
            for p in range(below):
                if p not in (i, i + 1):
                    uf.union((h, p), (h + 1, p))
            if _smoothing(d, h, state[h]) == "P":
                uf.union((h, i), (h + 1, i))
                uf.union((h, i + 1), (h + 1, i + 1))
            else:
                uf.union((h, i), (h, i + 1))
                uf.union((h + 1, i), (h + 1, i + 1))
        for p in range(above):
            uf.find((h + 1, p))
    groups: Dict[Node, set] = {}
    for a in list(uf.parent):
        groups.setdefault(uf.find(a), set()).add(a)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def _arc(d: SlicedTangle, k: int, flipped: bool) -> Tuple[Node, Node]:
    """Tail and head of the dual arc of crossing ``k`` in its 1-resolution."""
    s = d.slices[k]
    i = s.pos - 1
    if s.kind == "x+":  # 1-resolution: turn-backs, arc from bottom to top
        tail, head = (k, i), (k + 1, i)
    else:  # 1-resolution: vertical strands, arc from right to left
        tail, head = (k, i + 1), (k, i)
    return (head, tail) if flipped else (tail, head)


def resolve(d: SlicedTangle, order: Optional[Sequence[int]] = None, flips: Sequence[int] = ()) -> ResolutionCube:
    """Circles at every vertex and the saddle on every edge.

    ``order`` permutes crossings (direction ``j`` is crossing ``order[j]``,
    counted in slice order); ``flips`` reverses the arcs of those crossings.
    """
    if not d.closed:
        raise NotClosed("the resolution cube needs a link diagram")
    xs = d.crossings
    order = tuple(range(len(xs))) if order is None else tuple(order)
    if sorted(order) != list(range(len(xs))):
        raise ValueError(f"{order} is not a permutation of the crossings")
    flips = frozenset(flips)
    n = len(xs)
    circles: Dict[Vertex, List[FrozenSet[Node]]] = {}
    for v in vertices(n):
        state = {xs[order[j]]: v[j] for j in range(n)}
        circles[v] = _circles(d, state)
    saddles = {}
    for v in vertices(n):
        src = circles[v]
        for j in range(n):
            if v[j]:
                continue
            w = bump(v, j)
            tgt = circles[w]
            k = xs[order[j]]
            i = d.slices[k].pos - 1
            src_of = {node: a for a, c in enumerate(src) for node in c}
            tgt_of = {node: a for a, c in enumerate(tgt) for node in c}
            corners = [(k, i), (k, i + 1), (k + 1, i), (k + 1, i + 1)]
            touched_src = sorted({src_of[x] for x in corners})
            touched_tgt = sorted({tgt_of[x] for x in corners})
            relabel = {}
            for a, c in enumerate(src):
                if a not in touched_src:
                    relabel[a] = tgt_of[min(c)]
            if len(touched_src) == 2:
                saddles[(v, j)] = Saddle("merge", tuple(touched_src), touched_tgt[0], relabel)
            else:
                tail, head = _arc(d, k, order[j] in flips)
                saddles[(v, j)] = Saddle("split", (tgt_of[tail], tgt_of[head]), touched_src[0], relabel)
    return ResolutionCube(d, order, flips, circles, saddles)


# ---------------------------------------------------------------------------
# the quasi-exterior algebra


@dataclass(frozen=True)
class WedgeElement:
    n: int  # ambient circles 0..n-1
    terms: Dict[Tuple[int, ...], RingElem]

    def __post_init__(self):
        clean = {}
        for k, v in self.terms.items():
            k = tuple(k)
            if any(x < 0 or x >= self.n for x in k):
                raise UnknownCircle(f"letter outside 0..{self.n - 1} in {k}")
            if list(k) != sorted(set(k)):
                raise ValueError(f"monomial {k} is not strictly increasing")
            if v:
                clean[k] = v
        object.__setattr__(self, "terms", clean)

    def __add__(self, other: "WedgeElement") -> "WedgeElement":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, ZERO) + v
        return WedgeElement(self.n, out)

    def scale(self, c: RingElem) -> "WedgeElement":
        return WedgeElement(self.n, {k: c * v for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, v in sorted(self.terms.items()):
            mono = "".join(f"a{i}" for i in k) or "1"
            parts.append(f"({v})*{mono}")
        return " + ".join(parts)


def letter(n: int, i: int) -> WedgeElement:
    return WedgeElement(n, {(i,): ONE})


def unit(n: int) -> WedgeElement:
    return WedgeElement(n, {(): ONE})


def _mono_mul(s: Tuple[int, ...], t: Tuple[int, ...]) -> Optional[Tuple[Tuple[int, ...], RingElem]]:
    if set(s) & set(t):
        return None
    inversions = sum(1 for a in s for b in t if a > b)
    return tuple(sorted(s + t)), (XY if inversions % 2 else ONE)


def wedge_mul(p: WedgeElement, q: WedgeElement) -> WedgeElement:
    if p.n != q.n:
        raise UnknownCircle("wedge factors live on different circle sets")
    out: Dict[Tuple[int, ...], RingElem] = {}
    for s, a in p.terms.items():
        for t, b in q.terms.items():
            r = _mono_mul(s, t)
            if r is None:
                continue
            key, c = r
            out[key] = out.get(key, ZERO) + c * a * b
    return WedgeElement(p.n, out)


def substitute(p: WedgeElement, images: Dict[int, int], n_out: int) -> WedgeElement:
    """Apply the letter map ``a_i -> a_images[i]`` and normal-order."""
    out = WedgeElement(n_out, {})
    for s, c in p.terms.items():
        acc = unit(n_out)
        for i in s:
            if i not in images:
                raise UnknownCircle(f"no image for circle {i}")
            acc = wedge_mul(acc, letter(n_out, images[i]))
        out = out + acc.scale(c)
    return out


def m_map(p: WedgeElement, saddle: Saddle, n_out: int) -> WedgeElement:
    c1, c2 = saddle.ends
    images = dict(saddle.relabel)
    images[c1] = images[c2] = saddle.circle
    return substitute(p, images, n_out)


def delta_map(p: WedgeElement, saddle: Saddle, n_out: int) -> WedgeElement:
    c1, c2 = saddle.ends
    images = dict(saddle.relabel)
    images[saddle.circle] = c1
    moved = substitute(p, images, n_out)
    return wedge_mul(letter(n_out, c1) + letter(n_out, c2).scale(XY), moved)


def basis(n: int) -> List[Tuple[int, ...]]:
    from itertools import combinations

    return [c for size in range(n + 1) for c in combinations(range(n), size)]


def edge_matrix(cube: ResolutionCube, v: Vertex, j: int) -> Dict[Tuple[int, int], RingElem]:
    """Matrix of the saddle map in the monomial bases, rows in the target."""
    sad = cube.saddles[(v, j)]
    n_in, n_out = cube.count(v), cube.count(bump(v, j))
    b_in, b_out = basis(n_in), basis(n_out)
    row = {s: i for i, s in enumerate(b_out)}
    f = m_map if sad.kind == "merge" else delta_map
    out = {}
    for col, s in enumerate(b_in):
        img = f(WedgeElement(n_in, {s: ONE}), sad, n_out)
        for t, c in img.terms.items():
            out[(row[t], col)] = c
    return out


# ---------------------------------------------------------------------------
# the cocycle psi and the scalar assignment


def _compose(g: Dict, f: Dict) -> Dict[Tuple[int, int], RingElem]:
    out: Dict[Tuple[int, int], RingElem] = {}
    for (i, j), a in f.items():
        for (k, i2), b in g.items():
            if i2 == i:
                out[(k, j)] = out.get((k, j), ZERO) + b * a
    return {k: v for k, v in out.items() if v}


def _unit_candidates(a: RingElem, b: RingElem) -> List[RingElem]:
    (ma, ca), = list(a.items())[:1]
    out = []
    for mb, cb in b.items():
        if cb % ca or abs(cb // ca) != 1:
            continue
        out.append(RingElem.monomial(mb[0] - ma[0], mb[1] - ma[1], mb[2] - ma[2], cb // ca))
    return out


def square_ratio(first: Dict, second: Dict) -> Tuple[str, RingElem]:
    """Classify ``second = lam * first``: ``("unique", lam)``, ``("ambiguous", 1)`` or ``("zero", 1)``."""
    if not first and not second:
        return "zero", ONE
    if not first or not second:
        raise CocycleFailure("one path of a square vanishes and the other does not")
    key = next(iter(first))
    if key not in second:
        raise CocycleFailure("square paths have different supports")
    fits = []
    for lam in _unit_candidates(first[key], second[key]):
        if all(second.get(k, ZERO) == lam * v for k, v in first.items()) and set(second) == set(first):
            if lam not in fits:
                fits.append(lam)
    if not fits:
        raise CocycleFailure("square does not commute up to a unit")
    if len(fits) > 1:
        return "ambiguous", ONE
    return "unique", fits[0]


def psi(cube: ResolutionCube) -> Dict[Tuple[Vertex, int, int], RingElem]:
    """Unit per square with ``(l then k path) = psi (k then l path)``.

    Ladybug (ambiguous) and vanishing squares get 1.  The 2-cocycle
    condition is asserted on every 3-dimensional face.
    """
    mats = {(v, j): edge_matrix(cube, v, j) for (v, j) in cube.saddles}
    out = {}
    for v, k, l in squares(cube.n):
        first = _compose(mats[(bump(v, k), l)], mats[(v, k)])
        second = _compose(mats[(bump(v, l), k)], mats[(v, l)])
        out[(v, k, l)] = square_ratio(first, second)[1]
    check_cocycle(out, cube.n)
    return out


def cocycle_defect(ps, v: Vertex, i: int, j: int, k: int) -> RingElem:
    """Alternating product of the six faces of the 3-cube at ``v``; 1 for a cocycle."""
    inv = unit_inverse
    return (
        ps[(v, j, k)] * inv(ps[(bump(v, i), j, k)]) * inv(ps[(v, i, k)])
        * ps[(bump(v, j), i, k)] * ps[(v, i, j)] * inv(ps[(bump(v, k), i, j)])
    )


def check_cocycle(ps, n: int) -> None:
    for v in vertices(n):
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    if v[i] or v[j] or v[k]:
                        continue
                    if cocycle_defect(ps, v, i, j, k) != ONE:
                        raise CocycleFailure(f"psi fails the cocycle condition at {v}, {(i, j, k)}")


def coboundary(eps, v: Vertex, k: int, l: int) -> RingElem:
    return eps[(v, k)] * eps[(bump(v, k), l)] * unit_inverse(eps[(v, l)] * eps[(bump(v, l), k)])


def scalar_assignment(ps, n: int) -> Dict[Tuple[Vertex, int], RingElem]:
    """A cochain with coboundary ``psi``.

    Edges with no later coordinate set get 1; any other edge is transported
    across the square in its largest set later coordinate.
    """
    eps: Dict[Tuple[Vertex, int], RingElem] = {}
    for v in sorted(vertices(n), key=sum):
        for k in range(n):
            if v[k]:
                continue
            later = [m for m in range(k + 1, n) if v[m]]
            if not later:
                eps[(v, k)] = ONE
                continue
            m = later[-1]
            u = v[:m] + (0,) + v[m + 1:]
            eps[(v, k)] = eps[(u, k)] * unit_inverse(ps[(u, k, m)])
    for (v, k, l), val in ps.items():
        if coboundary(eps, v, k, l) != val:
            raise NoSolution(f"no cochain with coboundary psi at {v}, {(k, l)}")
    return eps


# ---------------------------------------------------------------------------
# the complex


def vertex_shift(d: SlicedTangle, v: Vertex) -> Tuple[int, int]:
    """``(t, q)`` of a vertex including the global renormalization."""
    n, r = len(v), sum(v)
    return r - n + d.n_plus, n - r - 2 * d.n_plus + d.n_minus


def kom_sl2(d: SlicedTangle, order: Optional[Sequence[int]] = None, flips: Sequence[int] = ()) -> HypercubicComplex:
    cube = resolve(d, order, flips)
    n = cube.n
    ps = psi(cube)
    eps = scalar_assignment(ps, n)
    dt, dq0 = vertex_shift(d, (0,) * n)
    objects = {}
    for v in vertices(n):
        c = cube.count(v)
        _, q = vertex_shift(d, v)
        degs = tuple(Bidegree(len(s), len(s) - c) for s in basis(c))  # splits qdeg 2|s| - c
        objects[v] = FreeModule(degs, q)
    edges = {}
    for (v, j) in cube.saddles:
        sign = -ONE if sum(v[:j]) % 2 else ONE
        coef = sign * eps[(v, j)]
        mat = {k: coef * x for k, x in edge_matrix(cube, v, j).items()}
        edges[(v, j)] = Mat(objects[v], objects[bump(v, j)], mat, None)
    return HypercubicComplex(ModuleBackend(), n, objects, edges, tuple(Bidegree(0, 0) for _ in range(n)), dt)


def kauffman_euler(d: SlicedTangle) -> LaurentPoly:
    """State sum ``sum (-1)^t q^shift (q + 1/q)^circles``."""
    if not d.closed:
        raise NotClosed("the state sum needs a link diagram")
    cube = resolve(d)
    out = LaurentPoly()
    for v in vertices(cube.n):
        t, q = vertex_shift(d, v)
        out = out + LaurentPoly.q_power(q, (-1) ** (t % 2)) * Q_PLUS_QINV ** cube.count(v)
    return out
