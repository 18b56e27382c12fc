"""Hypercubic complexes over graded additive backends.

Two backends realize the same interface.  :class:`ModuleBackend` works
with free Z^2-graded k-modules and homogeneous matrices; its monoidal
structure carries the sign ``(f (x) g)(a (x) b) = mu(deg g, deg a) f(a) (x) g(b)``.
:class:`FoamBackend` works with webs and linear combinations of foam
diagrams; horizontal composition concatenates words.  In both,
``(id (x) g) o (f (x) id) = mu(deg g, deg f) (f (x) g)``.

On top sit the graded Koszul cochain, the epsilon-tensor product of
hypercubes, induced chain maps and homotopies, total complexes, Gaussian
elimination, delooping and integral homology through Smith normal form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .errors import (
    BoundaryMismatch,
    DegreeDataMissing,
    IncompatibleCochain,
    NoCircle,
    NonUnitMatrix,
    NotAUnit,
    NotDisjoint,
    WeightMismatch,
)
from .foams import FoamDiagram, Slice, interchange_scalar
from .ring import ONE, ZERO, ZERO_DEG, Bidegree, RingElem, Specialization, mu, unit_inverse
from .rewriter import identity_vector, normalize, zero_vector
from .webs import Web, format_web
from .webs import compose as webs_compose

Vertex = Tuple[int, ...]


def vertices(n: int) -> List[Vertex]:
    return [tuple(v) for v in itertools.product((0, 1), repeat=n)]


def bump(v: Vertex, i: int) -> Vertex:
    return v[:i] + (v[i] + 1,) + v[i + 1:]


def _sum_deg(degs) -> Bidegree:
    out = ZERO_DEG
    for d in degs:
        out = out + d
    return out


# ---------------------------------------------------------------------------
# module backend


class FreeModule(NamedTuple):
    degrees: Tuple[Bidegree, ...]
    qshift: int = 0

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def qdeg(self, i: int) -> int:
        return self.degrees[i].qdeg + self.qshift


@dataclass(frozen=True)
class Mat:
    """Homogeneous morphism of free modules; ``entries[(i, j)]`` maps source j to target i."""

    src: FreeModule
    tgt: FreeModule
    entries: Dict[Tuple[int, int], RingElem]
    degree: Optional[Bidegree] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", {k: v for k, v in self.entries.items() if v})

    def __eq__(self, other) -> bool:
        return isinstance(other, Mat) and self.src == other.src and self.tgt == other.tgt and self.entries == other.entries

    def __hash__(self):
        return hash((self.src, self.tgt, frozenset(self.entries.items())))


class ModuleBackend:
    name = "module"

    def zero(self, src: FreeModule, tgt: FreeModule, degree=None) -> Mat:
        return Mat(src, tgt, {}, degree)

    def identity(self, obj: FreeModule) -> Mat:
        return Mat(obj, obj, {(i, i): ONE for i in range(obj.rank)}, ZERO_DEG)

    def is_zero(self, f: Mat) -> bool:
        return not f.entries

    def degree(self, f: Mat) -> Optional[Bidegree]:
        return f.degree

    def scale(self, c: RingElem, f: Mat) -> Mat:
        return Mat(f.src, f.tgt, {k: c * v for k, v in f.entries.items()}, f.degree)

    def add(self, f: Mat, g: Mat) -> Mat:
        if f.src != g.src or f.tgt != g.tgt:
            raise WeightMismatch("matrices have different shapes")
        out = dict(f.entries)
        for k, v in g.entries.items():
            out[k] = out.get(k, ZERO) + v
        return Mat(f.src, f.tgt, out, f.degree if f.degree is not None else g.degree)

    def compose(self, g: Mat, f: Mat) -> Mat:
        """``g o f``."""
        if f.tgt != g.src:
            raise WeightMismatch("matrices are not composable")
        out: Dict[Tuple[int, int], RingElem] = {}
        by_row: Dict[int, List[Tuple[int, RingElem]]] = {}
        for (i, j), v in f.entries.items():
            by_row.setdefault(i, []).append((j, v))
        for (k, i), w in g.entries.items():
            for j, v in by_row.get(i, ()):
                out[(k, j)] = out.get((k, j), ZERO) + w * v
        deg = f.degree + g.degree if f.degree is not None and g.degree is not None else None
        return Mat(f.src, g.tgt, out, deg)

    def shift_obj(self, obj: FreeModule, dq: int) -> FreeModule:
        return FreeModule(obj.degrees, obj.qshift + dq)

    def tensor_obj(self, a: FreeModule, b: FreeModule) -> FreeModule:
        return FreeModule(tuple(x + y for x in a.degrees for y in b.degrees), a.qshift + b.qshift)

    def tensor(self, f: Mat, g: Mat) -> Mat:
        gdeg = g.degree if g.degree is not None else ZERO_DEG
        nb_src, nb_tgt = g.src.rank, g.tgt.rank
        out = {}
        for (i, j), v in f.entries.items():
            sign = mu(gdeg, f.src.degrees[j])
            for (k, l), w in g.entries.items():
                out[(i * nb_tgt + k, j * nb_src + l)] = sign * v * w
        deg = f.degree + g.degree if f.degree is not None and g.degree is not None else None
        return Mat(self.tensor_obj(f.src, g.src), self.tensor_obj(f.tgt, g.tgt), out, deg)

    def equal(self, f: Mat, g: Mat) -> bool:
        return f.entries == g.entries


# ---------------------------------------------------------------------------
# foam backend


class FoamObject(NamedTuple):
    web: Web
    q: int = 0

    def __str__(self) -> str:
        return f"q^{self.q} {format_web(self.web)}"


@dataclass(frozen=True)
class FoamMorphism:
    """A k-linear combination of foam diagrams kept unnormalized until needed."""

    src: FoamObject
    tgt: FoamObject
    terms: Tuple[Tuple[RingElem, Tuple[Slice, ...]], ...]
    degree: Optional[Bidegree] = None

    def diagrams(self) -> List[Tuple[RingElem, FoamDiagram]]:
        return [(c, FoamDiagram(self.src.web, sl)) for c, sl in self.terms]


def _collect(terms) -> Tuple[Tuple[RingElem, Tuple[Slice, ...]], ...]:
    acc: Dict[Tuple[Slice, ...], RingElem] = {}
    order = []
    for c, sl in terms:
        if sl not in acc:
            order.append(sl)
            acc[sl] = ZERO
        acc[sl] = acc[sl] + c
    return tuple((acc[sl], sl) for sl in order if acc[sl])


class FoamBackend:
    """Objects are shifted webs; equality of morphisms is decided in the reduced basis."""

    name = "foam"

    def __init__(self, strategy=None):
        self.strategy = strategy
        self._normal: Dict = {}

    def zero(self, src: FoamObject, tgt: FoamObject, degree=None) -> FoamMorphism:
        return FoamMorphism(src, tgt, (), degree)

    def identity(self, obj: FoamObject) -> FoamMorphism:
        return FoamMorphism(obj, obj, ((ONE, ()),), ZERO_DEG)

    def morphism(self, src: FoamObject, tgt: FoamObject, slices: Sequence[Slice], coef: RingElem = ONE) -> FoamMorphism:
        dg = FoamDiagram(src.web, tuple(slices))
        if dg.target != tgt.web:
            raise WeightMismatch(f"foam ends at {format_web(dg.target)}, expected {format_web(tgt.web)}")
        return FoamMorphism(src, tgt, ((coef, tuple(slices)),), dg.degree)

    def is_zero(self, f: FoamMorphism) -> bool:
        return not f.terms

    def degree(self, f: FoamMorphism) -> Optional[Bidegree]:
        return f.degree

    def shift_obj(self, obj: FoamObject, dq: int) -> FoamObject:
        return FoamObject(obj.web, obj.q + dq)

    def scale(self, c: RingElem, f: FoamMorphism) -> FoamMorphism:
        return FoamMorphism(f.src, f.tgt, _collect((c * a, sl) for a, sl in f.terms), f.degree)

    def add(self, f: FoamMorphism, g: FoamMorphism) -> FoamMorphism:
        if f.src.web != g.src.web or f.tgt.web != g.tgt.web:
            raise WeightMismatch("foams have different boundaries")
        return FoamMorphism(f.src, f.tgt, _collect(f.terms + g.terms), f.degree if f.degree is not None else g.degree)

    def compose(self, g: FoamMorphism, f: FoamMorphism) -> FoamMorphism:
        if f.tgt.web != g.src.web:
            raise WeightMismatch("foams are not composable")
        terms = _collect((a * b, sf + sg) for a, sf in f.terms for b, sg in g.terms)
        deg = f.degree + g.degree if f.degree is not None and g.degree is not None else None
        return FoamMorphism(f.src, g.tgt, terms, deg)

    def tensor_obj(self, a: FoamObject, b: FoamObject) -> FoamObject:
        return FoamObject(webs_compose(b.web, a.web), a.q + b.q)

    def tensor(self, f: FoamMorphism, g: FoamMorphism) -> FoamMorphism:
        """``(f (x) id) o (id (x) g)``: ``g`` acts first on the right-hand letters."""
        off = len(f.src.web.word)
        terms = []
        for a, sf in f.terms:
            for b, sg in g.terms:
                terms.append((a * b, tuple(s._replace(pos=s.pos + off) for s in sg) + sf))
        deg = f.degree + g.degree if f.degree is not None and g.degree is not None else None
        return FoamMorphism(self.tensor_obj(f.src, g.src), self.tensor_obj(f.tgt, g.tgt), _collect(terms), deg)

    def normal(self, f: FoamMorphism):
        key = (f.src.web, f.tgt.web, f.terms)
        if key not in self._normal:
            if not f.terms:
                self._normal[key] = zero_vector(f.src.web, f.tgt.web)
            else:
                self._normal[key] = normalize(f.diagrams(), self.strategy)
        return self._normal[key]

    def equal(self, f: FoamMorphism, g: FoamMorphism) -> bool:
        if f.src.web != g.src.web or f.tgt.web != g.tgt.web:
            return False
        if _collect(f.terms) == _collect(g.terms):
            return True
        quick = _interchange_equal(f, g)
        if quick is not None:
            return quick
        return self.normal(f) == self.normal(g)

    def _identity_multiple(self, f: FoamMorphism) -> Optional[RingElem]:
        """The scalar ``c`` with ``f = c id`` in the reduced basis, if any."""
        if f.src.web != f.tgt.web:
            return None
        if not f.terms:
            return ZERO
        v = self.normal(f)
        if v.is_zero():
            return ZERO
        if f.degree is not None and tuple(f.degree) != (0, 0):
            return None
        ident = identity_vector(f.src.web)
        k = next((k for k, u in sorted(ident.coeffs.items(), key=lambda kv: sorted(kv[0])) if u.is_unit()), None)
        if k is None or k not in v.coeffs:
            return None
        c = v.coeffs[k] * unit_inverse(ident.coeffs[k])
        return c if v == ident.scale(c) else None

    def is_unit(self, f: FoamMorphism, src=None, tgt=None) -> bool:
        if src is not None and tgt is not None and src.q != tgt.q:
            return False
        c = self._identity_multiple(f)
        return c is not None and c.is_unit()

    def inverse(self, f: FoamMorphism) -> FoamMorphism:
        c = self._identity_multiple(f)
        if c is None or not c.is_unit():
            raise NotAUnit("foam is not a unit multiple of the identity")
        return FoamMorphism(f.tgt, f.src, ((unit_inverse(c), ()),), ZERO_DEG)


def _interchange_equal(f: FoamMorphism, g: FoamMorphism) -> Optional[bool]:
    """Decide ``f == g`` for single two-slice terms related by one interchange."""
    if len(f.terms) != 1 or len(g.terms) != 1:
        return None
    (cf, sf), (cg, sg) = f.terms[0], g.terms[0]
    if len(sf) != 2 or len(sg) != 2:
        return None
    try:
        new, c = interchange_scalar(FoamDiagram(f.src.web, sf), 0)
    except (NotDisjoint, BoundaryMismatch):
        return None
    if new.slices != sg:
        return None
    return cf * c == cg


# ---------------------------------------------------------------------------
# scalar backend: rank-one summands, used by total complexes over k


class ScalarBackend:
    """Summands are q-degrees; morphisms are elements of k."""

    name = "scalar"

    def is_zero(self, f: RingElem) -> bool:
        return not f

    def is_unit(self, f: RingElem, src=None, tgt=None) -> bool:
        return f.is_unit() and (src is None or src == tgt)

    def inverse(self, f: RingElem) -> RingElem:
        return unit_inverse(f)

    def compose(self, g: RingElem, f: RingElem) -> RingElem:
        return g * f

    def add(self, f: RingElem, g: RingElem) -> RingElem:
        return f + g

    def scale(self, c: RingElem, f: RingElem) -> RingElem:
        return c * f

    def equal(self, f, g) -> bool:
        return f == g


# ---------------------------------------------------------------------------
# hypercubes


@dataclass
class HypercubicComplex:
    """Objects on {0,1}^n, edges ``(vertex, direction) -> morphism``, one degree per direction."""

    backend: object
    n: int
    objects: Dict[Vertex, object]
    edges: Dict[Tuple[Vertex, int], object]
    psi: Tuple[Bidegree, ...]
    toff: int = 0

    def height(self, v: Vertex) -> Bidegree:
        """``|alpha|(v)``: the sum of direction degrees along any path from 0."""
        return _sum_deg(self.psi[i] for i in range(self.n) if v[i])

    def edge(self, v: Vertex, i: int):
        return self.edges[(v, i)]

    def check_degrees(self) -> bool:
        for (v, i), f in self.edges.items():
            if not self.backend.is_zero(f):
                d = self.backend.degree(f)
                if d is not None and tuple(d) != tuple(self.psi[i]):
                    return False
        return True


def one_cube(backend, src, tgt, f, psi: Bidegree, toff: int = 0) -> HypercubicComplex:
    return HypercubicComplex(backend, 1, {(0,): src, (1,): tgt}, {((0,), 0): f}, (Bidegree(*psi),), toff)


def point_cube(backend, obj, toff: int = 0) -> HypercubicComplex:
    return HypercubicComplex(backend, 0, {(): obj}, {}, (), toff)


def squares(n: int):
    for v in vertices(n):
        for k in range(n):
            for l in range(k + 1, n):
                if v[k] == 0 and v[l] == 0:
                    yield v, k, l


def anticommutation_failures(h: HypercubicComplex, equal: Optional[Callable] = None) -> List[Tuple[Vertex, int, int]]:
    b = h.backend
    equal = equal or b.equal
    bad = []
    for v, k, l in squares(h.n):
        p1 = b.compose(h.edges[(bump(v, k), l)], h.edges[(v, k)])
        p2 = b.compose(h.edges[(bump(v, l), k)], h.edges[(v, l)])
        if not equal(p1, b.scale(-ONE, p2)):
            bad.append((v, k, l))
    return bad


def koszul_cochain(a: HypercubicComplex, b: HypercubicComplex) -> Dict[Tuple[Vertex, int], RingElem]:
    """The standard cochain: 1 on A-edges, ``(-1)^|r| mu(|alpha|(r), psi_B)`` on B-edges."""
    eps = {}
    for r in vertices(a.n):
        hr = a.height(r)
        sign = ONE if sum(r) % 2 == 0 else -ONE
        for s in vertices(b.n):
            v = r + s
            for i in range(a.n):
                if r[i] == 0:
                    eps[(v, i)] = ONE
            for j in range(b.n):
                if s[j] == 0:
                    eps[(v, a.n + j)] = sign * mu(hr, b.psi[j])
    return eps


def coboundary(eps, v: Vertex, k: int, l: int) -> RingElem:
    """Ratio of the cochain along the two paths of the square at ``v`` in directions ``k < l``."""
    top = eps[(v, k)] * eps[(bump(v, k), l)]
    other = eps[(v, l)] * eps[(bump(v, l), k)]
    return top * unit_inverse(other)


def check_compatible(eps, a: HypercubicComplex, b: HypercubicComplex) -> bool:
    n = a.n + b.n
    for v, k, l in squares(n):
        want = ONE
        if k < a.n <= l:
            want = -mu(a.psi[k], b.psi[l - a.n])
        if coboundary(eps, v, k, l) != want:
            return False
    return True


def tensor(a: HypercubicComplex, b: HypercubicComplex, eps=None, check: bool = True) -> HypercubicComplex:
    """The epsilon-tensor product; the standard Koszul cochain by default."""
    if a.backend is not b.backend and type(a.backend) is not type(b.backend):
        raise WeightMismatch("hypercubes live over different backends")
    eps = koszul_cochain(a, b) if eps is None else eps
    if not check_compatible(eps, a, b):
        raise IncompatibleCochain("cochain fails the compatibility condition")
    bk = a.backend
    objects = {r + s: bk.tensor_obj(a.objects[r], b.objects[s]) for r in vertices(a.n) for s in vertices(b.n)}
    edges = {}
    for r in vertices(a.n):
        for s in vertices(b.n):
            v = r + s
            for i in range(a.n):
                if r[i] == 0:
                    f = bk.tensor(a.edges[(r, i)], bk.identity(b.objects[s]))
                    edges[(v, i)] = bk.scale(eps[(v, i)], f)
            for j in range(b.n):
                if s[j] == 0:
                    g = bk.tensor(bk.identity(a.objects[r]), b.edges[(s, j)])
                    edges[(v, a.n + j)] = bk.scale(eps[(v, a.n + j)], g)
    out = HypercubicComplex(bk, a.n + b.n, objects, edges, a.psi + b.psi, a.toff + b.toff)
    if check:
        bad = anticommutation_failures(out)
        if bad:
            raise IncompatibleCochain(f"squares fail to anti-commute: {bad[:3]}")
    return out


def cochain_change_iso(n: int, eps, eps2) -> Dict[Vertex, RingElem]:
    """Vertex units ``phi`` with ``phi(v + e_k) eps(v, k) = eps2(v, k) phi(v)``.

    Multiplication by ``phi`` is then an isomorphism from the complex built
    with ``eps`` to the one built with ``eps2``.
    """
    phi = {tuple([0] * n): ONE}
    order = sorted(vertices(n), key=sum)
    for v in order:
        for k in range(n):
            if v[k] == 0:
                w = bump(v, k)
                val = phi[v] * eps2[(v, k)] * unit_inverse(eps[(v, k)])
                if w in phi and phi[w] != val:
                    raise IncompatibleCochain("cochains differ by a non-cocycle")
                phi[w] = val
    return phi


def intertwines(phi, eps, eps2, n: int) -> bool:
    return all(
        phi[bump(v, k)] * eps[(v, k)] == eps2[(v, k)] * phi[v]
        for v in vertices(n) for k in range(n) if v[k] == 0
    )


# ---------------------------------------------------------------------------
# chain maps and homotopies between hypercubes


@dataclass
class CubeMap:
    """Components ``(r, s) -> morphism`` with their degrees."""

    components: Dict[Tuple[Vertex, Vertex], object]
    degrees: Dict[Tuple[Vertex, Vertex], Bidegree]

    def get(self, backend, a, b, r, s):
        f = self.components.get((r, s))
        return f if f is not None else backend.zero(a.objects[r], b.objects[s])

    def degree(self, backend, r, s) -> Bidegree:
        if (r, s) in self.degrees:
            return self.degrees[(r, s)]
        f = self.components.get((r, s))
        if f is not None and not backend.is_zero(f):
            raise DegreeDataMissing(f"component {(r, s)} has no degree")
        return ZERO_DEG


def _total_sum(backend, terms, src, tgt):
    acc = backend.zero(src, tgt)
    for t in terms:
        acc = backend.add(acc, t)
    return acc


def check_chain_map(f: CubeMap, a: HypercubicComplex, b: HypercubicComplex) -> bool:
    """``sum_j beta_j F = sum_i F alpha_i`` between every ``A^r`` and ``B^s``."""
    bk = a.backend
    for r in vertices(a.n):
        for s in vertices(b.n):
            if sum(s) + b.toff != sum(r) + a.toff + 1:
                continue
            lhs = [bk.compose(b.edges[(s2, j)], f.get(bk, a, b, r, s2))
                   for j in range(b.n) if s[j] == 1 for s2 in [s[:j] + (0,) + s[j + 1:]]]
            rhs = [bk.compose(f.get(bk, a, b, r2, s), a.edges[(r, i)])
                   for i in range(a.n) if r[i] == 0 for r2 in [bump(r, i)]]
            src, tgt = a.objects[r], b.objects[s]
            if not bk.equal(_total_sum(bk, lhs, src, tgt), _total_sum(bk, rhs, src, tgt)):
                return False
    return True


def check_homotopy(h: CubeMap, f: CubeMap, g: CubeMap, a: HypercubicComplex, b: HypercubicComplex) -> bool:
    """``F - G = H alpha + beta H`` between every ``A^r`` and ``B^s`` of equal height."""
    bk = a.backend
    for r in vertices(a.n):
        for s in vertices(b.n):
            if sum(s) + b.toff != sum(r) + a.toff:
                continue
            src, tgt = a.objects[r], b.objects[s]
            lhs = bk.add(f.get(bk, a, b, r, s), bk.scale(-ONE, g.get(bk, a, b, r, s)))
            terms = [bk.compose(h.get(bk, a, b, bump(r, i), s), a.edges[(r, i)]) for i in range(a.n) if r[i] == 0]
            terms += [bk.compose(b.edges[(s2, j)], h.get(bk, a, b, r, s2))
                      for j in range(b.n) if s[j] == 1 for s2 in [s[:j] + (0,) + s[j + 1:]]]
            if not bk.equal(lhs, _total_sum(bk, terms, src, tgt)):
                return False
    return True


def _eps_pair(lam1: Bidegree, lam2: Bidegree, a1, b1, b2, r1, s1, s2) -> RingElem:
    """The vertex unit attached to a pair of component degrees."""
    first = lam1 + a1.height(r1) - b1.height(s1)
    return unit_inverse(mu(first, b2.height(s2))) * mu(a1.height(r1), lam2)


def _components(m: CubeMap):
    return set(m.components) | set(m.degrees)


def induced_map(f1: CubeMap, f2: CubeMap, a1, b1, a2, b2) -> CubeMap:
    """``F^{r,s} = eps_{F1,F2}^{r,s} F1 (x) F2`` on the tensor products."""
    bk = a1.backend
    comps, degs = {}, {}
    for (r1, s1) in _components(f1):
        for (r2, s2) in _components(f2):
            l1, l2 = f1.degree(bk, r1, s1), f2.degree(bk, r2, s2)
            e = _eps_pair(l1, l2, a1, b1, b2, r1, s1, s2)
            x = bk.tensor(f1.get(bk, a1, b1, r1, s1), f2.get(bk, a2, b2, r2, s2))
            comps[(r1 + r2, s1 + s2)] = bk.scale(e, x)
            degs[(r1 + r2, s1 + s2)] = l1 + l2
    return CubeMap(comps, degs)


def induced_homotopy(h1: CubeMap, f2: CubeMap, g1: CubeMap, h2: CubeMap, a1, b1, a2, b2) -> CubeMap:
    """``H = eps_{H1,F2} H1 (x) F2 + (-1)^{|r1|} eps_{G1,H2} G1 (x) H2``."""
    bk = a1.backend
    comps: Dict = {}
    degs: Dict = {}

    def put(key, val, deg):
        if key in comps:
            comps[key] = bk.add(comps[key], val)
        else:
            comps[key] = val
            degs[key] = deg

    for (r1, s1) in _components(h1):
        for (r2, s2) in _components(f2):
            l1, l2 = h1.degree(bk, r1, s1), f2.degree(bk, r2, s2)
            e = _eps_pair(l1, l2, a1, b1, b2, r1, s1, s2)
            x = bk.tensor(h1.get(bk, a1, b1, r1, s1), f2.get(bk, a2, b2, r2, s2))
            put((r1 + r2, s1 + s2), bk.scale(e, x), l1 + l2)
    for (r1, s1) in _components(g1):
        for (r2, s2) in _components(h2):
            l1, l2 = g1.degree(bk, r1, s1), h2.degree(bk, r2, s2)
            e = _eps_pair(l1, l2, a1, b1, b2, r1, s1, s2)
            if sum(r1) % 2:
                e = -e
            x = bk.tensor(g1.get(bk, a1, b1, r1, s1), h2.get(bk, a2, b2, r2, s2))
            put((r1 + r2, s1 + s2), bk.scale(e, x), l1 + l2)
    return CubeMap(comps, degs)


# ---------------------------------------------------------------------------
# total complexes


@dataclass
class Complex:
    """Summands per homological degree and sparse differentials.

    ``d[t][(i, j)]`` maps summand ``j`` of degree ``t`` to summand ``i`` of
    degree ``t + 1``.
    """

    backend: object
    objects: Dict[int, List[object]]
    d: Dict[int, Dict[Tuple[int, int], object]] = field(default_factory=dict)

    def degrees(self) -> List[int]:
        return sorted(t for t, objs in self.objects.items() if objs)

    def entry(self, t: int, i: int, j: int):
        return self.d.get(t, {}).get((i, j))

    def size(self) -> int:
        return sum(len(v) for v in self.objects.values())


def totalize(h: HypercubicComplex) -> Complex:
    """Direct sums over ``|r| = t``; module vertices are split into rank-one summands."""
    if isinstance(h.backend, ModuleBackend):
        return _totalize_modules(h)
    objects: Dict[int, List] = {}
    index: Dict[Vertex, Tuple[int, int]] = {}
    for v in sorted(vertices(h.n), key=lambda v: (sum(v), v)):
        t = sum(v) + h.toff
        objects.setdefault(t, []).append(h.objects[v])
        index[v] = (t, len(objects[t]) - 1)
    d: Dict[int, Dict] = {}
    for (v, i), f in h.edges.items():
        if h.backend.is_zero(f):
            continue
        t, j = index[v]
        _, k = index[bump(v, i)]
        d.setdefault(t, {})[(k, j)] = f
    return Complex(h.backend, objects, d)


def _totalize_modules(h: HypercubicComplex) -> Complex:
    objects: Dict[int, List[int]] = {}
    index: Dict[Tuple[Vertex, int], Tuple[int, int]] = {}
    for v in sorted(vertices(h.n), key=lambda v: (sum(v), v)):
        t = sum(v) + h.toff
        mod = h.objects[v]
        objects.setdefault(t, [])
        for g in range(mod.rank):
            objects[t].append(mod.qdeg(g))
            index[(v, g)] = (t, len(objects[t]) - 1)
    d: Dict[int, Dict] = {}
    for (v, i), f in h.edges.items():
        w = bump(v, i)
        for (a, b), val in f.entries.items():
            t, col = index[(v, b)]
            _, row = index[(w, a)]
            cell = d.setdefault(t, {})
            cell[(row, col)] = cell.get((row, col), ZERO) + val
    for t in d:
        d[t] = {k: v for k, v in d[t].items() if v}
    return Complex(ScalarBackend(), objects, d)


def d_squared_zero(c: Complex, equal=None, zero_test=None) -> bool:
    bk = c.backend
    for t in c.degrees():
        d0, d1 = c.d.get(t, {}), c.d.get(t + 1, {})
        acc: Dict[Tuple[int, int], List] = {}
        for (i, j), f in d0.items():
            for (k, i2), g in d1.items():
                if i2 == i:
                    acc.setdefault((k, j), []).append(bk.compose(g, f))
        for key, terms in acc.items():
            total = terms[0]
            for x in terms[1:]:
                total = bk.add(total, x)
            if not (zero_test or bk.is_zero)(total):
                return False
    return True


# ---------------------------------------------------------------------------
# Gaussian elimination


@dataclass
class Elimination:
    complex: Complex
    pivot: Tuple[int, int, int]


def gaussian_eliminate(c: Complex, t: int, i: int, j: int) -> Elimination:
    """Cancel the unit entry from summand ``j`` of degree ``t`` to summand ``i`` of ``t + 1``."""
    bk = c.backend
    a = c.entry(t, i, j)
    src, tgt = c.objects[t][j], c.objects[t + 1][i]
    if a is None or not bk.is_unit(a, src, tgt):
        raise NotAUnit(f"entry {(t, i, j)} is not a unit")
    ainv = bk.inverse(a)
    dt = c.d.get(t, {})
    col_j = {r: f for (r, cc), f in dt.items() if cc == j and r != i}
    row_i = {cc: f for (r, cc), f in dt.items() if r == i and cc != j}
    new_dt: Dict[Tuple[int, int], object] = {k: v for k, v in dt.items() if k[0] != i and k[1] != j}
    for r, f in col_j.items():
        fa = bk.compose(f, ainv)
        for cc, g in row_i.items():
            corr = bk.scale(-ONE, bk.compose(fa, g))
            cur = new_dt.get((r, cc))
            val = corr if cur is None else bk.add(cur, corr)
            new_dt[(r, cc)] = val
    new_dt = {k: v for k, v in new_dt.items() if not bk.is_zero(v)}

    def shift(idx, gone):
        return idx - (1 if idx > gone else 0)

    d = {}
    for s, ds in c.d.items():
        if s == t:
            d[s] = {(shift(r, i), shift(cc, j)): v for (r, cc), v in new_dt.items()}
        elif s == t - 1:
            d[s] = {(shift(r, j), cc): v for (r, cc), v in ds.items() if r != j}
        elif s == t + 1:
            d[s] = {(r, shift(cc, i)): v for (r, cc), v in ds.items() if cc != i}
        else:
            d[s] = dict(ds)
    objects = {s: list(o) for s, o in c.objects.items()}
    del objects[t][j]
    del objects[t + 1][i]
    return Elimination(Complex(bk, objects, d), (t, i, j))


def find_pivot(c: Complex) -> Optional[Tuple[int, int, int]]:
    bk = c.backend
    for t in sorted(c.d):
        for (i, j) in sorted(c.d[t]):
            if bk.is_unit(c.d[t][(i, j)], c.objects[t][j], c.objects[t + 1][i]):
                return (t, i, j)
    return None


def eliminate_all(c: Complex) -> Complex:
    while True:
        p = find_pivot(c)
        if p is None:
            return c
        c = gaussian_eliminate(c, *p).complex


# ---------------------------------------------------------------------------
# integral homology


@dataclass(frozen=True)
class BigradedHomology:
    """Free rank and torsion orders per ``(t, q)``."""

    groups: Dict[Tuple[int, int], Tuple[int, Tuple[int, ...]]]

    def __post_init__(self):
        object.__setattr__(
            self, "groups", {k: (r, tuple(sorted(tor))) for k, (r, tor) in self.groups.items() if r or tor}
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, BigradedHomology) and self.groups == other.groups

    def __hash__(self):
        return hash(frozenset(self.groups.items()))

    def mod2(self) -> Dict[Tuple[int, int], int]:
        """Dimensions over F2 by universal coefficients (differentials raise t)."""
        out: Dict[Tuple[int, int], int] = {}
        keys = set(self.groups) | {(t - 1, q) for (t, q) in self.groups}
        for (t, q) in keys:
            r, tor = self.groups.get((t, q), (0, ()))
            _, tor_next = self.groups.get((t + 1, q), (0, ()))
            n = r + sum(1 for x in tor if x % 2 == 0) + sum(1 for x in tor_next if x % 2 == 0)
            if n:
                out[(t, q)] = n
        return out

    def poincare(self):
        from .ring import LaurentPoly

        return LaurentPoly({(q, t): r for (t, q), (r, _) in self.groups.items() if r})

    def euler(self):
        """Graded Euler characteristic in q: ``sum (-1)^t rank q^q``."""
        from .ring import LaurentPoly

        acc: Dict[Tuple[int, int], int] = {}
        for (t, q), (r, _) in self.groups.items():
            acc[(q, 0)] = acc.get((q, 0), 0) + (-1) ** (t % 2) * r
        return LaurentPoly(acc)

    def to_json(self) -> List[Dict]:
        return [
            {"t": t, "q": q, "rank": r, "torsion": list(tor)}
            for (t, q), (r, tor) in sorted(self.groups.items())
        ]

    @classmethod
    def from_json(cls, data) -> "BigradedHomology":
        return cls({(e["t"], e["q"]): (e["rank"], tuple(e["torsion"])) for e in data})


def smith_diagonal(rows: List[List[int]]) -> List[int]:
    """Nonzero invariant factors of an integer matrix (hand-rolled Smith form)."""
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    diag = []
    top = 0
    while top < m and top < n:
        nz = [(abs(a[i][j]), i, j) for i in range(top, m) for j in range(top, n) if a[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        a[top], a[pi] = a[pi], a[top]
        for row in a:
            row[top], row[pj] = row[pj], row[top]
        while True:
            p = a[top][top]
            done = True
            for i in range(top + 1, m):
                if a[i][top]:
                    q = a[i][top] // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[top])]
                    if a[i][top]:
                        done = False
            for j in range(top + 1, n):
                if a[top][j]:
                    q = a[top][j] // p
                    for row in a:
                        row[j] -= q * row[top]
                    if a[top][j]:
                        done = False
            if done:
                bad = next(((i, j) for i in range(top + 1, m) for j in range(top + 1, n) if a[i][j] % p), None)
                if bad is None:
                    break
                a[top] = [x + y for x, y in zip(a[top], a[bad[0]])]
                continue
            nz = [(abs(a[i][top]), i, top) for i in range(top, m) if a[i][top]]
            nz += [(abs(a[top][j]), top, j) for j in range(top, n) if a[top][j]]
            _, pi, pj = min(nz)
            a[top], a[pi] = a[pi], a[top]
            for row in a:
                row[top], row[pj] = row[pj], row[top]
        diag.append(abs(a[top][top]))
        top += 1
    return diag


def specialize_complex(c: Complex, s: Specialization) -> Dict[int, Dict[Tuple[int, int], int]]:
    return {t: {k: v.specialize(s) for k, v in dt.items() if v.specialize(s)} for t, dt in c.d.items()}


def smith_homology(c: Complex, s: Specialization) -> BigradedHomology:
    """Homology over Z of a rank-one-summand complex over k after specialization."""
    if not isinstance(c.backend, ScalarBackend):
        raise WeightMismatch("smith_homology needs a complex of free k-modules")
    dz = specialize_complex(c, s)
    factors: Dict[Tuple[int, int], List[int]] = {}
    for t, entries in dz.items():
        blocks: Dict[int, Tuple[List[int], List[int]]] = {}
        for q in set(c.objects.get(t, [])):
            cols = [j for j, qq in enumerate(c.objects[t]) if qq == q]
            rows = [i for i, qq in enumerate(c.objects.get(t + 1, [])) if qq == q]
            blocks[q] = (rows, cols)
        for (i, j) in entries:
            if c.objects[t + 1][i] != c.objects[t][j]:
                raise WeightMismatch("differential does not preserve q-degree")
        for q, (rows, cols) in blocks.items():
            if not rows or not cols:
                continue
            ri = {r: k for k, r in enumerate(rows)}
            ci = {cc: k for k, cc in enumerate(cols)}
            mat = [[0] * len(cols) for _ in rows]
            for (i, j), v in entries.items():
                if i in ri and j in ci:
                    mat[ri[i]][ci[j]] = v
            factors[(t, q)] = smith_diagonal(mat)
    groups = {}
    for t, objs in c.objects.items():
        for q in set(objs):
            dim = sum(1 for x in objs if x == q)
            out_rank = len(factors.get((t, q), []))
            inc = factors.get((t - 1, q), [])
            groups[(t, q)] = (dim - out_rank - len(inc), tuple(x for x in inc if x > 1))
    return BigradedHomology(groups)


def chain_euler(c: Complex):
    """``sum (-1)^t q^deg`` over the summands of a rank-one complex."""
    from .ring import LaurentPoly

    acc: Dict[Tuple[int, int], int] = {}
    for t, objs in c.objects.items():
        for q in objs:
            acc[(q, 0)] = acc.get((q, 0), 0) + (-1) ** (t % 2)
    return LaurentPoly(acc)


def complex_to_json(c: Complex) -> Dict:
    return {
        "objects": {str(t): [str(o) for o in objs] for t, objs in sorted(c.objects.items())},
        "differentials": {
            str(t): [{"row": i, "col": j, "value": str(v)} for (i, j), v in sorted(dt.items())]
            for t, dt in sorted(c.d.items()) if dt
        },
    }


# ---------------------------------------------------------------------------
# random instances over the module backend


def _random_unit(rng) -> RingElem:
    return RingElem.monomial(rng.randrange(2), rng.randrange(2), rng.randint(-2, 2), rng.choice((1, -1)))


def _random_elem(rng) -> RingElem:
    out = ZERO
    for _ in range(rng.randint(0, 2)):
        out = out + _random_unit(rng)
    return out


def _random_deg(rng, lo: int = -1, hi: int = 1) -> Bidegree:
    return Bidegree(rng.randint(lo, hi), rng.randint(lo, hi))


def _homogeneous(rng, src: FreeModule, tgt: FreeModule, deg: Bidegree) -> Mat:
    entries = {}
    for i, gi in enumerate(tgt.degrees):
        for j, gj in enumerate(src.degrees):
            if gi == gj + deg:
                entries[(i, j)] = _random_elem(rng)
    return Mat(src, tgt, entries, deg)


def random_one_cube(rng, backend: Optional[ModuleBackend] = None, max_rank: int = 2) -> HypercubicComplex:
    """``A0 -> A1`` with a homogeneous matrix of random degree."""
    bk = backend or ModuleBackend()
    psi = _random_deg(rng)
    src = FreeModule(tuple(_random_deg(rng) for _ in range(rng.randint(1, max_rank))))
    tgt_deg = [rng.choice(src.degrees) + psi for _ in range(rng.randint(1, max_rank))]
    tgt = FreeModule(tuple(tgt_deg))
    return one_cube(bk, src, tgt, _homogeneous(rng, src, tgt, psi), psi)


def random_cube(rng, n: int, backend: Optional[ModuleBackend] = None, max_rank: int = 2) -> HypercubicComplex:
    bk = backend or ModuleBackend()
    out = point_cube(bk, FreeModule((ZERO_DEG,)))
    for _ in range(n):
        out = tensor(out, random_one_cube(rng, bk, max_rank))
    return out


def _shift(m: FreeModule, lam: Bidegree) -> FreeModule:
    return FreeModule(tuple(g + lam for g in m.degrees), m.qshift)


def _unit_perm(rng, src: FreeModule, lam: Bidegree) -> Tuple[Mat, Mat, FreeModule]:
    """A monomial unit matrix ``src -> tgt`` of degree ``lam`` with its inverse."""
    perm = list(range(src.rank))
    rng.shuffle(perm)
    tgt_deg = [None] * src.rank
    for j, i in enumerate(perm):
        tgt_deg[i] = src.degrees[j] + lam
    tgt = FreeModule(tuple(tgt_deg), src.qshift)
    units = [_random_unit(rng) for _ in perm]
    f = Mat(src, tgt, {(i, j): units[j] for j, i in enumerate(perm)}, lam)
    g = Mat(tgt, src, {(j, i): unit_inverse(units[j]) for j, i in enumerate(perm)}, -lam)
    return f, g, tgt


def random_chain_map(rng, a: HypercubicComplex) -> Tuple[HypercubicComplex, CubeMap]:
    """A target 1-cube ``B`` and a chain map ``A -> B`` of random degree."""
    bk = a.backend
    lam = _random_deg(rng)
    f0, f0inv, b0 = _unit_perm(rng, a.objects[(0,)], lam)
    f1, _, b1 = _unit_perm(rng, a.objects[(1,)], lam)
    beta = bk.compose(f1, bk.compose(a.edges[((0,), 0)], f0inv))
    beta = Mat(beta.src, beta.tgt, beta.entries, a.psi[0])
    b = one_cube(bk, b0, b1, beta, a.psi[0], a.toff)
    fmap = CubeMap({((0,), (0,)): f0, ((1,), (1,)): f1}, {((0,), (0,)): lam, ((1,), (1,)): lam})
    return b, fmap


def random_homotopy(rng, a: HypercubicComplex, b: HypercubicComplex, f: CubeMap) -> Tuple[CubeMap, CubeMap]:
    """A map ``H`` and the chain map ``G = F - (H alpha + beta H)`` it connects to ``F``."""
    bk = a.backend
    lam = f.degrees[((0,), (0,))]
    hdeg = lam - a.psi[0]
    h = _homogeneous(rng, a.objects[(1,)], b.objects[(0,)], hdeg)
    alpha, beta = a.edges[((0,), 0)], b.edges[((0,), 0)]
    g0 = bk.add(f.components[((0,), (0,))], bk.scale(-ONE, bk.compose(h, alpha)))
    g1 = bk.add(f.components[((1,), (1,))], bk.scale(-ONE, bk.compose(beta, h)))
    g0 = Mat(g0.src, g0.tgt, g0.entries, lam)
    g1 = Mat(g1.src, g1.tgt, g1.entries, lam)
    hmap = CubeMap({((1,), (0,)): h}, {((1,), (0,)): hdeg})
    gmap = CubeMap({((0,), (0,)): g0, ((1,), (1,)): g1}, {((0,), (0,)): lam, ((1,), (1,)): lam})
    return hmap, gmap
