"""From sliced tangle diagrams to covering Khovanov homology.

A diagram is a list of slices read bottom to top: ``cup<i>``, ``cap<i>``,
``x+<i>`` and ``x-<i>``, where ``i`` is the 1-based position of the left
strand involved.  Cups may carry an orientation mark, ``cup<i>u`` (left new
strand points up) or ``cup<i>d``.  An optional ``bottom u d ...`` line fixes
the orientation of strands entering from below.

Every slice becomes a web between antidominant weights, so the whole
diagram at each cube vertex is one word over the weight
``(1,..,1, 2,..,2)`` of the running width.  ``x+`` crossings contribute
``[parallel -> ladder]`` through a zip, ``x-`` crossings
``[ladder -> parallel]`` through an unzip; the sign of a crossing only
enters the global renormalization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .complexes import (
    Complex,
    FoamBackend,
    FoamMorphism,
    FoamObject,
    FreeModule,
    HypercubicComplex,
    Mat,
    ModuleBackend,
    ScalarBackend,
    BigradedHomology,
    anticommutation_failures,
    bump,
    chain_euler,
    eliminate_all,
    one_cube,
    point_cube,
    smith_homology,
    tensor,
    totalize,
    vertices,
)
from .errors import (
    IncompatibleCochain,
    NotAntidominant,
    NotClosed,
    OrientationError,
    ParseError,
    WidthError,
)
from .foams import FoamDiagram, Slice
from .ring import ONE, ZERO, ZERO_DEG, Bidegree, LaurentPoly, RingElem, Specialization, unit_inverse
from .rewriter import hom_basis_data
from .webs import Web, antidominant_cupcap, colours, identity, is_antidominant

# Per-vertex (t, q) shift of the 0- and 1-resolution of every crossing.
# The differential has q-degree 1 and shifts raise degrees, so the target
# shift is one less than the source shift.
CROSSING_SHIFTS: Dict[str, Tuple[Tuple[int, int], Tuple[int, int]]] = {
    "+": ((-1, 1), (0, 0)),
    "-": ((-1, 1), (0, 0)),
}
# Global shift q^(a N+ + b N-) t^(N+); selected by the kink tests.
RENORM_Q = (-2, 1)


def renorm_shift(n_plus: int, n_minus: int) -> Tuple[int, int]:
    """``(dt, dq)`` applied after assembly."""
    return n_plus, RENORM_Q[0] * n_plus + RENORM_Q[1] * n_minus


# ---------------------------------------------------------------------------
# sliced tangles


@dataclass(frozen=True)
class TangleSlice:
    kind: str  # "cup", "cap", "x+", "x-"
    pos: int  # 1-based left strand
    mark: Optional[str] = None  # cup orientation mark

    @property
    def is_crossing(self) -> bool:
        return self.kind in ("x+", "x-")

    def __str__(self) -> str:
        return f"{self.kind}{self.pos}{self.mark or ''}"


@dataclass(frozen=True)
class SlicedTangle:
    slices: Tuple[TangleSlice, ...]
    widths: Tuple[int, ...]
    orientations: Tuple[Tuple[int, ...], ...]  # strand orientations below each slice, then the top
    signs: Tuple[int, ...]  # one per crossing, in slice order
    bottom_marks: Tuple[int, ...] = ()

    @property
    def closed(self) -> bool:
        return self.widths[0] == 0 and self.widths[-1] == 0

    @property
    def n_plus(self) -> int:
        return sum(1 for s in self.signs if s > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for s in self.signs if s < 0)

    @property
    def crossings(self) -> List[int]:
        """Slice indices of the crossings."""
        return [k for k, s in enumerate(self.slices) if s.is_crossing]

    @property
    def d(self) -> int:
        return max(self.widths) if self.widths else 0

    def boundary(self, k: int) -> Tuple[int, ...]:
        """Antidominant weight below slice ``k``."""
        w = self.widths[k]
        return (1,) * w + (2,) * ((self.d - w) // 2)

    def text(self) -> str:
        lines = []
        if self.bottom_marks:
            lines.append("bottom " + " ".join("u" if o > 0 else "d" for o in self.bottom_marks))
        lines += [str(s) for s in self.slices]
        return "\n".join(lines)


_SLICE_TOKEN = re.compile(r"^(cup|cap|x\+|x-)(\d+)([ud]?)$")


class _ParityUF:
    """Union-find tracking relative orientation parity."""

    def __init__(self):
        self.parent: Dict[int, int] = {}
        self.rel: Dict[int, int] = {}

    def add(self, n: int) -> None:
        self.parent[n] = n
        self.rel[n] = 0

    def find(self, n: int) -> Tuple[int, int]:
        p = 0
        path = []
        while self.parent[n] != n:
            path.append(n)
            p ^= self.rel[n]
            n = self.parent[n]
        root, acc = n, p
        for m in path:  # path compression
            nxt = self.rel[m]
            self.parent[m], self.rel[m] = root, acc
            acc ^= nxt
        return root, p

    def union(self, a: int, b: int, parity: int) -> bool:
        """Impose ``o(a) = o(b) (-1)^parity``; False on contradiction."""
        ra, pa = self.find(a)
        rb, pb = self.find(b)
        if ra == rb:
            return (pa ^ pb) == parity
        self.parent[ra] = rb
        self.rel[ra] = pa ^ pb ^ parity
        return True


def _tokens(text: str) -> Tuple[List[str], List[str]]:
    bottom: List[str] = []
    toks: List[str] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("bottom"):
            bottom = line.split()[1:]
            continue
        toks += [t.strip() for t in line.split(";") if t.strip()]
    return toks, bottom


def parse_sliced(text: str) -> SlicedTangle:
    toks, bottom = _tokens(text)
    slices = []
    for tok in toks:
        m = _SLICE_TOKEN.match(tok)
        if not m:
            raise ParseError(f"bad slice {tok!r}")
        kind, pos, mark = m.group(1), int(m.group(2)), m.group(3) or None
        if mark and kind != "cup":
            raise ParseError(f"only cups take an orientation mark: {tok!r}")
        if pos < 1:
            raise WidthError(f"{tok}: positions start at 1")
        slices.append(TangleSlice(kind, pos, mark))
    if any(b not in ("u", "d") for b in bottom):
        raise ParseError(f"bottom marks must be u or d: {bottom}")
    return build_tangle(slices, tuple(1 if b == "u" else -1 for b in bottom))


def build_tangle(slices: Sequence[TangleSlice], bottom: Sequence[int] = ()) -> SlicedTangle:
    """Validate widths and infer orientations component by component."""
    uf = _ParityUF()
    fresh = iter(range(10 ** 9))
    width = len(bottom)
    strands: List[Tuple[int, int]] = []
    constraints: List[Tuple[int, int, int]] = []  # (node, parity, orientation)
    defaults: List[Tuple[int, int]] = []
    for o in bottom:
        n = next(fresh)
        uf.add(n)
        strands.append((n, 0))
        constraints.append((n, 0, o))
    widths = [width]
    history: List[List[Tuple[int, int]]] = []
    for s in slices:
        history.append(list(strands))
        i = s.pos - 1
        if s.kind == "cup":
            if i > width:
                raise WidthError(f"{s}: width is {width}")
            n = next(fresh)
            uf.add(n)
            strands[i:i] = [(n, 0), (n, 1)]
            defaults.append((n, 0))
            if s.mark:
                constraints.append((n, 0, 1 if s.mark == "u" else -1))
            width += 2
        elif s.kind == "cap":
            if i + 1 >= width:
                raise WidthError(f"{s}: width is {width}")
            (na, pa), (nb, pb) = strands[i], strands[i + 1]
            if not uf.union(na, nb, pa ^ pb ^ 1):
                raise OrientationError(f"{s}: cap joins strands with equal orientation")
            del strands[i:i + 2]
            width -= 2
        else:
            if i + 1 >= width:
                raise WidthError(f"{s}: width is {width}")
            strands[i], strands[i + 1] = strands[i + 1], strands[i]
        widths.append(width)
    history.append(list(strands))

    value: Dict[int, int] = {}
    for n, p, o in constraints:
        root, pr = uf.find(n)
        want = o * (-1) ** (p ^ pr)
        if value.setdefault(root, want) != want:
            raise OrientationError("orientation marks contradict each other on one component")
    for n, p in defaults:
        root, pr = uf.find(n)
        value.setdefault(root, (-1) ** (p ^ pr))
    for n, p in [(x[0], x[1]) for x in history[0]]:
        root, pr = uf.find(n)
        value.setdefault(root, (-1) ** (p ^ pr))

    def orient(strand):
        root, pr = uf.find(strand[0])
        if root not in value:
            value[root] = (-1) ** (strand[1] ^ pr)
        return value[root] * (-1) ** (strand[1] ^ pr)

    orientations = tuple(tuple(orient(x) for x in h) for h in history)
    signs = []
    for k, s in enumerate(slices):
        if s.is_crossing:
            i = s.pos - 1
            oa, ob = orientations[k][i], orientations[k][i + 1]
            signs.append((1 if s.kind == "x+" else -1) * oa * ob)
    return SlicedTangle(tuple(slices), tuple(widths), orientations, tuple(signs), tuple(bottom))


# ---------------------------------------------------------------------------
# webs of slices


def slice_web(s: TangleSlice, boundary: Sequence[int]):
    """The web of a slice; crossings give ``(parallel, ladder)``."""
    b = tuple(boundary)
    if not is_antidominant(b):
        raise NotAntidominant(f"{b} is not antidominant")
    if s.kind == "cup":
        return antidominant_cupcap(b, s.pos - 1, "cup")
    if s.kind == "cap":
        return antidominant_cupcap(b, s.pos - 1, "cap")
    c = colours(b)[s.pos - 1]
    if b[s.pos - 1:s.pos + 1] != (1, 1):
        raise WidthError(f"{s}: no two thin strands at {s.pos}")
    return identity(b), Web(b, (("m", c), ("s", c)))


def resolution_webs(d: SlicedTangle, k: int) -> Tuple[Web, Web]:
    """``(0-resolution, 1-resolution)`` webs of the crossing at slice ``k``."""
    s = d.slices[k]
    par, lad = slice_web(s, d.boundary(k))
    return (par, lad) if s.kind == "x+" else (lad, par)


def crossing_complex(d: SlicedTangle, k: int, backend: FoamBackend) -> HypercubicComplex:
    """One-dimensional cube of the crossing at slice ``k`` with its shifts."""
    s = d.slices[k]
    w0, w1 = resolution_webs(d, k)
    (t0, q0), (t1, q1) = CROSSING_SHIFTS["+" if s.kind == "x+" else "-"]
    if t1 != t0 + 1:
        raise IncompatibleCochain("crossing shifts must differ by one in t")
    c = colours(d.boundary(k))[s.pos - 1]
    kind = "cupA" if s.kind == "x+" else "capB"
    src, tgt = FoamObject(w0, q0), FoamObject(w1, q1)
    f = backend.morphism(src, tgt, (Slice(kind, c, 0),))
    if f.degree.qdeg != q0 - q1:
        raise IncompatibleCochain("crossing differential is not degree preserving")
    return one_cube(backend, src, tgt, f, f.degree, t0)


def slice_cube(d: SlicedTangle, k: int, backend: FoamBackend) -> HypercubicComplex:
    s = d.slices[k]
    if s.is_crossing:
        return crossing_complex(d, k, backend)
    return point_cube(backend, FoamObject(slice_web(s, d.boundary(k)), 0))


def assemble(d: SlicedTangle, backend: Optional[FoamBackend] = None) -> HypercubicComplex:
    """Horizontal composition of the slice cubes with the graded Koszul rule."""
    backend = backend or FoamBackend()
    out = point_cube(backend, FoamObject(identity(d.boundary(0)), 0))
    for k in range(len(d.slices)):
        out = tensor(out, slice_cube(d, k, backend), check=False)
    bad = anticommutation_failures(out)
    if bad:
        raise IncompatibleCochain(f"assembled cube fails to anti-commute at {bad[:3]}")
    return out


def renormalize(h: HypercubicComplex, d: SlicedTangle) -> HypercubicComplex:
    dt, dq = renorm_shift(d.n_plus, d.n_minus)
    return shift_cube(h, dt, dq)


def shift_cube(h: HypercubicComplex, dt: int, dq: int) -> HypercubicComplex:
    bk = h.backend
    objects = {v: bk.shift_obj(o, dq) for v, o in h.objects.items()}
    edges = {}
    for (v, i), f in h.edges.items():
        edges[(v, i)] = _retarget(f, objects[v], objects[bump(v, i)])
    return HypercubicComplex(bk, h.n, objects, edges, h.psi, h.toff + dt)


def _retarget(f, src, tgt):
    if isinstance(f, FoamMorphism):
        return FoamMorphism(src, tgt, f.terms, f.degree)
    return Mat(src, tgt, f.entries, f.degree)


def permute_cube(h: HypercubicComplex, order: Sequence[int]) -> HypercubicComplex:
    """Relabel directions: new direction ``j`` is old direction ``order[j]``."""
    order = list(order)
    if sorted(order) != list(range(h.n)):
        raise ParseError(f"{order} is not a permutation of 0..{h.n - 1}")

    def old(v):
        out = [0] * h.n
        for j, o in enumerate(order):
            out[o] = v[j]
        return tuple(out)

    objects = {v: h.objects[old(v)] for v in vertices(h.n)}
    edges = {(v, j): h.edges[(old(v), order[j])] for v in vertices(h.n) for j in range(h.n) if v[j] == 0}
    return HypercubicComplex(h.backend, h.n, objects, edges, tuple(h.psi[o] for o in order), h.toff)


# ---------------------------------------------------------------------------
# the representable functor


def _require_closed(web: Web) -> None:
    if any(v == 1 for v in web.source) or any(v == 1 for v in web.target):
        raise NotClosed(f"web {web} has thin boundary")


def module_of(obj: FoamObject) -> FreeModule:
    web = obj.web
    _require_closed(web)
    hb = hom_basis_data(identity(web.source), web)
    return FreeModule(tuple(hb.reps[k].degree for k in hb.keys), obj.q)


def matrix_of(f: FoamMorphism, strategy=None) -> Mat:
    """Matrix of ``Hom(empty, f)`` in the cup-foam bases."""
    src_web, tgt_web = f.src.web, f.tgt.web
    _require_closed(src_web)
    _require_closed(tgt_web)
    empty = identity(src_web.source)
    hs = hom_basis_data(empty, src_web)
    ht = hom_basis_data(empty, tgt_web)
    col_index = {k: j for j, k in enumerate(ht.keys)}
    entries: Dict[Tuple[int, int], RingElem] = {}
    for j, key in enumerate(hs.keys):
        base = hs.reps[key]
        terms = [(c, FoamDiagram(empty, base.slices + sl)) for c, sl in f.terms]
        for k, v in ht.coordinates(terms, strategy).items():
            entries[(col_index[k], j)] = v
    return Mat(module_of(f.src), module_of(f.tgt), entries, f.degree)


def a_gl2(h, strategy=None):
    """Apply ``Hom(empty, -)`` to a foam hypercube or a foam complex."""
    if isinstance(h, HypercubicComplex):
        objects = {v: module_of(o) for v, o in h.objects.items()}
        edges = {(v, i): matrix_of(f, strategy) for (v, i), f in h.edges.items()}
        return HypercubicComplex(ModuleBackend(), h.n, objects, edges, h.psi, h.toff)
    return _a_gl2_complex(h, strategy)


def _a_gl2_complex(c: Complex, strategy=None) -> Complex:
    """Rank-one summands over k for a complex of closed webs."""
    objects: Dict[int, List[int]] = {}
    index: Dict[Tuple[int, int], List[int]] = {}
    mods: Dict[Tuple[int, int], FreeModule] = {}
    for t, objs in c.objects.items():
        objects[t] = []
        for j, o in enumerate(objs):
            m = module_of(o)
            mods[(t, j)] = m
            index[(t, j)] = []
            for g in range(m.rank):
                index[(t, j)].append(len(objects[t]))
                objects[t].append(m.qdeg(g))
    d: Dict[int, Dict[Tuple[int, int], RingElem]] = {}
    for t, dt in c.d.items():
        cell: Dict[Tuple[int, int], RingElem] = {}
        for (i, j), f in dt.items():
            mat = matrix_of(f, strategy)
            for (a, b), v in mat.entries.items():
                key = (index[(t + 1, i)][a], index[(t, j)][b])
                cell[key] = cell.get(key, ZERO) + v
        d[t] = {k: v for k, v in cell.items() if v}
    return Complex(ScalarBackend(), objects, d)


# ---------------------------------------------------------------------------
# delooping


def find_circle(web: Web) -> Optional[Tuple[int, int]]:
    """Positions ``(i, j)`` of ``s_c ... m_c`` with only far letters between."""
    w = web.word
    for i, (k, c) in enumerate(w):
        if k != "s":
            continue
        for j in range(i + 1, len(w)):
            k2, c2 = w[j]
            if c2 == c and k2 == "m":
                return i, j
            if abs(c2 - c) < 2:
                break
    return None


_DELOOP_CACHE: Dict[Tuple, Tuple] = {}


def deloop_maps(web: Web, backend: FoamBackend):
    """Cached form of :func:`_deloop_maps`; the maps depend only on the web and rule table."""
    from .rules import active_table

    key = (web, active_table().source)
    if key not in _DELOOP_CACHE:
        _DELOOP_CACHE[key] = _deloop_maps(web, backend)
    return _DELOOP_CACHE[key]


def _deloop_maps(web: Web, backend: FoamBackend):
    """Inclusions and projections through the circle-free web.

    Returns ``(smaller web, [(q offset, iota, pi)])`` with ``pi_a o iota_b``
    equal to ``delta_ab`` and ``sum iota_a o pi_a`` the identity.
    """
    from .errors import NoCircle

    found = find_circle(web)
    if found is None:
        raise NoCircle(f"web {web} has no removable circle")
    i, j = found
    c = web.word[i][1]
    between = web.word[i + 1:j]
    small = Web(web.source, web.word[:i] + between + web.word[j + 1:])
    moves = tuple(Slice("x", c, i + 1 + n, between[n][1]) for n in range(len(between)))
    plain = (Slice("cupB", c, i),) + moves
    dotted = (Slice("cupB", c, i), Slice("dot", c, i + 1)) + moves
    big_obj, small_obj = FoamObject(web, 0), FoamObject(small, 0)
    iotas = [backend.morphism(small_obj, big_obj, plain), backend.morphism(small_obj, big_obj, dotted)]
    pis = []
    for io in iotas:
        dg = FoamDiagram(small, io.terms[0][1])
        from .foams import mirror

        mi = mirror(dg)
        pis.append(backend.morphism(big_obj, small_obj, mi.slices))
    gram = [[backend._identity_multiple(backend.compose(p, io)) for io in iotas] for p in pis]
    for row in gram:
        for v in row:
            if v is None:
                raise NoCircle("circle structure maps do not pair to scalars")
    from .rewriter import _solve_unit

    eye = [[ONE, ZERO], [ZERO, ONE]]
    inv = _solve_unit([[v for v in row] for row in gram], eye)
    proj = []
    for a in range(2):
        acc = backend.zero(big_obj, small_obj)
        for b in range(2):
            if inv[a][b]:
                acc = backend.add(acc, backend.scale(inv[a][b], pis[b]))
        proj.append(FoamMorphism(big_obj, small_obj, acc.terms, pis[a].degree))
    recomposed = backend.add(backend.compose(iotas[0], proj[0]), backend.compose(iotas[1], proj[1]))
    if not backend.equal(recomposed, backend.identity(big_obj)):
        raise NoCircle("circle structure maps do not recompose to the identity")
    out = []
    for a in range(2):
        qoff = iotas[a].degree.qdeg
        out.append((qoff, iotas[a], proj[a]))
    return small, out


def deloop(c: Complex, t: int, idx: int) -> Complex:
    """Replace summand ``idx`` of degree ``t`` by two copies of its circle-free web."""
    bk = c.backend
    obj = c.objects[t][idx]
    small, parts = deloop_maps(obj.web, bk)
    new_objs = [FoamObject(small, obj.q + qoff) for qoff, _, _ in parts]
    objects = {s: list(o) for s, o in c.objects.items()}
    objects[t] = objects[t][:idx] + new_objs + objects[t][idx + 1:]

    def remap(i):
        return i if i < idx else i + 1

    d = {}
    for s, ds in c.d.items():
        cell = {}
        for (r, col), f in ds.items():
            if s == t and col == idx:
                for a, (_, io, _) in enumerate(parts):
                    g = bk.compose(f, _rebase(io, new_objs[a], obj))
                    if not bk.is_zero(g):
                        cell[(r, idx + a)] = g
            elif s == t - 1 and r == idx:
                for a, (_, _, pi) in enumerate(parts):
                    g = bk.compose(_rebase(pi, obj, new_objs[a]), f)
                    if not bk.is_zero(g):
                        cell[(idx + a, col)] = g
            else:
                rr = remap(r) if s == t - 1 else r
                cc = remap(col) if s == t else col
                cell[(rr, cc)] = f
        d[s] = cell
    return Complex(bk, objects, d)


def _rebase(f: FoamMorphism, src: FoamObject, tgt: FoamObject) -> FoamMorphism:
    return FoamMorphism(src, tgt, f.terms, f.degree)


def deloop_all(c: Complex) -> Complex:
    while True:
        hit = next(((t, j) for t in sorted(c.objects) for j, o in enumerate(c.objects[t])
                    if find_circle(o.web) is not None), None)
        if hit is None:
            return c
        c = deloop(c, *hit)


def simplify_foam(c: Complex) -> Complex:
    """Deloop every circle, then cancel unit entries, to a fixpoint."""
    return eliminate_all(deloop_all(c))


# ---------------------------------------------------------------------------
# top level


@dataclass
class KhResult:
    tangle: SlicedTangle
    cube: HypercubicComplex  # renormalized, over foams
    module_cube: Optional[HypercubicComplex] = None
    complex: Optional[Complex] = None
    homology: Dict[str, BigradedHomology] = field(default_factory=dict)


def build_cube(d: SlicedTangle, order: Optional[Sequence[int]] = None) -> HypercubicComplex:
    h = renormalize(assemble(d), d)
    if order is not None:
        h = permute_cube(h, order)
    return h


def module_complex(d: SlicedTangle, order: Optional[Sequence[int]] = None) -> Tuple[HypercubicComplex, Complex]:
    """``A_gl2`` of the renormalized cube and its total complex over k."""
    if not d.closed:
        raise NotClosed("the module route needs a link diagram")
    mc = a_gl2(build_cube(d, order))
    return mc, totalize(mc)


def compute_ckh(d: SlicedTangle, s: Specialization, order: Optional[Sequence[int]] = None):
    """Homology for links; a simplified foam complex for tangles."""
    if not d.closed:
        return simplify_foam(totalize(build_cube(d, order)))
    _, c = module_complex(d, order)
    return smith_homology(c, s)


def compute_ckh_foam_route(d: SlicedTangle, s: Specialization) -> BigradedHomology:
    """Deloop and eliminate among foams first, then apply ``A_gl2``."""
    if not d.closed:
        raise NotClosed("the foam route ends in modules and needs a link diagram")
    simplified = simplify_foam(totalize(build_cube(d)))
    return smith_homology(_a_gl2_complex(simplified), s)


def chain_level_euler(d: SlicedTangle) -> LaurentPoly:
    _, c = module_complex(d)
    return chain_euler(c)


def vertex_ranks(h: HypercubicComplex) -> Dict[Tuple[int, ...], Tuple[int, ...]]:
    """Sorted q-degrees of the generators at every vertex of a module cube."""
    return {v: tuple(sorted(m.qdeg(i) for i in range(m.rank))) for v, m in h.objects.items()}
