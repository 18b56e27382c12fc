"""Evaluation of closed foam diagrams by a bottom-to-top sweep.

A closed diagram is an endomorphism of the identity web on a weight: its
word is empty at the bottom and at the top.  The sweep keeps the open cups,
the dots and the height order of both.  Each cap is resolved on the spot,
either as a bubble (cap and cup on the same strand) or as a zigzag; the
cup is first brought next to the cap by graded interchanges.  Every branch
of the computation carries a unit scalar, so the state is a list of
monomial terms.

Surfaces are tracked through 1-facet slots.  For a thin position ``p`` the
letters of colours ``p - 1`` and ``p`` cut the word into slots, and a slot
is named by the letter on its left (``None`` for the leftmost one).  Two
dots on one component of the surface annihilate.  At the end every dot
sits on one of the strips ``p`` of the ambient weight, and the result is a
map from sorted strip tuples to coefficients.

The neck-cutting rule can be injected on adjacent ``s_i m_i`` pairs.  With
the guard on, it only fires when the two pieces belong to distinct global
strands; with the guard off the sweep can loop, which ``max_steps`` turns
into ``NonTerminating``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import IllegalDiagram, NonTerminating, NotClosed
from .foams import FoamDiagram, Slice
from .ring import RingElem
from .rules import RuleTable, active_table
from .webs import thin_positions

Unit = Tuple[int, int, int, int]  # (sign, x, y, z)
UNIT_ONE: Unit = (1, 0, 0, 0)

SCALAR_NAMES = (
    "zig_A_left", "zig_A_right", "zig_B_left", "zig_B_right",
    "sphere_lo", "sphere_hi", "tube_lo", "tube_hi", "neck_below", "neck_above",
)


def umul(a: Unit, b: Unit) -> Unit:
    return (a[0] * b[0], (a[1] + b[1]) & 1, (a[2] + b[2]) & 1, a[3] + b[3])


def mu_unit(g, h) -> Unit:
    a, b = g
    c, d = h
    return (1, (a * c) & 1, (b * d) & 1, a * d - b * c)


def unit_of(v: RingElem) -> Unit:
    if not v.is_unit():
        raise ValueError(f"{v} is not a unit")
    ((x, y, z), c), = v.terms.items()
    return (c, x, y, z)


def unit_to_elem(u: Unit) -> RingElem:
    return RingElem.monomial(u[1], u[2], u[3], u[0])


class Scalars:
    """Numeric scalars: coefficients are units."""

    def __init__(self, table: RuleTable):
        self.deg = {k: tuple(v) for k, v in table.degrees.items()}
        v = {
            "zig_A_left": table.zigzag[("A", "left")],
            "zig_A_right": table.zigzag[("A", "right")],
            "zig_B_left": table.zigzag[("B", "left")],
            "zig_B_right": table.zigzag[("B", "right")],
            "sphere_lo": table.sphere[0],
            "sphere_hi": table.sphere[1],
            "tube_lo": table.tube[0],
            "tube_hi": table.tube[1],
            "neck_below": table.neck[0],
            "neck_above": table.neck[1],
        }
        self.values = {k: unit_of(e) for k, e in v.items()}

    def one(self):
        return UNIT_ONE

    def unit(self, u: Unit):
        return u

    def get(self, name: str):
        return self.values[name]

    def mul(self, a, b):
        return umul(a, b)


class SymbolicScalars(Scalars):
    """Coefficients are ``(unit, exponent vector over SCALAR_NAMES)``."""

    def __init__(self, degrees):
        self.deg = {k: tuple(v) for k, v in degrees.items()}
        n = len(SCALAR_NAMES)
        self._zero = (0,) * n
        self.values = {
            name: (UNIT_ONE, tuple(1 if j == i else 0 for j in range(n)))
            for i, name in enumerate(SCALAR_NAMES)
        }

    def one(self):
        return (UNIT_ONE, self._zero)

    def unit(self, u: Unit):
        return (u, self._zero)

    def mul(self, a, b):
        return (umul(a[0], b[0]), tuple(p + q for p, q in zip(a[1], b[1])))


@dataclass
class Strategy:
    """Choices left open by the rules.

    ``rng=None`` gives the deterministic default: free items move below the
    cup, the cup right of a cap is used for snakes, and no neck is cut.
    """

    rng: Optional[random.Random] = None
    nc_rate: float = 0.0
    guard: bool = True
    eager_nc: bool = False
    max_steps: Optional[int] = None


class _State:
    __slots__ = ("coef", "word", "letters", "cups", "leg", "dots", "items")

    def copy(self) -> "_State":
        s = _State()
        s.coef = self.coef
        s.word = list(self.word)
        s.letters = self.letters  # append-only, shared
        s.cups = {k: list(v) for k, v in self.cups.items()}
        s.leg = dict(self.leg)
        s.dots = {k: list(v) for k, v in self.dots.items()}
        s.items = list(self.items)
        return s


class _Sweep:
    def __init__(self, dg: FoamDiagram, scalars: Scalars, strategy: Strategy):
        if dg.source.word or dg.words[-1]:
            raise NotClosed("closed evaluation needs an empty word at the bottom and the top")
        self.dg = dg
        self.sc = scalars
        self.st = strategy
        self.rng = strategy.rng
        self.weight = dg.source.source
        self.strips = thin_positions(self.weight)
        self.steps = 0
        self.nid = 0  # ids are global so that branches may share the letter table
        d = scalars.deg
        self.item_deg = {"A": d["cupA"], "B": d["cupB"], "dot": d["dot"]}
        self.cap_deg = {"A": d["capA"], "B": d["capB"]}
        self.dot_mu = scalars.unit(mu_unit(d["dot"], d["dot"]))

    # -- bookkeeping -------------------------------------------------------

    def _fresh(self) -> int:
        self.nid += 1
        return self.nid

    def _tick(self) -> None:
        self.steps += 1
        if self.st.max_steps is not None and self.steps > self.st.max_steps:
            raise NonTerminating(f"rewriting exceeded {self.st.max_steps} steps")

    @staticmethod
    def _psub(s: _State, p: int) -> List[int]:
        return [i for i in s.word if s.letters[i][1] in (p - 1, p)]

    @staticmethod
    def _prev_key(s: _State, p: int, idx: int) -> Optional[int]:
        for j in range(idx - 1, -1, -1):
            if s.letters[s.word[j]][1] in (p - 1, p):
                return s.word[j]
        return None

    def _deg(self, s: _State, item) -> Tuple[int, int]:
        if item[0] == "c":
            return self.item_deg[s.cups[item[1]][2]]
        return self.item_deg["dot"]

    def _contains(self, s: _State, cid: int, item, pos: Dict[int, int], psubs) -> bool:
        left, right, _, c = s.cups[cid]
        if item[0] == "d":
            p, key = s.dots[item[1]]
            if p not in (c, c + 1):
                return False
            sub = psubs(p)
            slot = 0 if key is None else sub.index(key) + 1
            return sub.index(left) + 1 <= slot <= sub.index(right)
        oc = s.cups[item[1]]
        if abs(oc[3] - c) > 1:
            return False
        return pos[left] < pos[oc[0]] and pos[oc[1]] < pos[right]

    # -- surface components and dot annihilation -----------------------------

    def _alive(self, s: _State) -> bool:
        if len(s.dots) < 2:
            return True
        parent: Dict = {}

        def find(a):
            parent.setdefault(a, a)
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        prev: Dict[Tuple[int, int], Optional[int]] = {}
        last: Dict[int, Optional[int]] = {}
        for lid in s.word:
            kind, c = s.letters[lid]
            for p in (c, c + 1):
                prev[(lid, p)] = last.get(p)
                last[p] = lid
            if kind == "m":
                union((c, prev[(lid, c)]), (c + 1, prev[(lid, c + 1)]))
            else:
                union((c, lid), (c + 1, lid))
        for left, right, kind, c in s.cups.values():
            if kind == "A":
                for p in (c, c + 1):
                    union((p, prev[(left, p)]), (p, right))
        for p in self.strips:
            union((p, None), (p, last.get(p)))
        seen = set()
        for p, key in s.dots.values():
            r = find((p, key))
            if r in seen:
                return False
            seen.add(r)
        return True

    # -- reordering ----------------------------------------------------------

    def _reorder(self, s: _State, cid: int, cap_kind: str, mid: Sequence, must_down: Sequence):
        """Bring cup ``cid`` right below the cap; returns the new item list pieces."""
        ui = s.items.index(("c", cid))
        window = [it for it in s.items[ui + 1:] if it not in mid]
        pos = {lid: k for k, lid in enumerate(s.word)}
        cache: Dict[int, List[int]] = {}

        def psubs(p):
            if p not in cache:
                cache[p] = self._psub(s, p)
            return cache[p]

        cups_in = [it for it in window if it[0] == "c"]
        contains = {
            it: [w for w in window if w != it and self._contains(s, it[1], w, pos, psubs)]
            for it in cups_in
        }
        containers: Dict = {w: [] for w in window}
        for v, ins in contains.items():
            for w in ins:
                containers[w].append(v)
        side: Dict = {}

        def put(item, where):
            stack = [(item, where)]
            while stack:
                it, wh = stack.pop()
                if it in side:
                    if side[it] != wh:
                        raise IllegalDiagram("inconsistent height constraints in sweep")
                    continue
                side[it] = wh
                if wh == "u" and it in contains:
                    stack.extend((w, "u") for w in contains[it])
                if wh == "d":
                    stack.extend((v, "d") for v in containers[it])

        for w in window:
            if self._contains(s, cid, w, pos, psubs):
                put(w, "u")
        for w in must_down:
            if w in containers:
                put(w, "d")
        for w in window:
            if w not in side:
                choice = "d" if self.rng is None else self.rng.choice("ud")
                put(w, choice)
        down = [w for w in window if side[w] == "d"]
        up = [w for w in window if side[w] == "u"]
        # scalar from the permutation: product over flipped pairs
        old = [("c", cid)] + list(s.items[ui + 1:]) + [("cap",)]
        new = down + [("c", cid)] + list(mid) + [("cap",)] + up
        rank = {it: k for k, it in enumerate(new)}

        def deg(it):
            return self.cap_deg[cap_kind] if it[0] == "cap" else self._deg(s, it)

        coef = s.coef
        for i in range(len(old)):
            for j in range(i + 1, len(old)):
                lo, hi = old[i], old[j]
                if rank[lo] > rank[hi]:
                    coef = self.sc.mul(coef, self.sc.unit(mu_unit(deg(hi), deg(lo))))
        s.coef = coef
        before = s.items[:ui]
        return before, down, up

    # -- slices --------------------------------------------------------------

    def _apply(self, s: _State, sl: Slice) -> List[_State]:
        k = sl.kind
        if k in ("cupA", "cupB"):
            kind = k[-1]
            a, b = ("m", "s") if kind == "A" else ("s", "m")
            la, lb, cid = self._fresh(), self._fresh(), self._fresh()
            s.letters[la] = (a, sl.colour)
            s.letters[lb] = (b, sl.colour)
            s.word[sl.pos:sl.pos] = [la, lb]
            s.cups[cid] = [la, lb, kind, sl.colour]
            s.leg[la] = s.leg[lb] = cid
            s.items.append(("c", cid))
            if kind == "A" and not self._alive(s):
                return []
            return [s]
        if k == "dot":
            did = self._fresh()
            s.dots[did] = [sl.colour, self._prev_key(s, sl.colour, sl.pos)]
            s.items.append(("d", did))
            return [s] if self._alive(s) else []
        if k == "x":
            w = s.word
            w[sl.pos], w[sl.pos + 1] = w[sl.pos + 1], w[sl.pos]
            return [s]
        return self._cap(s, sl)

    def _rekey(self, s: _State, x: int, y: int, c: int, prev: Dict[int, Optional[int]]) -> None:
        for dot in s.dots.values():
            if dot[0] in (c, c + 1) and dot[1] in (x, y):
                dot[1] = prev[dot[0]]

    def _cap(self, s: _State, sl: Slice) -> List[_State]:
        self._tick()
        c, pos = sl.colour, sl.pos
        x, y = s.word[pos], s.word[pos + 1]
        cap_kind = sl.kind[-1]
        prev = {p: self._prev_key(s, p, pos) for p in (c, c + 1)}
        cx, cy = s.leg[x], s.leg[y]
        if cx == cy:
            return self._bubble(s, cx, x, y, c, cap_kind, prev)
        right_ok = s.cups[cy][0] == y
        left_ok = s.cups[cx][1] == x
        if right_ok and left_ok and self.rng is not None:
            use_right = self.rng.random() < 0.5
        else:
            use_right = right_ok
        if use_right:
            u, other, keep, moved = cy, cx, s.cups[cy][1], x
        else:
            u, other, keep, moved = cx, cy, s.cups[cx][0], y
        ukind = s.cups[u][2]
        before, down, up = self._reorder(s, u, cap_kind, (), [("c", other)] + [
            ("d", d) for d, (p, key) in s.dots.items() if p in (c, c + 1) and key == x
        ])
        s.coef = self.sc.mul(s.coef, self.sc.get(f"zig_{ukind}_{'right' if use_right else 'left'}"))
        oc = s.cups[other]
        if oc[0] == moved:
            oc[0] = keep
        else:
            oc[1] = keep
        s.leg[keep] = other
        del s.cups[u]
        s.items = before + down + up
        # the pocket under the cap opens below the cup, beside its kept leg
        if use_right:
            pocket = {p: keep for p in (c, c + 1)}
        else:
            ka = s.word.index(keep)
            pocket = {p: self._prev_key(s, p, ka) for p in (c, c + 1)}
        for dot in s.dots.values():
            if dot[0] in (c, c + 1):
                if dot[1] == x:
                    dot[1] = pocket[dot[0]]
                elif dot[1] == y:
                    dot[1] = prev[dot[0]]
        del s.word[pos:pos + 2]
        del s.leg[x], s.leg[y]
        return [s]

    def _bubble(self, s, cid, x, y, c, cap_kind, prev) -> List[_State]:
        interior = [("d", d) for d, (p, key) in s.dots.items() if p in (c, c + 1) and key == x]
        kind = s.cups[cid][2]
        before, down, up = self._reorder(s, cid, cap_kind, interior, ())
        del s.cups[cid]
        del s.word[s.word.index(x):s.word.index(x) + 2]
        del s.leg[x], s.leg[y]
        if kind == "B":
            if len(interior) != 1:
                return []
            did = interior[0][1]
            name = "sphere_lo" if s.dots[did][0] == c else "sphere_hi"
            del s.dots[did]
            s.coef = self.sc.mul(s.coef, self.sc.get(name))
            s.items = before + down + up
            self._rekey(s, x, y, c, prev)
            return [s]
        if interior:
            raise IllegalDiagram("dot inside a shaded bubble")
        self._rekey(s, x, y, c, prev)
        out = []
        for name, p in (("tube_lo", c), ("tube_hi", c + 1)):
            t = s.copy()
            did = self._fresh()
            t.dots[did] = [p, prev[p]]
            t.items = before + down + [("d", did)] + up
            t.coef = self.sc.mul(t.coef, self.sc.get(name))
            if self._alive(t):
                out.append(t)
        return out

    # -- neck cutting --------------------------------------------------------

    def _same_strand(self, s: _State, x: int, y: int, k: int) -> bool:
        parent: Dict[int, int] = {}

        def find(a):
            parent.setdefault(a, a)
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            parent[find(a)] = find(b)

        for left, right, _, _ in s.cups.values():
            union(left, right)
        word = list(s.word)
        fresh = -1
        for sl in self.dg.slices[k + 1:]:
            if sl.kind in ("cupA", "cupB"):
                word[sl.pos:sl.pos] = [fresh, fresh - 1]
                union(fresh, fresh - 1)
                fresh -= 2
            elif sl.kind in ("capA", "capB"):
                union(word[sl.pos], word[sl.pos + 1])
                del word[sl.pos:sl.pos + 2]
            elif sl.kind == "x":
                word[sl.pos], word[sl.pos + 1] = word[sl.pos + 1], word[sl.pos]
        return find(x) == find(y)

    def _neck_sites(self, s: _State, k: int) -> List[int]:
        out = []
        for i in range(len(s.word) - 1):
            a, b = s.letters[s.word[i]], s.letters[s.word[i + 1]]
            if a[0] == "s" and b[0] == "m" and a[1] == b[1]:
                if not self.st.guard or not self._same_strand(s, s.word[i], s.word[i + 1], k):
                    out.append(i)
        return out

    def _maybe_neck(self, s: _State, k: int) -> List[_State]:
        st = self.st
        if not st.eager_nc and (self.rng is None or st.nc_rate <= 0 or self.rng.random() >= st.nc_rate):
            return [s]
        sites = self._neck_sites(s, k)
        if not sites:
            return [s]
        i = sites[0] if st.eager_nc or self.rng is None else self.rng.choice(sites)
        c = s.letters[s.word[i]][1]
        self._tick()
        out = []
        for name, seq in (
            ("neck_below", [Slice("dot", c, i + 1), Slice("capA", c, i), Slice("cupB", c, i)]),
            ("neck_above", [Slice("capA", c, i), Slice("cupB", c, i), Slice("dot", c, i + 1)]),
        ):
            t = s.copy()
            t.coef = self.sc.mul(t.coef, self.sc.get(name))
            terms = [t]
            for sl in seq:
                terms = [r for u in terms for r in self._apply(u, sl)]
            for u in terms:
                out.extend(self._maybe_neck(u, k) if st.eager_nc else [u])
        return out

    # -- driver --------------------------------------------------------------

    def run(self) -> List[Tuple[Tuple[int, ...], object]]:
        s = _State()
        s.coef = self.sc.one()
        s.word, s.letters, s.cups, s.leg, s.dots, s.items = [], {}, {}, {}, {}, []
        terms = [s]
        for k, sl in enumerate(self.dg.slices):
            nxt = []
            for t in terms:
                for u in self._apply(t, sl):
                    nxt.extend(self._maybe_neck(u, k))
            terms = nxt
        out = []
        for t in terms:
            ps = [t.dots[it[1]][0] for it in t.items if it[0] == "d"]
            coef = t.coef
            for i in range(len(ps)):
                for j in range(i + 1, len(ps)):
                    if ps[i] > ps[j]:
                        coef = self.sc.mul(coef, self.dot_mu)
            out.append((tuple(sorted(ps)), coef))
        return out


def evaluate_terms(dg: FoamDiagram, scalars: Scalars, strategy: Optional[Strategy] = None):
    """Raw monomial terms ``(strip tuple, coefficient)`` of a closed diagram."""
    sw = _Sweep(dg, scalars, strategy or Strategy())
    return sw.run()


def evaluate_closed(
    dg: FoamDiagram, table: Optional[RuleTable] = None, strategy: Optional[Strategy] = None
) -> Dict[Tuple[int, ...], RingElem]:
    """Closed diagram as a combination of dotted identities on the strips."""
    sc = Scalars(table or active_table())
    acc: Dict[Tuple[int, ...], RingElem] = {}
    for key, u in evaluate_terms(dg, sc, strategy):
        acc[key] = acc.get(key, RingElem()) + unit_to_elem(u)
    return {k: v for k, v in acc.items() if v}
