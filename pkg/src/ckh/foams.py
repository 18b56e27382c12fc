"""Foam string diagrams: slices, legality via shadings, degrees, interchange.

A diagram is a source web plus a bottom-to-top list of slices.  Each slice
is one generator placed at a horizontal position: for cups, caps and
crossings the position is the index of the leftmost strand consumed or
created; for dots it is the index of the region (number of strands to its
left).

Generators, acting on the word of the running web:

=======  ==========================  ===========
kind     effect on the word          Z^2-degree
=======  ==========================  ===========
cupA     insert ``m_i s_i``          ( 1,  0)
cupB     insert ``s_i m_i``          ( 0, -1)
capA     remove ``s_i m_i``          (-1,  0)
capB     remove ``m_i s_i``          ( 0,  1)
dot      i-dot in a region           ( 1,  1)
x        swap letters of colours     ( 0,  0)
         ``i, j`` with ``|i-j|>=2``
=======  ==========================  ===========
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .errors import BoundaryMismatch, IllegalDiagram, NotDisjoint, ParseError
from .ring import Bidegree, RingElem, mu
from .rules import degree_table
from .webs import Letter, Web, colours, format_web, parse_web

CUP_LETTERS = {"cupA": ("m", "s"), "cupB": ("s", "m")}
CAP_LETTERS = {"capA": ("s", "m"), "capB": ("m", "s")}
MIRROR = {"cupA": "capB", "capB": "cupA", "cupB": "capA", "capA": "cupB", "dot": "dot", "x": "x"}
KINDS = ("cupA", "cupB", "capA", "capB", "dot", "x")


class Slice(NamedTuple):
    kind: str
    colour: int
    pos: int
    colour2: int = 0  # second colour, crossings only

    def __str__(self) -> str:
        if self.kind == "x":
            return f"x{self.colour},{self.colour2}@{self.pos}"
        return f"{self.kind}{self.colour}@{self.pos}"

    @property
    def width_in(self) -> int:
        return {"cupA": 0, "cupB": 0, "capA": 2, "capB": 2, "dot": 0, "x": 2}[self.kind]

    @property
    def width_out(self) -> int:
        return {"cupA": 2, "cupB": 2, "capA": 0, "capB": 0, "dot": 0, "x": 2}[self.kind]


def slice_degree(s: Slice) -> Bidegree:
    return degree_table()[s.kind]


def apply_slice(word: Sequence[Letter], s: Slice) -> Tuple[Letter, ...]:
    """Apply one slice to a word; raises ``BoundaryMismatch`` on a local type error."""
    w = list(word)
    p = s.pos
    if s.kind in CUP_LETTERS:
        if not 0 <= p <= len(w):
            raise BoundaryMismatch(f"{s}: position out of range")
        a, b = CUP_LETTERS[s.kind]
        w[p:p] = [(a, s.colour), (b, s.colour)]
    elif s.kind in CAP_LETTERS:
        a, b = CAP_LETTERS[s.kind]
        if w[p:p + 2] != [(a, s.colour), (b, s.colour)]:
            raise BoundaryMismatch(f"{s}: expected {a}{s.colour},{b}{s.colour} at {p}")
        del w[p:p + 2]
    elif s.kind == "dot":
        if not 0 <= p <= len(w):
            raise BoundaryMismatch(f"{s}: region out of range")
    elif s.kind == "x":
        if p < 0 or p + 1 >= len(w) or w[p][1] != s.colour or w[p + 1][1] != s.colour2:
            raise BoundaryMismatch(f"{s}: expected colours {s.colour},{s.colour2} at {p}")
        w[p], w[p + 1] = w[p + 1], w[p]
    else:
        raise ParseError(f"unknown generator {s.kind!r}")
    return tuple(w)


@dataclass(frozen=True)
class FoamDiagram:
    source: Web
    slices: Tuple[Slice, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(Slice(*s) for s in self.slices))
        words = [self.source.word]
        for s in self.slices:
            words.append(apply_slice(words[-1], s))
        object.__setattr__(self, "_words", tuple(words))

    @property
    def words(self) -> Tuple[Tuple[Letter, ...], ...]:
        return self._words  # type: ignore[attr-defined]

    @property
    def weight(self):
        return self.source.source

    @property
    def target(self) -> Web:
        return Web(self.source.source, self.words[-1])

    def web_at(self, k: int) -> Web:
        return Web(self.source.source, self.words[k])

    @property
    def degree(self) -> Bidegree:
        return degree(self)

    def __len__(self) -> int:
        return len(self.slices)

    def __str__(self) -> str:
        return format_diagram(self)


def identity_diagram(w: Web) -> FoamDiagram:
    return FoamDiagram(w, ())


def degree(d: FoamDiagram) -> Bidegree:
    table = degree_table()
    total = Bidegree(0, 0)
    for s in d.slices:
        total = total + table[s.kind]
    return total


def vcompose(upper: FoamDiagram, lower: FoamDiagram) -> FoamDiagram:
    if lower.target != upper.source:
        raise BoundaryMismatch(f"{format_web(upper.source)} does not match {format_web(lower.target)}")
    return FoamDiagram(lower.source, lower.slices + upper.slices)


def mirror(d: FoamDiagram) -> FoamDiagram:
    """Reflect top to bottom: a diagram ``W0 -> W`` becomes ``W -> W0``."""
    out = []
    for s in reversed(d.slices):
        if s.kind == "x":
            out.append(Slice("x", s.colour2, s.pos, s.colour))
        else:
            out.append(Slice(MIRROR[s.kind], s.colour, s.pos))
    return FoamDiagram(d.target, tuple(out))


def shift(d: FoamDiagram, offset: int, source: Web) -> Tuple[Slice, ...]:
    """Slices of ``d`` moved ``offset`` strands to the right inside ``source``."""
    return tuple(s._replace(pos=s.pos + offset) for s in d.slices)


# ---------------------------------------------------------------------------
# legality


class LegalityReport(NamedTuple):
    ok: bool
    condition: str = ""
    slice_index: int = -1
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


EXISTENCE = "EXISTENCE OF SHADINGS"
SUPERPOSITION = "SUPERPOSITION OF SHADINGS"
DOTS = "DOTS AND SHADINGS"


def _shading_walk(doubles: frozenset, word: Sequence[Letter], d: int):
    """Yield the double-colour set of each region, or a violation tuple."""
    cur = set(doubles)
    regions = [frozenset(cur)]
    for k, (kind, c) in enumerate(word):
        if not 1 <= c <= d - 1:
            return regions, (EXISTENCE, k, f"colour {c} out of range")
        if kind == "m":
            if c in cur:
                return regions, (EXISTENCE, k, f"m{c} with {c}-shaded left region")
            if c - 1 in cur or c + 1 in cur:
                return regions, (SUPERPOSITION, k, f"m{c} overlaps an adjacent shading")
            cur.add(c)
        else:
            if c not in cur:
                if c - 1 in cur or c + 1 in cur:
                    return regions, (SUPERPOSITION, k, f"s{c} overlaps an adjacent shading")
                return regions, (EXISTENCE, k, f"s{c} with unshaded left region")
            cur.discard(c)
        regions.append(frozenset(cur))
    return regions, None


def _doubles_of(weight) -> frozenset:
    return frozenset(c for c, v in zip(colours(weight), weight) if v == 2)


def check_legal(dg: FoamDiagram) -> LegalityReport:
    weight = dg.source.source
    d = sum(weight)
    doubles = _doubles_of(weight)
    for h, word in enumerate(dg.words):
        _, bad = _shading_walk(doubles, word, d)
        if bad is not None:
            cond, _, detail = bad
            return LegalityReport(False, cond, max(h - 1, 0), detail)
    for k, s in enumerate(dg.slices):
        before = dg.words[k]
        if s.kind == "x":
            if abs(s.colour - s.colour2) == 1:
                return LegalityReport(False, SUPERPOSITION, k, "crossing of adjacent colours")
            if s.colour == s.colour2:
                return LegalityReport(False, EXISTENCE, k, "crossing of equal colours")
        if s.kind == "dot":
            regions, _ = _shading_walk(doubles, before, d)
            reg = regions[s.pos]
            if not 1 <= s.colour <= d:
                return LegalityReport(False, DOTS, k, f"dot colour {s.colour} out of range")
            if s.colour in reg or s.colour - 1 in reg:
                return LegalityReport(False, DOTS, k, f"{s.colour}-dot in a shaded region")
    return LegalityReport(True)


def require_legal(dg: FoamDiagram) -> None:
    rep = check_legal(dg)
    if not rep:
        raise IllegalDiagram(f"{rep.condition} at slice {rep.slice_index}: {rep.detail}")


# ---------------------------------------------------------------------------
# interchange


def _interval(s: Slice, out: bool) -> Tuple[int, int]:
    w = s.width_out if out else s.width_in
    return s.pos, s.pos + w


def interchange_scalar(dg: FoamDiagram, k: int) -> Tuple[FoamDiagram, RingElem]:
    """Swap slices ``k`` and ``k + 1``; returns ``(new, c)`` with ``old = c * new``."""
    if not 0 <= k < len(dg.slices) - 1:
        raise NotDisjoint(f"no slices {k}, {k + 1}")
    low, up = dg.slices[k], dg.slices[k + 1]
    c0, c1 = _interval(low, out=True)
    a, b = _interval(up, out=False)
    if b <= c0:
        side = "left"
    elif a >= c1:
        side = "right"
    else:
        raise NotDisjoint(f"slices {low} and {up} share strands")
    if side == "left":
        new_up = up
        new_low = low._replace(pos=low.pos + up.width_out - up.width_in)
    else:
        new_up = up._replace(pos=up.pos - low.width_out + low.width_in)
        new_low = low
    slices = list(dg.slices)
    slices[k], slices[k + 1] = new_up, new_low
    new = FoamDiagram(dg.source, tuple(slices))
    scalar = mu(slice_degree(up), slice_degree(low))
    return new, scalar


def disjoint_at(dg: FoamDiagram, k: int) -> bool:
    try:
        interchange_scalar(dg, k)
    except (NotDisjoint, BoundaryMismatch):
        return False
    return True


# ---------------------------------------------------------------------------
# text / JSON

_SLICE_RE = re.compile(r"^(cupA|cupB|capA|capB|dot)(\d+)@(\d+)$|^x(\d+),(\d+)@(\d+)$")


def parse_slice(tok: str) -> Slice:
    m = _SLICE_RE.match(tok.strip())
    if not m:
        raise ParseError(f"bad slice {tok!r}")
    if m.group(1):
        return Slice(m.group(1), int(m.group(2)), int(m.group(3)))
    return Slice("x", int(m.group(4)), int(m.group(6)), int(m.group(5)))


_TOKEN = r"x\d+,\d+@\d+|(?:cupA|cupB|capA|capB|dot)\d+@\d+"


def parse_diagram(text: str) -> FoamDiagram:
    parts = text.strip().split(";", 2)
    if len(parts) < 2:
        raise ParseError(f"bad diagram {text!r}")
    web = parse_web(parts[0] + ";" + parts[1])
    body = parts[2] if len(parts) > 2 else ""
    if re.sub(_TOKEN + r"|[,\s]", "", body):
        raise ParseError(f"bad slices in {text!r}")
    return FoamDiagram(web, tuple(parse_slice(t) for t in re.findall(_TOKEN, body)))


def format_diagram(dg: FoamDiagram) -> str:
    return format_web(dg.source) + ";" + ",".join(str(s) for s in dg.slices)


def diagram_to_json(dg: FoamDiagram) -> Dict:
    return {
        "source": format_web(dg.source),
        "slices": [
            {"kind": s.kind, "colour": s.colour, "pos": s.pos, **({"colour2": s.colour2} if s.kind == "x" else {})}
            for s in dg.slices
        ],
    }


def diagram_from_json(data: Dict) -> FoamDiagram:
    web = parse_web(data["source"])
    slices = [Slice(e["kind"], e["colour"], e["pos"], e.get("colour2", 0)) for e in data["slices"]]
    return FoamDiagram(web, tuple(slices))


def slices_from(words: Optional[Sequence[str]]) -> Tuple[Slice, ...]:
    return tuple(parse_slice(t) for t in (words or ()))


# ---------------------------------------------------------------------------
# random diagrams


def _legal_word(doubles: frozenset, word, d: int) -> bool:
    return _shading_walk(doubles, word, d)[1] is None


def _moves(weight, word, doubles, d, allow_cups=True):
    moves = []
    n = len(word)
    if allow_cups:
        for pos in range(n + 1):
            for kind in ("cupA", "cupB"):
                for c in range(1, d):
                    w2 = apply_slice(word, Slice(kind, c, pos))
                    if _legal_word(doubles, w2, d):
                        moves.append(Slice(kind, c, pos))
    for pos in range(n - 1):
        (k1, c1), (k2, c2) = word[pos], word[pos + 1]
        if c1 == c2 and k1 != k2:
            moves.append(Slice("capA" if k1 == "s" else "capB", c1, pos))
        elif abs(c1 - c2) >= 2:
            moves.append(Slice("x", c1, pos, c2))
    regions, _ = _shading_walk(doubles, word, d)
    for r, reg in enumerate(regions):
        for p in range(1, d + 1):
            if p not in reg and p - 1 not in reg:
                moves.append(Slice("dot", p, r))
    return moves


def random_closed_diagram(rng, weight, n_slices: int, dot_rate: float = 0.2) -> FoamDiagram:
    """A random legal diagram from the empty web to itself on ``weight``.

    Roughly ``n_slices`` random generators are drawn, then the open strands
    are closed by crossings and caps.
    """
    weight = tuple(weight)
    d = sum(weight)
    doubles = _doubles_of(weight)
    word: Tuple[Letter, ...] = ()
    ids: List[int] = []
    partner: Dict[int, int] = {}
    nid = 0
    slices: List[Slice] = []

    def push(s: Slice):
        nonlocal word, nid
        if s.kind in CUP_LETTERS:
            ids[s.pos:s.pos] = [nid, nid + 1]
            partner[nid], partner[nid + 1] = nid + 1, nid
            nid += 2
        elif s.kind in CAP_LETTERS:
            a, b = ids[s.pos], ids[s.pos + 1]
            if partner[a] != b:
                pa, pb = partner.pop(a), partner.pop(b)
                partner[pa], partner[pb] = pb, pa
            else:
                del partner[a], partner[b]
            del ids[s.pos:s.pos + 2]
        elif s.kind == "x":
            ids[s.pos], ids[s.pos + 1] = ids[s.pos + 1], ids[s.pos]
        word = apply_slice(word, s)
        slices.append(s)

    for _ in range(n_slices):
        moves = _moves(weight, word, doubles, d, allow_cups=len(word) < 2 * d)
        dots = [m for m in moves if m.kind == "dot"]
        rest = [m for m in moves if m.kind != "dot"]
        if dots and (not rest or rng.random() < dot_rate):
            push(rng.choice(dots))
        elif rest:
            caps = [m for m in rest if m.kind in CAP_LETTERS]
            if caps and rng.random() < 0.4:
                push(rng.choice(caps))
            else:
                push(rng.choice(rest))
    while word:
        caps = [m for m in _moves(weight, word, doubles, d, False) if m.kind in CAP_LETTERS]
        if caps:
            push(rng.choice(caps))
            continue
        pos = {lid: k for k, lid in enumerate(ids)}
        best = None
        for a, b in partner.items():
            i, j = pos[a], pos[b]
            if i < j and all(abs(word[k][1] - word[i][1]) >= 2 for k in range(i + 1, j)):
                if best is None or j - i < best[1] - best[0]:
                    best = (i, j)
        if best is None:
            raise IllegalDiagram("cannot close random diagram")
        i, j = best
        push(Slice("x", word[j - 1][1], j - 1, word[j][1]))
    return FoamDiagram(Web(weight, ()), tuple(slices))
