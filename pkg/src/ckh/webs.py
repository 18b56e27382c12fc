"""gl2-webs as generator words, their underlying flat tangles and pairings.

A weight is a tuple over ``{1, 2}``.  Entry ``j`` sits at colour
``l(j) = sum(weight[:j]) + 1``; a ``2`` at colour ``c`` covers the thin
positions ``c`` and ``c + 1``.  A web is a source weight together with a
word of letters ``("m", c)`` (merge at colour ``c``) and ``("s", c)``
(split at colour ``c``), applied left to right.  In foam diagrams the same
word is drawn as strands from left to right with the source weight in the
leftmost region.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import NotAntidominant, ParseError, WeightMismatch
from .ring import LaurentPoly, Q_PLUS_QINV

Weight = Tuple[int, ...]
Letter = Tuple[str, int]
Endpoint = Tuple[str, int]  # ("b", p) bottom / source, ("t", p) top / target


def colours(weight: Sequence[int]) -> List[int]:
    out, acc = [], 1
    for v in weight:
        out.append(acc)
        acc += v
    return out


def width(weight: Sequence[int]) -> int:
    return sum(weight)


def thin_positions(weight: Sequence[int]) -> List[int]:
    """Colour positions carrying a 1-facet."""
    return [c for c, v in zip(colours(weight), weight) if v == 1]


def is_thin(weight: Sequence[int], p: int) -> bool:
    for c, v in zip(colours(weight), weight):
        if c == p:
            return v == 1
        if c > p:
            return False
    return False


def validate_weight(weight: Sequence[int]) -> Weight:
    w = tuple(int(v) for v in weight)
    if any(v not in (1, 2) for v in w):
        raise WeightMismatch(f"weight entries must be 1 or 2: {weight!r}")
    return w


def apply_letter(weight: Weight, letter: Letter) -> Weight:
    kind, c = letter
    cols = colours(weight)
    for j, col in enumerate(cols):
        if col != c:
            continue
        if kind == "m":
            if weight[j] == 1 and j + 1 < len(weight) and weight[j + 1] == 1:
                return weight[:j] + (2,) + weight[j + 2:]
        elif kind == "s":
            if weight[j] == 2:
                return weight[:j] + (1, 1) + weight[j + 1:]
        else:
            raise ParseError(f"unknown letter kind {kind!r}")
        break
    raise WeightMismatch(f"letter {kind}{c} does not apply to weight {weight}")


def flip(letter: Letter) -> Letter:
    return ("s" if letter[0] == "m" else "m", letter[1])


def far(c1: int, c2: int) -> bool:
    return abs(c1 - c2) >= 2


@dataclass(frozen=True)
class Web:
    source: Weight
    word: Tuple[Letter, ...] = ()
    regions: Tuple[Weight, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        src = validate_weight(self.source)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "word", tuple((k, int(c)) for k, c in self.word))
        regs = [src]
        for letter in self.word:
            regs.append(apply_letter(regs[-1], letter))
        object.__setattr__(self, "regions", tuple(regs))

    @property
    def target(self) -> Weight:
        return self.regions[-1]

    @property
    def d(self) -> int:
        return width(self.source)

    def __len__(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        return format_web(self)

    def reversed_dual(self) -> "Web":
        """The word read backwards with merges and splits exchanged."""
        return Web(self.target, tuple(flip(x) for x in reversed(self.word)))


def identity(weight: Sequence[int]) -> Web:
    return Web(tuple(weight), ())


def compose(upper: Web, lower: Web) -> Web:
    if lower.target != upper.source:
        raise WeightMismatch(f"cannot stack {upper.source} on {lower.target}")
    return Web(lower.source, lower.word + upper.word)


def parse_web(text: str) -> Web:
    try:
        src_text, _, word_text = text.strip().partition(";")
        src = tuple(int(ch) for ch in src_text.strip())
        word = []
        for tok in word_text.split(","):
            tok = tok.strip()
            if not tok:
                continue
            if tok[0] not in "ms":
                raise ParseError(f"bad web token {tok!r}")
            word.append((tok[0], int(tok[1:])))
    except ValueError as exc:
        raise ParseError(f"bad web {text!r}: {exc}") from exc
    return Web(src, tuple(word))


def format_web(w: Web) -> str:
    return "".join(str(v) for v in w.source) + ";" + ",".join(f"{k}{c}" for k, c in w.word)


# ---------------------------------------------------------------------------
# underlying 1-manifold sl(W)


class _UF:
    def __init__(self):
        self.parent: Dict = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def slot_graph(w: Web) -> Tuple[_UF, List[Tuple[int, int]]]:
    """Union-find over thin slots ``(region, p)`` of the cross-section of ``w``."""
    uf = _UF()
    nodes = []
    for r, reg in enumerate(w.regions):
        for p in thin_positions(reg):
            uf.find((r, p))
            nodes.append((r, p))
    for k, (kind, c) in enumerate(w.word):
        left, right = w.regions[k], w.regions[k + 1]
        for p in thin_positions(left):
            if p not in (c, c + 1):
                uf.union((k, p), (k + 1, p))
        thin_side = k if kind == "m" else k + 1
        uf.union((thin_side, c), (thin_side, c + 1))
    return uf, nodes


@dataclass(frozen=True)
class FlatTangle:
    pairing: FrozenSet[FrozenSet[Endpoint]]
    circles: int

    def is_planar(self, bottom: Sequence[int], top: Sequence[int]) -> bool:
        # boundary read around the rectangle: bottom left-to-right, then top right-to-left
        order = [("b", p) for p in bottom] + [("t", p) for p in reversed(list(top))]
        pos = {e: i for i, e in enumerate(order)}
        chords = [sorted(pos[e] for e in pair) for pair in self.pairing]
        for a1, b1 in chords:
            for a2, b2 in chords:
                if a1 < a2 < b1 < b2:
                    return False
        return True


def _trace_tangle(w: Web) -> FlatTangle:
    uf, nodes = slot_graph(w)
    n = len(w.word)
    ends: Dict = {}
    for p in thin_positions(w.source):
        ends.setdefault(uf.find((0, p)), []).append(("b", p))
    for p in thin_positions(w.target):
        ends.setdefault(uf.find((n, p)), []).append(("t", p))
    roots = {uf.find(x) for x in nodes}
    circles = sum(1 for r in roots if r not in ends)
    pairing = frozenset(frozenset(v) for v in ends.values())
    return FlatTangle(pairing, circles)


# Temperley-Lieb style rewriting of sl(W): ("cup", i) creates strands i, i+1,
# ("cap", i) joins strands i, i+1 (indices among the current thin points).


def sl_word(w: Web) -> List[Tuple[str, int]]:
    out = []
    for reg, (kind, c) in zip(w.regions, w.word):
        thin = thin_positions(reg)
        if kind == "m":
            out.append(("cap", thin.index(c)))
        else:
            out.append(("cup", sum(1 for p in thin if p < c)))
    return out


def _tl_redexes(word: List[Tuple[str, int]]) -> List[int]:
    out = []
    for k in range(len(word) - 1):
        (a, i), (b, j) = word[k], word[k + 1]
        if a == "cup" and b == "cap":
            out.append(k)
    return out


def _tl_step(word, k) -> Tuple[List[Tuple[str, int]], int]:
    (_, i), (_, j) = word[k], word[k + 1]
    if j == i:
        return word[:k] + word[k + 2:], 1
    if j in (i - 1, i + 1):
        return word[:k] + word[k + 2:], 0
    if j >= i + 2:
        return word[:k] + [("cap", j - 2), ("cup", i)] + word[k + 2:], 0
    return word[:k] + [("cap", j), ("cup", i - 2)] + word[k + 2:], 0


def tl_normalize(word, rng: Optional[random.Random] = None) -> Tuple[List[Tuple[str, int]], int]:
    """Rewrite to caps-below-cups form, extracting circles.

    Default strategy is leftmost-innermost; ``rng`` picks random redexes.
    """
    word = list(word)
    circles = 0
    while True:
        red = _tl_redexes(word)
        if not red:
            return word, circles
        k = rng.choice(red) if rng is not None else red[0]
        word, extra = _tl_step(word, k)
        circles += extra


def _pairing_of_tl(word, bottom_labels, top_labels) -> FrozenSet[FrozenSet[Endpoint]]:
    """Read the pairing off a caps-below-cups word."""
    strands: List = list(bottom_labels)
    result = []
    for kind, i in word:
        if kind == "cap":
            a, b = strands[i], strands[i + 1]
            if isinstance(a, int) or isinstance(b, int):
                raise ValueError("word is not in caps-below-cups form")
            result.append(frozenset((a, b)))
            strands[i:i + 2] = []
        else:
            token = len(result) + len(strands) + 10 ** 6
            strands[i:i] = [token, token]
    by_token: Dict = {}
    for s, top in zip(strands, top_labels):
        if isinstance(s, int):
            by_token.setdefault(s, []).append(top)
        else:
            result.append(frozenset((s, top)))
    result += [frozenset(v) for v in by_token.values()]
    return frozenset(result)


def flat_normal_form(w: Web, rng: Optional[random.Random] = None) -> FlatTangle:
    word, circles = tl_normalize(sl_word(w), rng)
    bottom = [("b", p) for p in thin_positions(w.source)]
    top = [("t", p) for p in thin_positions(w.target)]
    pairing = _pairing_of_tl(word, bottom, top)
    return FlatTangle(pairing, circles)


def glued_components(w: Web, w2: Web) -> int:
    if w.source != w2.source or w.target != w2.target:
        raise WeightMismatch("webs are not parallel")
    f1, f2 = _trace_tangle(w), _trace_tangle(w2)
    uf = _UF()
    for pair in list(f1.pairing):
        a, b = tuple(pair)
        uf.union(a, b)
    for pair in list(f2.pairing):
        a, b = tuple(pair)
        uf.union(a, b)
    ends = [e for pair in f1.pairing for e in pair]
    arcs = len({uf.find(e) for e in ends})
    return arcs + f1.circles + f2.circles


def web_pairing(w: Web, w2: Web) -> LaurentPoly:
    return Q_PLUS_QINV ** glued_components(w, w2)


def component_labels(w0: Web, w: Web) -> Tuple[Dict, Dict, int]:
    """Label components of ``sl(w0)`` glued to ``sl(w)`` along the boundary.

    Returns maps from thin slots ``(region, p)`` of each cross-section to a
    component index, and the component count.  Indices are assigned in order
    of first appearance scanning ``w0`` then ``w``, regions left to right.
    """
    if w0.source != w.source or w0.target != w.target:
        raise WeightMismatch("webs are not parallel")
    uf0, nodes0 = slot_graph(w0)
    uf1, nodes1 = slot_graph(w)
    uf = _UF()
    for x in nodes0:
        uf.union(("0",) + x, ("0",) + uf0.find(x))
    for x in nodes1:
        uf.union(("1",) + x, ("1",) + uf1.find(x))
    n0, n1 = len(w0.word), len(w.word)
    for p in thin_positions(w0.source):
        uf.union(("0", 0, p), ("1", 0, p))
    for p in thin_positions(w0.target):
        uf.union(("0", n0, p), ("1", n1, p))
    index: Dict = {}
    lab0, lab1 = {}, {}
    for side, nodes, lab in (("0", nodes0, lab0), ("1", nodes1, lab1)):
        for x in nodes:
            root = uf.find((side,) + x)
            if root not in index:
                index[root] = len(index)
            lab[x] = index[root]
    return lab0, lab1, len(index)


# ---------------------------------------------------------------------------
# mixed crossings and antidominant cups / caps


def mixed_crossing(weight: Sequence[int], index: int, direction: str = "right", kind: str = "over") -> Web:
    """A thin strand passing a double line, as a composite of generators.

    ``direction="right"`` turns ``(.., 1, 2, ..)`` at tuple indices
    ``index, index + 1`` into ``(.., 2, 1, ..)``; ``"left"`` does the converse.
    Over and under variants have the same underlying web.
    """
    if kind not in ("over", "under"):
        raise ParseError(f"unknown mixed crossing kind {kind!r}")
    w = validate_weight(weight)
    cols = colours(w)
    if direction == "right":
        if w[index:index + 2] != (1, 2):
            raise WeightMismatch(f"expected (1, 2) at {index} in {w}")
        c_thin, c_double = cols[index], cols[index + 1]
        return Web(w, (("s", c_double), ("m", c_thin)))
    if direction == "left":
        if w[index:index + 2] != (2, 1):
            raise WeightMismatch(f"expected (2, 1) at {index} in {w}")
        c_double = cols[index]
        return Web(w, (("s", c_double), ("m", c_double + 1)))
    raise ParseError(f"unknown direction {direction!r}")


def is_antidominant(weight: Sequence[int]) -> bool:
    w = tuple(weight)
    return all(not (a == 2 and b == 1) for a, b in zip(w, w[1:]))


def antidominant_cupcap(boundary: Sequence[int], position: int, kind: str) -> Web:
    """Web for a cup creating strands ``position, position + 1`` or a cap joining them.

    The double line consumed (cup) or produced (cap) travels to or from the
    leftmost double by mixed crossings, so source and target stay antidominant.
    """
    w = validate_weight(boundary)
    if not is_antidominant(w):
        raise NotAntidominant(f"{w} is not antidominant")
    k = w.count(1)
    word: List[Letter] = []
    cur = w
    if kind == "cup":
        if not 0 <= position <= k or 2 not in w:
            raise WeightMismatch(f"no room for a cup at {position} in {w}")
        for j in range(k - 1, position - 1, -1):
            step = mixed_crossing(cur, j, "right")
            word += step.word
            cur = step.target
        word.append(("s", colours(cur)[position]))
    elif kind == "cap":
        if not 0 <= position <= k - 2:
            raise WeightMismatch(f"no strands {position}, {position + 1} in {w}")
        word.append(("m", colours(cur)[position]))
        cur = apply_letter(cur, word[-1])
        for j in range(position, k - 2):
            step = mixed_crossing(cur, j, "left")
            word += step.word
            cur = step.target
    else:
        raise ParseError(f"unknown kind {kind!r}")
    return Web(w, tuple(word))


def random_web(rng: random.Random, source: Weight, n_letters: int) -> Web:
    """A random valid word of at most ``n_letters`` letters."""
    word: List[Letter] = []
    cur = source
    for _ in range(n_letters):
        options = []
        cols = colours(cur)
        for j, v in enumerate(cur):
            if v == 2:
                options.append(("s", cols[j]))
            elif j + 1 < len(cur) and cur[j + 1] == 1:
                options.append(("m", cols[j]))
        if not options:
            break
        letter = rng.choice(options)
        word.append(letter)
        cur = apply_letter(cur, letter)
    return Web(source, tuple(word))


def all_weights(d: int) -> List[Weight]:
    if d == 0:
        return [()]
    out = [(1,) + w for w in all_weights(d - 1)]
    if d >= 2:
        out += [(2,) + w for w in all_weights(d - 2)]
    return out
