"""Generator degrees and local scalars, loaded from a JSON table.

The default table ships in ``ckh/data/rules.json``; the environment
variable ``KH_RULE_TABLE`` points to a replacement file.  Every table is
validated on load: the degree constraints, and homogeneity of every local
relation whose scalars it provides.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, Tuple

from .errors import ParseError, RuleTableError
from .ring import Bidegree, RingElem, mu_symmetry_check, parse_elem

DEFAULT_TABLE = "rules.json"


@dataclass(frozen=True)
class RuleTable:
    degrees: Dict[str, Bidegree]
    zigzag: Dict[Tuple[str, str], RingElem]  # (cup kind "A"/"B", cup side "left"/"right")
    sphere: Tuple[RingElem, RingElem]  # ccw i-bubble with one i-dot / one (i+1)-dot inside
    tube: Tuple[RingElem, RingElem]  # cw i-bubble = tube[0] i-dot + tube[1] (i+1)-dot
    curl: Tuple[RingElem, RingElem]  # capB-then-cupA = curl[0] dot right + curl[1] dot left
    neck: Tuple[RingElem, RingElem]  # id of s_i m_i = neck[0] dot below the cut + neck[1] dot above
    source: str = "<default>"


def _deg(v) -> Bidegree:
    return Bidegree(int(v[0]), int(v[1]))


def validate_degrees(deg: Dict[str, Bidegree]) -> None:
    need = {"cupA", "cupB", "capA", "capB", "dot", "x"}
    if set(deg) != need:
        raise RuleTableError(f"degree table must define exactly {sorted(need)}")
    checks = [
        (deg["capA"] + deg["cupA"], (0, 0), "deg(capA)+deg(cupA)=0"),
        (deg["capB"] + deg["cupB"], (0, 0), "deg(capB)+deg(cupB)=0"),
        (deg["cupB"] + deg["capA"] + deg["dot"], (0, 0), "deg(cupB)+deg(capA)+deg(dot)=0"),
        (deg["cupA"] + deg["capB"], deg["dot"], "deg(cupA)+deg(capB)=deg(dot)"),
        (deg["dot"], (1, 1), "deg(dot)=(1,1)"),
        (deg["x"], (0, 0), "deg(x)=(0,0)"),
    ]
    for got, want, name in checks:
        if tuple(got) != tuple(want):
            raise RuleTableError(f"degree constraint violated: {name}")
    for g in deg.values():
        for h in deg.values():
            if not mu_symmetry_check(g, h):
                raise RuleTableError("mu is not symmetric on the degree table")


def local_relation_degrees(deg: Dict[str, Bidegree]) -> Dict[str, Tuple[Bidegree, Tuple[Bidegree, ...]]]:
    """Left side and right-side monomial degrees of each local relation."""
    z = Bidegree(0, 0)
    dot = deg["dot"]
    return {
        "zigzag_A": (deg["cupA"] + deg["capA"], (z,)),
        "zigzag_B": (deg["cupB"] + deg["capB"], (z,)),
        "sphere": (deg["cupB"] + dot + deg["capA"], (z,)),
        "tube": (deg["cupA"] + deg["capB"], (dot, dot)),
        "curl": (deg["capB"] + deg["cupA"], (dot, dot)),
        "neck": (z, (deg["capA"] + dot + deg["cupB"], deg["capA"] + deg["cupB"] + dot)),
        "dd": (dot + dot, ()),
        "dm": (dot, (dot,)),
    }


def validate_homogeneity(deg: Dict[str, Bidegree]) -> None:
    for name, (lhs, rhs) in local_relation_degrees(deg).items():
        for r in rhs:
            if tuple(r) != tuple(lhs):
                raise RuleTableError(f"relation {name} is not homogeneous: {lhs} vs {r}")


def _units(*vals: RingElem) -> None:
    for v in vals:
        if not v.is_unit():
            raise RuleTableError(f"scalar {v} is not a unit")


def parse_table(data: dict, source: str = "<dict>") -> RuleTable:
    try:
        degrees = {k: _deg(v) for k, v in data["degrees"].items()}
        zig = {}
        for key, val in data["zigzag"].items():
            kind, side = key.split("_")
            zig[(kind, side)] = parse_elem(val)
        sphere, tube, curl, neck = (
            tuple(parse_elem(v) for v in data[key]) for key in ("sphere", "tube", "curl", "neck")
        )
        if not all(len(t) == 2 for t in (sphere, tube, curl, neck)):
            raise ValueError("sphere, tube, curl and neck take two entries each")
    except (KeyError, ValueError, TypeError, ParseError) as exc:
        raise RuleTableError(f"malformed rule table {source}: {exc}") from exc
    validate_degrees(degrees)
    validate_homogeneity(degrees)
    if set(zig) != {(k, s) for k in "AB" for s in ("left", "right")}:
        raise RuleTableError("zigzag table needs A_left, A_right, B_left, B_right")
    _units(*sphere, *zig.values(), *tube, *curl, *neck)
    return RuleTable(degrees, zig, sphere, tube, curl, neck, source)  # type: ignore[arg-type]


def load_table(path: str = "") -> RuleTable:
    if path:
        with open(path) as fh:
            return parse_table(json.load(fh), path)
    text = resources.files("ckh.data").joinpath(DEFAULT_TABLE).read_text()
    return parse_table(json.loads(text), DEFAULT_TABLE)


@lru_cache(maxsize=None)
def _cached(path: str) -> RuleTable:
    return load_table(path)


def active_table() -> RuleTable:
    return _cached(os.environ.get("KH_RULE_TABLE", ""))


def degree_table() -> Dict[str, Bidegree]:
    return active_table().degrees
