"""Command-line front end.

Verbs: ``kh``, ``oracle``, ``basis``, ``normalize``, ``euler``, ``compare``
and ``check``.  Diagram files hold one slice per line (``cup<i>``,
``cap<i>``, ``x+<i>``, ``x-<i>``).  Errors are reported as JSON on stdout
with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Dict, List, Optional, Sequence

from .complexes import (
    BigradedHomology,
    Complex,
    FoamMorphism,
    check_compatible,
    d_squared_zero,
    eliminate_all,
    koszul_cochain,
    random_cube,
    smith_homology,
    tensor,
    totalize,
)
from .errors import CKHError, ParseError
from .foams import parse_diagram
from .ring import SPECIALIZATIONS, format_elem, parse_elem
from .rules import active_table, local_relation_degrees, validate_homogeneity

SPEC_CHOICES = ("even", "odd", "covering-simplified")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _order(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParseError(f"bad crossing order {text!r}") from exc


# ---------------------------------------------------------------------------
# emitting


def homology_rows(h: BigradedHomology) -> List[Dict]:
    return h.to_json()


def table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(map(str, headers))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


def homology_table(h: BigradedHomology) -> str:
    rows = [
        (e["t"], e["q"], e["rank"], " ".join(f"Z/{x}" for x in e["torsion"]) or "-")
        for e in homology_rows(h)
    ]
    return table(("t", "q", "rank", "torsion"), rows)


def emit(result: Dict, fmt: str) -> str:
    """Serialize a result dictionary; ``table`` uses its ``"table"`` entry when present."""
    if fmt == "json":
        return json.dumps({k: v for k, v in result.items() if k != "table"}, sort_keys=True, indent=2)
    if "table" in result:
        return result["table"]
    return json.dumps(result, sort_keys=True, indent=2)


def foam_morphism_text(f: FoamMorphism) -> str:
    parts = []
    for c, sl in f.terms:
        parts.append(f"{format_elem(c)}*[{','.join(str(s) for s in sl)}]")
    return " + ".join(parts) or "0"


def complex_json(c: Complex) -> Dict:
    def obj_text(o):
        return str(o)

    def mor_text(f):
        return foam_morphism_text(f) if isinstance(f, FoamMorphism) else format_elem(f)

    return {
        "objects": {str(t): [obj_text(o) for o in objs] for t, objs in sorted(c.objects.items()) if objs},
        "differentials": {
            str(t): [{"row": i, "col": j, "value": mor_text(v)} for (i, j), v in sorted(dt.items())]
            for t, dt in sorted(c.d.items()) if dt
        },
    }


# ---------------------------------------------------------------------------
# verbs


def cmd_kh(args) -> Dict:
    from .pipeline import compute_ckh, module_complex, parse_sliced

    d = parse_sliced(_read(args.input))
    order = _order(args.crossing_order)
    if args.spec == "covering-simplified":
        if d.closed:
            _, c = module_complex(d, order)
            c = eliminate_all(c)
        else:
            c = compute_ckh(d, SPECIALIZATIONS["even"], order)
        out = {"spec": args.spec, "complex": complex_json(c)}
        out["table"] = json.dumps(out["complex"], sort_keys=True, indent=2)
        return out
    res = compute_ckh(d, SPECIALIZATIONS[args.spec], order)
    if isinstance(res, BigradedHomology):
        return {"spec": args.spec, "homology": res.to_json(), "table": homology_table(res)}
    cj = complex_json(res)
    return {"spec": args.spec, "complex": cj, "table": json.dumps(cj, sort_keys=True, indent=2)}


def _spec(args):
    if args.spec not in SPECIALIZATIONS:
        raise ParseError(f"{args.verb} needs --spec even or odd")
    return SPECIALIZATIONS[args.spec]


def cmd_oracle(args) -> Dict:
    from .pipeline import parse_sliced
    from .sl2 import kom_sl2

    d = parse_sliced(_read(args.input))
    h = smith_homology(totalize(kom_sl2(d, _order(args.crossing_order), args.flip_arc or ())), _spec(args))
    return {"spec": args.spec, "homology": h.to_json(), "table": homology_table(h)}


def cmd_basis(args) -> Dict:
    from .rewriter import hom_basis
    from .webs import identity, parse_web

    lines = [ln.strip() for ln in _read(args.input).splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or len(lines) > 2:
        raise ParseError("basis input holds one web (from the identity) or two webs")
    w = parse_web(lines[-1])
    w0 = parse_web(lines[0]) if len(lines) == 2 else identity(w.source)
    entries = [{"rep": str(k), "delta": sorted(k.delta), "qdeg": q} for k, q in hom_basis(w0, w)]
    rows = [(e["rep"], e["qdeg"]) for e in entries]
    return {"source": str(w0), "target": str(w), "basis": entries, "table": table(("rep", "qdeg"), rows)}


def cmd_normalize(args) -> Dict:
    from .rewriter import normalize

    terms = []
    for ln in _read(args.input).splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        coef, _, body = ln.rpartition("|")
        terms.append((parse_elem(coef.strip()) if coef.strip() else parse_elem("1"), parse_diagram(body)))
    vec = normalize(terms)
    return {"vector": vec.to_json(), "table": "\n".join(vec.lines()) or "0"}


def cmd_euler(args) -> Dict:
    from .pipeline import parse_sliced
    from .sl2 import kauffman_euler

    d = parse_sliced(_read(args.input))
    e = kauffman_euler(d)
    return {"euler": str(e), "coefficients": {str(q): c for (q, _), c in sorted(e.coeffs.items())}, "table": str(e)}


def diff_homology(a: BigradedHomology, b: BigradedHomology) -> List[Dict]:
    keys = sorted(set(a.groups) | set(b.groups))
    out = []
    for k in keys:
        x, y = a.groups.get(k, (0, ())), b.groups.get(k, (0, ()))
        if x != y:
            out.append({"t": k[0], "q": k[1], "pipeline": [x[0], list(x[1])], "oracle": [y[0], list(y[1])]})
    return out


def cmd_compare(args) -> Dict:
    from .pipeline import compute_ckh, parse_sliced
    from .sl2 import kom_sl2

    d = parse_sliced(_read(args.input))
    s = _spec(args)
    a = compute_ckh(d, s)
    b = smith_homology(totalize(kom_sl2(d)), s)
    diff = diff_homology(a, b)
    status = "MATCH" if not diff else "MISMATCH"
    rows = [(e["t"], e["q"], e["pipeline"], e["oracle"]) for e in diff]
    text = status if not diff else status + "\n" + table(("t", "q", "pipeline", "oracle"), rows)
    return {"status": status, "diff": diff, "table": text, "exit": 0 if not diff else 1}


def cmd_check(args) -> Dict:
    from .rewriter import confluence_fuzz

    seed, size = args.seed, args.size
    suites = {}
    rep = confluence_fuzz(seed=seed, size=size, count=args.count)
    suites["confluence"] = {"ok": rep.ok, "count": rep.count, "agreed": rep.agreed}
    table_ = active_table()
    validate_homogeneity(table_.degrees)
    suites["homogeneity"] = {"ok": True, "count": len(local_relation_degrees(table_.degrees))}
    rng = random.Random(seed)
    ok_c = ok_d = 0
    n_cubes = args.count
    for _ in range(n_cubes):
        n = rng.randint(1, 3)
        m = rng.randint(1, 5 - n)
        a, b = random_cube(rng, n), random_cube(rng, m)
        ok_c += check_compatible(koszul_cochain(a, b), a, b)
        ok_d += d_squared_zero(totalize(tensor(a, b)))
    suites["cochain"] = {"ok": ok_c == n_cubes, "count": n_cubes, "agreed": ok_c}
    suites["d_squared"] = {"ok": ok_d == n_cubes, "count": n_cubes, "agreed": ok_d}
    all_ok = all(s["ok"] for s in suites.values())
    rows = [(name, "pass" if s["ok"] else "FAIL", s["count"]) for name, s in suites.items()]
    return {
        "seed": seed,
        "size": size,
        "suites": suites,
        "ok": all_ok,
        "table": f"seed {seed} size {size}\n" + table(("suite", "status", "count"), rows),
        "exit": 0 if all_ok else 1,
    }


VERBS = {
    "kh": cmd_kh,
    "oracle": cmd_oracle,
    "basis": cmd_basis,
    "normalize": cmd_normalize,
    "euler": cmd_euler,
    "compare": cmd_compare,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ckh", description="Covering Khovanov homology of sliced tangle diagrams.")
    p.add_argument("verb", choices=sorted(VERBS))
    p.add_argument("--input", help="input file, or - for stdin")
    p.add_argument("--spec", choices=SPEC_CHOICES, default="even")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=8, help="slice bound for random diagrams")
    p.add_argument("--count", type=int, default=50, help="instances per randomized suite")
    p.add_argument("--flip-arc", type=int, action="append", help="crossing index (0-based) whose arc is reversed")
    p.add_argument("--crossing-order", help="permutation of crossing indices, e.g. '1 0 2'")
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb != "check" and not args.input:
            raise ParseError(f"{args.verb} needs --input")
        result = VERBS[args.verb](args)
    except (CKHError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True))
        return 2
    code = result.pop("exit", 0)
    print(emit(result, args.format))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
