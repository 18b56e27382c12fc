"""Find neck-cutting coefficients consistent with the other loaded scalars.

Diagrams are evaluated symbolically with and without random neck cuts;
all scalars except the two neck coefficients are substituted from the
active table, and every candidate pair of units is tested.
"""

import itertools
import random
import sys
from collections import defaultdict

from ckh.evaluator import SCALAR_NAMES, Scalars, Strategy, SymbolicScalars, evaluate_terms, umul
from ckh.foams import random_closed_diagram
from ckh.rules import active_table

WEIGHTS = [(1, 1), (2,), (1, 1, 1), (2, 1), (1, 2), (1, 1, 1, 1), (2, 2), (1, 2, 1), (2, 1, 1), (1, 1, 2)]
NB, NA = SCALAR_NAMES.index("neck_below"), SCALAR_NAMES.index("neck_above")


def upow(u, n):
    out = (1, 0, 0, 0)
    for _ in range(n):
        out = umul(out, u)
    return out


def candidates(zr=2):
    for s, x, y in itertools.product((1, -1), (0, 1), (0, 1)):
        for z in range(-zr, zr + 1):
            yield (s, x, y, z)


def reduce_terms(terms, known):
    """Substitute known scalars; returns {(key, nb_exp, na_exp): {unit: count}}."""
    out = defaultdict(lambda: defaultdict(int))
    for key, (u, e) in terms:
        for j, name in enumerate(SCALAR_NAMES):
            if j not in (NB, NA):
                u = umul(u, upow(known[name], e[j]))
        out[(key, e[NB], e[NA])][u] += 1
    return out


def value(red, nb, na):
    acc = defaultdict(int)
    for (key, i, j), units in red.items():
        f = umul(upow(nb, i), upow(na, j))
        for u, n in units.items():
            acc[(key, umul(f, u))] += n
    res = defaultdict(int)
    for (key, (s, x, y, z)), n in acc.items():
        res[(key, x, y, z)] += s * n
    return {k: v for k, v in res.items() if v}


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 150
    rng = random.Random(1)
    table = active_table()
    known = Scalars(table).values
    sym = SymbolicScalars(table.degrees)
    cases = []
    while len(cases) < n:
        dg = random_closed_diagram(rng, rng.choice(WEIGHTS), rng.randint(3, 9))
        base = reduce_terms(evaluate_terms(dg, sym, Strategy()), known)
        cut = reduce_terms(evaluate_terms(dg, sym, Strategy(rng=random.Random(rng.random()), nc_rate=0.7)), known)
        if any(i or j for (_, i, j) in cut):
            cases.append((base, cut))
    ok = []
    for nb in candidates():
        for na in candidates():
            if all(value(b, nb, na) == value(c, nb, na) for b, c in cases):
                ok.append((nb, na))
    print(len(cases), "diagrams with cuts;", len(ok), "consistent neck pairs")
    for nb, na in ok:
        print("  neck_below", nb, "neck_above", na)


if __name__ == "__main__":
    main()
