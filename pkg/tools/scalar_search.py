"""Solve for the local scalars that make closed evaluation strategy-independent.

Every closed diagram is swept with symbolic scalars under a deterministic
and several random strategies.  Matching monomials give multiplicative
equations in the unknown units, solved over the unit group
(sign, X, Y: Z/2 each; Z-exponent: Z).
"""

import random
import sys
from collections import defaultdict

import sympy

from ckh.evaluator import SCALAR_NAMES, Strategy, SymbolicScalars, evaluate_terms
from ckh.foams import random_closed_diagram
from ckh.rules import active_table

WEIGHTS = [(1, 1), (2,), (1, 1, 1), (2, 1), (1, 2), (1, 1, 1, 1), (2, 2), (1, 2, 1), (2, 1, 1), (1, 1, 2)]


def collect(n_diagrams, seed, nc_rate):
    rng = random.Random(seed)
    sc = SymbolicScalars(active_table().degrees)
    eqs, structural = set(), 0
    for _ in range(n_diagrams):
        w = rng.choice(WEIGHTS)
        dg = random_closed_diagram(rng, w, rng.randint(3, 9))
        base = defaultdict(list)
        for key, coef in evaluate_terms(dg, sc, Strategy()):
            base[key].append(coef)
        for _ in range(3):
            st = Strategy(rng=random.Random(rng.random()), nc_rate=nc_rate)
            other = defaultdict(list)
            for key, coef in evaluate_terms(dg, sc, st):
                other[key].append(coef)
            for key in set(base) | set(other):
                a, b = base.get(key, []), other.get(key, [])
                if len(a) == 1 and len(b) == 1:
                    (u0, e0), (u1, e1) = a[0], b[0]
                    de = tuple(p - q for p, q in zip(e0, e1))
                    rhs = (0 if u0[0] == u1[0] else 1, (u1[1] - u0[1]) % 2, (u1[2] - u0[2]) % 2, u1[3] - u0[3])
                    if any(de) or any(rhs):
                        eqs.add((de, rhs))
                elif len(a) != len(b):
                    structural += 1
    return eqs, structural


def solve_mod2(rows):
    """Row-reduce [A | b] over GF(2); returns (pivots, reduced rows) or None if inconsistent."""
    rows = [list(r) for r in rows]
    n = len(SCALAR_NAMES)
    piv, r = [], 0
    for col in range(n):
        k = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                rows[i] = [(p + q) % 2 for p, q in zip(rows[i], rows[r])]
        piv.append(col)
        r += 1
    for row in rows[r:]:
        if row[n]:
            return None
    return piv, rows[:r]


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 300
    nc = float(sys.argv[2]) if len(sys.argv) > 2 else 0.3
    eqs, structural = collect(n, 0, nc)
    print(f"{len(eqs)} equations, {structural} structural mismatches")
    for comp, name in ((0, "sign"), (1, "X"), (2, "Y")):
        res = solve_mod2([[v % 2 for v in de] + [rhs[comp]] for de, rhs in eqs])
        if res is None:
            print(name, "INCONSISTENT")
            continue
        piv, rows = res
        print(name, "rank", len(piv))
        for row in rows:
            lhs = " + ".join(SCALAR_NAMES[j] for j in range(len(SCALAR_NAMES)) if row[j])
            print("   ", lhs, "=", row[-1])
    A = sympy.Matrix([list(de) for de, _ in eqs])
    b = sympy.Matrix([rhs[3] for _, rhs in eqs])
    M = A.row_join(b).rref()[0]
    print("Z rank", A.rank(), "augmented", A.row_join(b).rank())
    for i in range(M.rows):
        row = M.row(i)
        if any(row):
            lhs = " + ".join(f"{row[j]}*{SCALAR_NAMES[j]}" for j in range(len(SCALAR_NAMES)) if row[j])
            print("   ", lhs, "=", row[-1])


if __name__ == "__main__":
    main()
