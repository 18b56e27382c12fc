import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form

from ckh import complexes
from ckh.complexes import (
    BigradedHomology,
    Complex,
    CubeMap,
    FreeModule,
    Mat,
    ModuleBackend,
    ScalarBackend,
    anticommutation_failures,
    chain_euler,
    check_chain_map,
    check_compatible,
    check_homotopy,
    cochain_change_iso,
    coboundary,
    d_squared_zero,
    eliminate_all,
    gaussian_eliminate,
    induced_homotopy,
    induced_map,
    intertwines,
    koszul_cochain,
    one_cube,
    point_cube,
    random_chain_map,
    random_cube,
    random_homotopy,
    random_one_cube,
    smith_diagonal,
    smith_homology,
    squares,
    tensor,
    totalize,
    vertices,
)
from ckh.errors import DegreeDataMissing, IncompatibleCochain, NotAUnit
from ckh.ring import EVEN, ODD, ONE, X, Y, ZERO_DEG, Bidegree, mu

BK = ModuleBackend()
seeds = st.integers(0, 10 ** 6)
R0 = FreeModule((ZERO_DEG,))


def q_cube(rng, n):
    # edges of q-degree zero, as homology is taken per q-degree
    out = point_cube(BK, R0)
    while out.n < n:
        c = random_one_cube(rng)
        if c.psi[0].qdeg == 0:
            out = tensor(out, c)
    return out


def unit_cube(psi, entry=ONE):
    src = FreeModule((ZERO_DEG,))
    tgt = FreeModule((Bidegree(*psi),))
    return one_cube(BK, src, tgt, Mat(src, tgt, {(0, 0): entry}, Bidegree(*psi)), psi)


# Koszul cochain


def test_trivial_degrees_give_classical_signs():
    a, b = random_cube(random.Random(3), 2), unit_cube((0, 0))
    a.psi = (ZERO_DEG, ZERO_DEG)
    eps = koszul_cochain(a, b)
    for r in vertices(2):
        assert eps[(r + (0,), 2)] == (ONE if sum(r) % 2 == 0 else -ONE)
        for i in range(2):
            if r[i] == 0:
                assert eps[(r + (0,), i)] == ONE


def test_second_factor_edge_carries_minus_y():
    a, b = unit_cube((0, 1)), unit_cube((0, 1))
    eps = koszul_cochain(a, b)
    assert eps[((1, 0), 1)] == -Y
    assert eps[((0, 0), 1)] == ONE
    assert eps[((0, 0), 0)] == ONE


def test_mixed_square_needs_minus_mu():
    a, b = unit_cube((1, 0)), unit_cube((0, 1))
    eps = koszul_cochain(a, b)
    assert coboundary(eps, (0, 0), 0, 1) == -mu((1, 0), (0, 1))


def test_point_factor_cochain_is_trivial():
    a, b = point_cube(BK, R0), random_cube(random.Random(1), 2)
    eps = koszul_cochain(a, b)
    assert set(eps.values()) == {ONE}
    assert check_compatible(eps, a, b)


@given(seeds, st.integers(0, 3), st.integers(0, 3))
def test_standard_cochain_is_compatible(seed, n, m):
    rng = random.Random(seed)
    a, b = random_cube(rng, n), random_cube(rng, min(m, 5 - n))
    assert check_compatible(koszul_cochain(a, b), a, b)


def test_all_ones_cochain_fails_with_nontrivial_mu():
    a, b = unit_cube((1, 0)), unit_cube((0, 1))
    eps = {k: ONE for k in koszul_cochain(a, b)}
    assert not check_compatible(eps, a, b)
    with pytest.raises(IncompatibleCochain):
        tensor(a, b, eps)


def test_squares_count():
    assert len(list(squares(3))) == 3 * 2
    assert list(squares(1)) == []


# tensor products


def test_tensor_with_point_keeps_edges():
    a = random_cube(random.Random(5), 2)
    t = tensor(a, point_cube(BK, R0))
    assert t.n == 2 and t.psi == a.psi
    for key, f in a.edges.items():
        assert t.edges[(key[0], key[1])].entries == f.entries


@given(seeds)
@settings(max_examples=30)
def test_tensor_anticommutes(seed):
    rng = random.Random(seed)
    a, b, c = (random_cube(rng, rng.randint(0, 2)) for _ in range(3))
    t = tensor(tensor(a, b), c)
    assert anticommutation_failures(t) == []
    assert t.check_degrees()


@given(st.lists(st.tuples(st.integers(-1, 1), st.integers(-1, 1)), min_size=3, max_size=3))
def test_tensor_is_associative_up_to_cochain(degs):
    # on unit-entry 1-cubes each edge entry is its cochain value
    a, b, c = (unit_cube(d) for d in degs)
    left, right = tensor(tensor(a, b), c), tensor(a, tensor(b, c))
    assert left.objects == right.objects
    eps_l = {k: f.entries[(0, 0)] for k, f in left.edges.items()}
    eps_r = {k: f.entries[(0, 0)] for k, f in right.edges.items()}
    phi = cochain_change_iso(3, eps_l, eps_r)
    assert intertwines(phi, eps_l, eps_r, 3)


# cochain change


def test_cochain_change_identity():
    a, b = random_cube(random.Random(2), 1), random_cube(random.Random(4), 2)
    eps = koszul_cochain(a, b)
    phi = cochain_change_iso(3, eps, eps)
    assert set(phi.values()) == {ONE}


@given(seeds)
def test_cochain_change_recovers_gauge(seed):
    rng = random.Random(seed)
    a, b = random_cube(rng, 1), random_cube(rng, 2)
    eps = koszul_cochain(a, b)
    gauge = {v: complexes._random_unit(rng) for v in vertices(3)}
    from ckh.ring import unit_inverse

    eps2 = {(v, k): e * gauge[complexes.bump(v, k)] * unit_inverse(gauge[v]) for (v, k), e in eps.items()}
    assert check_compatible(eps2, a, b)
    phi = cochain_change_iso(3, eps, eps2)
    assert intertwines(phi, eps, eps2, 3)


def test_cochain_change_rejects_non_cocycle():
    a, b = unit_cube((1, 0)), unit_cube((0, 1))
    eps = koszul_cochain(a, b)
    bad = dict(eps)
    bad[((0, 0), 0)] = -ONE
    with pytest.raises(IncompatibleCochain):
        cochain_change_iso(2, eps, bad)


# induced maps and homotopies


def _pair(rng):
    a1 = random_one_cube(rng)
    a2 = random_one_cube(rng)
    b1, f1 = random_chain_map(rng, a1)
    b2, f2 = random_chain_map(rng, a2)
    return a1, a2, b1, b2, f1, f2


def _identity_map(a):
    comps = {(v, v): BK.identity(a.objects[v]) for v in vertices(a.n)}
    return CubeMap(comps, {k: ZERO_DEG for k in comps})


def test_identity_induces_identity():
    rng = random.Random(7)
    a1, a2 = random_one_cube(rng), random_one_cube(rng)
    f = induced_map(_identity_map(a1), _identity_map(a2), a1, a1, a2, a2)
    t = tensor(a1, a2)
    for v in vertices(2):
        assert f.components[(v, v)] == BK.identity(t.objects[v])
    assert check_chain_map(f, t, t)


@given(seeds)
@settings(max_examples=50)
def test_induced_map_is_chain_map(seed):
    rng = random.Random(seed)
    a1, a2, b1, b2, f1, f2 = _pair(rng)
    assert check_chain_map(f1, a1, b1) and check_chain_map(f2, a2, b2)
    f = induced_map(f1, f2, a1, b1, a2, b2)
    assert check_chain_map(f, tensor(a1, a2), tensor(b1, b2))


@given(seeds)
@settings(max_examples=50)
def test_induced_homotopy(seed):
    rng = random.Random(seed)
    a1, a2, b1, b2, f1, f2 = _pair(rng)
    h1, g1 = random_homotopy(rng, a1, b1, f1)
    h2, g2 = random_homotopy(rng, a2, b2, f2)
    assert check_homotopy(h1, f1, g1, a1, b1) and check_homotopy(h2, f2, g2, a2, b2)
    a, b = tensor(a1, a2), tensor(b1, b2)
    f, g = induced_map(f1, f2, a1, b1, a2, b2), induced_map(g1, g2, a1, b1, a2, b2)
    assert check_chain_map(g, a, b)
    h = induced_homotopy(h1, f2, g1, h2, a1, b1, a2, b2)
    assert check_homotopy(h, f, g, a, b)


def test_dropping_vertex_unit_breaks_chain_map(monkeypatch):
    # with the unit forced to 1 some instance must fail
    monkeypatch.setattr(complexes, "_eps_pair", lambda *args: ONE)
    rng = random.Random(11)
    failures = 0
    for _ in range(40):
        a1, a2, b1, b2, f1, f2 = _pair(rng)
        f = induced_map(f1, f2, a1, b1, a2, b2)
        failures += not check_chain_map(f, tensor(a1, a2), tensor(b1, b2))
    assert failures > 0


def test_missing_degree_raises():
    a1 = unit_cube((0, 1))
    m = CubeMap({((0,), (0,)): BK.identity(a1.objects[(0,)])}, {})
    with pytest.raises(DegreeDataMissing):
        induced_map(m, _identity_map(a1), a1, a1, a1, a1)


# totalization and elimination


@given(seeds, st.integers(1, 4))
@settings(max_examples=30)
def test_totalized_differential_squares_to_zero(seed, n):
    c = totalize(random_cube(random.Random(seed), n))
    assert isinstance(c.backend, ScalarBackend)
    assert d_squared_zero(c)


def test_totalize_point():
    c = totalize(point_cube(BK, FreeModule((Bidegree(1, 0), Bidegree(-1, 0)))))
    assert c.objects == {0: [1, -1]} and not any(c.d.values())


def test_eliminate_isomorphism_gives_zero():
    c = totalize(unit_cube((0, 0), entry=X))
    out = gaussian_eliminate(c, 0, 0, 0)
    assert out.complex.size() == 0
    assert out.pivot == (0, 0, 0)


def test_eliminate_non_unit_raises():
    c = totalize(unit_cube((0, 0), entry=ONE + X))
    with pytest.raises(NotAUnit):
        gaussian_eliminate(c, 0, 0, 0)


@given(seeds, st.integers(1, 3))
@settings(max_examples=30)
def test_elimination_preserves_homology(seed, n):
    rng = random.Random(seed)
    c = totalize(q_cube(rng, n))
    reduced = eliminate_all(c)
    assert d_squared_zero(reduced)
    assert chain_euler(reduced) == chain_euler(c)
    for s in (EVEN, ODD):
        assert smith_homology(reduced, s) == smith_homology(c, s)


def test_contractible_factor_kills_homology():
    rng = random.Random(9)
    c = totalize(tensor(q_cube(rng, 2), unit_cube((0, 0))))
    assert smith_homology(c, EVEN).groups == {}
    assert eliminate_all(c).size() == 0


# Smith form and homology


def test_smith_examples():
    assert smith_diagonal([[2, 4], [6, 8]]) == [2, 4]
    assert smith_diagonal([[0, 0], [0, 0]]) == []
    assert smith_diagonal([]) == []
    assert smith_diagonal([[1, 0], [0, 6], [0, 0]]) == [1, 6]


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=4))
def test_smith_matches_sympy(rows):
    ours = smith_diagonal(rows)
    snf = smith_normal_form(sympy.Matrix(rows), domain=sympy.ZZ)
    theirs = [abs(int(snf[i, i])) for i in range(min(snf.shape)) if snf[i, i] != 0]
    assert ours == theirs


def test_homology_of_point():
    c = totalize(point_cube(BK, FreeModule((Bidegree(1, 0),))))
    assert smith_homology(c, EVEN).groups == {(0, 1): (1, ())}


def test_multiplication_by_two_gives_torsion():
    c = Complex(ScalarBackend(), {0: [0], 1: [0]}, {0: {(0, 0): ONE + ONE}})
    h = smith_homology(c, EVEN)
    assert h.groups == {(1, 0): (0, (2,))}
    assert h.mod2() == {(0, 0): 1, (1, 0): 1}


def test_even_and_odd_can_differ():
    # ONE + Y is 2 in the even setting and 0 in the odd one
    c = Complex(ScalarBackend(), {0: [0], 1: [0]}, {0: {(0, 0): ONE + Y}})
    assert smith_homology(c, EVEN).groups == {(1, 0): (0, (2,))}
    assert smith_homology(c, ODD).groups == {(0, 0): (1, ()), (1, 0): (1, ())}
    assert smith_homology(c, EVEN).mod2() == smith_homology(c, ODD).mod2()


@given(seeds, st.integers(1, 3))
@settings(max_examples=30)
def test_ranks_match_rational_rank(seed, n):
    c = totalize(q_cube(random.Random(seed), n))
    h = smith_homology(c, EVEN)
    dz = complexes.specialize_complex(c, EVEN)
    total = sum(len(o) for o in c.objects.values())
    drank = 0
    for t, entries in dz.items():
        rows, cols = len(c.objects.get(t + 1, [])), len(c.objects[t])
        m = sympy.zeros(rows, cols)
        for (i, j), v in entries.items():
            m[i, j] = v
        drank += m.rank()
    assert sum(r for r, _ in h.groups.values()) == total - 2 * drank


def test_euler_of_homology_matches_chain():
    c = totalize(q_cube(random.Random(13), 3))
    assert smith_homology(c, EVEN).euler() == chain_euler(c)


def test_homology_json_roundtrip():
    h = BigradedHomology({(0, 1): (1, ()), (2, -3): (0, (2,)), (1, 1): (0, ())})
    assert (1, 1) not in h.groups
    assert BigradedHomology.from_json(h.to_json()) == h
    assert h.to_json()[0] == {"t": 0, "q": 1, "rank": 1, "torsion": []}


def test_smith_homology_needs_scalars():
    from ckh.errors import WeightMismatch

    c = Complex(BK, {0: [R0]}, {})
    with pytest.raises(WeightMismatch):
        smith_homology(c, EVEN)
