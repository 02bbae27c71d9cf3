import random

import pytest
from hypothesis import given, settings, strategies as st

from k3glue.catalog import K_TAGS, M_TAGS, build_F, build_K, build_M
from k3glue.lattice import Lattice
from k3glue.exactlin import mat_mul, transpose
from k3glue.roots import (
    AdeType,
    NotDefiniteError,
    ade_gram,
    ade_sum,
    enumerate_roots,
    format_ade_sum,
    from_epsilon,
    is_isometric,
    parse_ade_sum,
    root_decomposition,
    roots_by_orbit,
    weyl_basis_containment,
    weyl_group,
)

from oracles import roots_box


def test_gram_conventions():
    assert ade_gram("A1").gram == ((-2,),)
    assert ade_gram("A2").gram == ((-2, 1), (1, -2))
    g = ade_gram("D4").gram
    degrees = [sum(1 for j in range(4) if j != i and g[i][j]) for i in range(4)]
    assert sorted(degrees) == [1, 1, 1, 3]


def test_parse_and_format():
    types = parse_ade_sum("D5+A3^3+A2^2+A1")
    assert format_ade_sum(types) == "D5+A3^3+A2^2+A1"
    assert AdeType.parse("E8").rank == 8
    with pytest.raises(ValueError):
        AdeType.parse("D3")


def test_roots_A1_16():
    L = ade_sum(["A1"] * 16)
    assert len(enumerate_roots(L)) == 32


def test_roots_A2():
    # DERIVED: box enumeration
    assert len(roots_box([list(r) for r in ade_gram("A2").gram])) == 6
    assert len(enumerate_roots(ade_gram("A2"))) == 6


def test_roots_K_Z2_are_those_of_F():
    M = build_K("Z2")
    assert len(M.roots) == 32
    assert M.roots_coincide()


@pytest.mark.parametrize("t,count", [
    ("A1", 2), ("A3", 12), ("A5", 30), ("D4", 24), ("D5", 40), ("E6", 72), ("E7", 126), ("E8", 240)])
def test_root_counts(t, count):
    T = AdeType.parse(t)
    assert T.root_count == count
    fp = enumerate_roots(ade_gram(T))
    orbit = roots_by_orbit(T)
    assert len(fp) == len(orbit) == count
    assert fp.as_set() == orbit.as_set()


@pytest.mark.parametrize("t", ["A2", "A3", "D4", "A4"])
def test_roots_match_box_oracle(t):
    g = [list(r) for r in ade_gram(t).gram]
    assert enumerate_roots(ade_gram(t)).as_set() == roots_box(g)


def test_roots_need_definite_form():
    with pytest.raises(NotDefiniteError):
        enumerate_roots(Lattice(((2, 1), (1, -2))))


def test_decomposition_examples():
    assert format_ade_sum(root_decomposition(build_F("D12"))) == "D5+A3^3+A2^2+A1"
    assert root_decomposition(ade_gram("E8")) == [AdeType("E", 8)]
    assert format_ade_sum(root_decomposition(build_K("T").result)) == "E6+D4+A2^4+A1"


def _permuted(L, perm):
    g = [[L.gram[perm[i]][perm[j]] for j in range(L.rank)] for i in range(L.rank)]
    return Lattice(tuple(map(tuple, g)))


def test_isometric_fixtures():
    L = build_K("D8").result
    perm = list(range(L.rank))
    random.Random(1).shuffle(perm)
    assert is_isometric(L, _permuted(L, perm))
    assert not is_isometric(ade_sum(["A1", "A1"]), ade_gram("A2"))


def test_non_isometric_with_equal_disc():
    # E8 + A1 and A1 + E8 in different block order are isometric; D8 vs E8 are not
    assert is_isometric(ade_sum(["E8", "A1"]), ade_sum(["A1", "E8"]))
    assert not is_isometric(ade_gram("D8"), ade_gram("E8"))


# each isometry test on a rank 14 to 19 lattice costs about a second
@settings(max_examples=8)
@given(st.sampled_from(["K_Z4", "M_Z5", "M_Z3", "K_D12"]), st.randoms(use_true_random=False))
def test_isometry_reflexive_and_permutation_invariant(row, rnd):
    fam, tag = row.split("_", 1)
    L = (build_K(tag) if fam == "K" else build_M(tag)).result
    perm = list(range(L.rank))
    rnd.shuffle(perm)
    assert is_isometric(L, L)
    assert is_isometric(L, _permuted(L, perm))


@given(st.sampled_from(["A3+A1", "D4+A2", "A2+A2+A1"]),
       st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(-2, 2)), max_size=6))
def test_isometry_under_basis_change(t, ops):
    L = ade_sum(t.split("+"))
    n = L.rank
    m = [[int(i == j) for j in range(n)] for i in range(n)]
    for i, j, c in ops:
        i, j = i % n, j % n
        if i != j:
            m[i] = [a + c * b for a, b in zip(m[i], m[j])]
    L2 = Lattice(tuple(map(tuple, mat_mul(mat_mul(m, L.gram), transpose(m)))))
    assert is_isometric(L, L2)


def test_weyl_containment_D4_counterexample():
    D4 = AdeType("D", 4)
    roots = from_epsilon(D4, [(1, 1, 0, 0), (1, -1, 0, 0), (0, 0, 1, 1), (0, 0, 1, -1)])
    assert not weyl_basis_containment(D4, roots)


def test_weyl_containment_true_cases():
    A1 = AdeType("A", 1)
    assert weyl_basis_containment(A1, [(1,)])
    A3 = AdeType("A", 3)
    roots = from_epsilon(A3, [(1, -1, 0, 0), (0, 0, 1, -1)])
    assert weyl_basis_containment(A3, roots)


def test_weyl_containment_A3_brute_force():
    # DERIVED: |W(A3)| = 24, and some element sends the pair to simple roots
    A3 = AdeType("A", 3)
    W = weyl_group(A3)
    assert len(W) == 24
    roots = from_epsilon(A3, [(1, -1, 0, 0), (0, 0, 1, -1)])
    hits = 0
    for w in W:
        imgs = [tuple(sum(r[k] * w[k][j] for k in range(3)) for j in range(3)) for r in roots]
        if all(sum(abs(x) for x in v) == 1 for v in imgs):
            hits += 1
    assert hits > 0


def test_weyl_group_orders():
    assert len(weyl_group(AdeType("D", 4))) == 192
    assert len(weyl_group(AdeType("A", 2))) == 6


def test_weyl_rejects_non_roots():
    with pytest.raises(ValueError):
        weyl_basis_containment(AdeType("A", 2), [(1, 1, 0)])
    with pytest.raises(ValueError):
        weyl_basis_containment(AdeType("A", 2), [(1, 0), (0, 1)])


@pytest.mark.parametrize("row", [f"K_{t}" for t in K_TAGS] + [f"M_{t}" for t in M_TAGS])
def test_roots_even_and_negation_closed(row):
    fam, tag = row.split("_", 1)
    M = build_K(tag) if fam == "K" else build_M(tag)
    R = M.roots
    s = R.as_set()
    assert len(s) % 2 == 0
    assert all(tuple(-x for x in v) in s for v in s)
    assert M.roots_coincide()
