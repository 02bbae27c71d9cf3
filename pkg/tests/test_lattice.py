import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from k3glue.catalog import ROW_IDS, build_F, build_K, build_row
from k3glue.lattice import (
    Lattice,
    LatticeError,
    SchemaError,
    direct_sum,
    disc_form_value,
    discriminant_group,
    dual_basis,
    dumps_canonical,
    group_structure,
    invariant_factors_of,
    lattice_from_json,
    lattice_to_json,
    length,
    load_lattice,
    mod2,
)
from k3glue.roots import ade_gram, ade_sum

from oracles import dual_cosets, invariant_factors_sympy

F = Fraction


def test_dual_basis_A1():
    assert dual_basis(ade_gram("A1")) == [(F(-1, 2),)]


def test_dual_basis_A2():
    # DERIVED: 2x2 inverse
    assert dual_basis(ade_gram("A2")) == [(F(-2, 3), F(-1, 3)), (F(-1, 3), F(-2, 3))]


def test_dual_basis_E8_integral():
    assert all(x.denominator == 1 for row in dual_basis(ade_gram("E8")) for x in row)


def test_disc_A1():
    D = discriminant_group(ade_gram("A1"))
    assert D.invariant_factors == (2,)
    assert D.q_values == (F(3, 2),)


def test_disc_F_D8p():
    assert discriminant_group(build_F("D8p")).invariant_factors == (2,) * 11


def test_disc_K_D12():
    D = build_K("D12").result.discriminant_group
    assert group_structure(D.invariant_factors) == "(Z/12)^2 x Z/2"


def test_disc_values():
    A3 = ade_gram("A3")
    D = discriminant_group(A3)
    assert disc_form_value(A3, D.zero()) == 0
    assert disc_form_value(A3, (F(1, 4), F(2, 4), F(3, 4))) == mod2(F(-3, 4))
    assert disc_form_value(ade_gram("A1"), (F(1, 2),)) == mod2(F(-1, 2))


def test_length_examples():
    assert length(ade_gram("E8")) == 0
    assert length(build_F("Z4")) == 10
    assert build_F("Z4").rank == 18
    assert length(build_K("D8").result) == 3


def test_direct_sum():
    A = ade_gram("A1")
    S = direct_sum(A, A)
    assert S.rank == 2 and S.det == 4
    Z4 = build_F("Z4")
    # DERIVED: multiplicativity of the determinant
    assert abs(Z4.det) == 4**4 * 2**6 == 2**14
    T = build_F("T")
    assert T.rank == 19


def test_degenerate_rejected():
    with pytest.raises(LatticeError):
        Lattice(((1, 1), (1, 1)))
    with pytest.raises(LatticeError):
        Lattice(((0, 1), (2, 0)))


@pytest.mark.parametrize("t", ["A1", "A2", "A3", "D4", "A1+A2"])
def test_disc_enumeration_matches_oracle(t):
    L = ade_sum(t.split("+"))
    D = L.discriminant_group
    # DERIVED: brute-force enumeration of L^v/L
    reps = dual_cosets([list(r) for r in L.gram])
    assert len(reps) == D.order
    assert {e.vector for e in D.elements()} == reps


def test_invariant_factors_of():
    assert invariant_factors_of([4, 6, 2]) == (2, 2, 12)
    assert invariant_factors_of([3, 3]) == (3, 3)
    assert invariant_factors_of([1]) == ()


def test_json_round_trip():
    L = ade_gram("A1")
    text = dumps_canonical(lattice_to_json(L))
    assert dumps_canonical(lattice_to_json(load_lattice(text))) == text


@pytest.mark.parametrize("obj,path", [
    ({"name": "x", "rank": 2, "gram": [[-2]]}, "$.gram"),
    ({"name": "x", "rank": 1}, "$.gram"),
    ({"name": "x", "rank": 1, "gram": [[-2.5]]}, "$.gram[0][0]"),
    ({"name": "x", "rank": 2, "gram": [[-2, 1], [0, -2]]}, "$.gram[1][0]"),
    ({"name": "x", "rank": 1, "gram": [[-2]], "extra": 1}, "$.extra"),
    ({"name": "x", "rank": 1, "gram": [[0]]}, "$.gram"),
])
def test_schema_errors(obj, path):
    with pytest.raises(SchemaError) as exc:
        lattice_from_json(obj)
    assert exc.value.path == path


def test_bad_json_text():
    with pytest.raises(SchemaError):
        load_lattice("{not json")


def _catalog_lattices():
    out = []
    for row in ROW_IDS:
        M = build_row(row)
        out += [M.base, M.result]
    return out


def test_invariant_factor_product_is_det():
    for L in _catalog_lattices():
        D = L.discriminant_group
        assert D.order == abs(L.det)


def test_invariant_factors_agree_with_sympy_on_catalog():
    for row in ("K_Z2", "K_D12", "M_Z8", "M_Z2xZ6"):
        L = build_row(row).result
        got = [x for x in invariant_factors_sympy([list(r) for r in L.gram]) if x != 1]
        assert tuple(got) == L.discriminant_group.invariant_factors


def test_length_subadditive():
    lats = [ade_sum(t.split("+")) for t in ("A1+A1+A1", "A2+A2", "A4", "D4", "A3+A1")]
    lats.append(build_row("M_Z2").result)
    for a in lats:
        for b in lats:
            assert length(direct_sum(a, b)) <= length(a) + length(b)
    # one prime: length adds up
    two = [lats[0], lats[3], lats[4], lats[5]]
    for a in two:
        for b in two:
            assert length(direct_sum(a, b)) == length(a) + length(b)


@given(st.integers(0, 2**32), st.sampled_from(["K_Z4", "K_D12", "M_Z6", "M_Z8", "K_T"]))
def test_disc_form_well_defined(seed, row):
    rng = random.Random(seed)
    L = build_row(row).result
    D = L.discriminant_group
    x, y = D.random_element(rng), D.random_element(rng)
    s = D.add(x, y)
    assert mod2(D.q(s) - D.q(x) - D.q(y) - 2 * D.b(x, y)) == 0
    assert D.q(D.scale(-1, x)) == D.q(x)
    # representatives may be shifted by lattice vectors
    shift = tuple(a + rng.randrange(-3, 4) for a in x.vector)
    assert D.q(shift) == D.q(x)
    assert D.coordinates(shift) == x.coords


def test_json_catalog_fixture_disc():
    K = build_K("D8").result
    L = load_lattice(json.dumps(lattice_to_json(K)))
    assert L.discriminant_group.invariant_factors == (4, 4, 4)
