import random

import pytest

from k3glue.catalog import (
    K_TAGS,
    M_TAGS,
    ROW_IDS,
    SEARCH_ROWS,
    CatalogError,
    build_E,
    build_F,
    build_K,
    build_M,
    build_counterexample_H_Z2,
    catalog_entry,
    derive_glue,
    embed_sublattice,
    frozen_glue,
    markdown_table,
    rows_for_group,
    verify_catalog_row,
    verify_with_glue,
    wendland_correction_D8p,
    wendland_correction_D12,
)
from k3glue.divisibility import DivisibilityConstraints
from k3glue.overlattice import embeddability_length_check, glue_subgroup
from k3glue.roots import format_ade_sum, root_decomposition
from k3glue.symmetry import canonical_key, structure_of

from oracles import det_sympy


def test_row_ids():
    assert len(K_TAGS) == 8 and len(M_TAGS) == 14
    assert len(ROW_IDS) == 22
    assert rows_for_group("D12") == ["K_D12"]
    assert rows_for_group("Z4") == ["K_Z4", "M_Z4"]
    with pytest.raises(CatalogError):
        rows_for_group("Z9")


def test_build_F_E():
    F = build_F("D12")
    assert format_ade_sum(structure_of(F).types) == "D5+A3^3+A2^2+A1" and F.rank == 19
    E = build_E("Z7")
    assert format_ade_sum(structure_of(E).types) == "A6^3" and E.rank == 18
    assert format_ade_sum(structure_of(build_F("Z2")).types) == "A1^16"
    with pytest.raises(CatalogError):
        build_F("Z5")
    with pytest.raises(CatalogError):
        build_E("D8")


def test_build_K_examples():
    M = build_K("D8")
    assert M.index == 2**3 and M.result.discriminant_group.invariant_factors == (4, 4, 4)
    M = build_K("Z3")
    assert M.index == 3**3 and M.result.discriminant_group.invariant_factors == (3, 3, 3)


def test_K_Z3_contains_given_glue():
    from k3glue.catalog import _glue_K_Z3_given

    M = build_K("Z3")
    struct = structure_of(M.base)
    H = glue_subgroup(M)
    for v in _glue_K_Z3_given(M.base):
        assert struct.element_of(v) in H


def test_K_Z6_disc_as_computed():
    # DERIVED: d(F_Z6) = 6 * 3^4 * 2^5 and index 6 leave a group of order 216 * 6
    M = build_K("Z6")
    assert M.index == 6
    assert abs(det_sympy([list(r) for r in M.base.gram])) == 6 * 3**4 * 2**5
    assert M.result.discriminant_group.invariant_factors == (2, 6, 6, 6)
    assert verify_catalog_row("K_Z6").failed_fields() == ["disc"]


def test_build_M_examples():
    M = build_M("Z2")
    assert M.index == 2 and M.result.discriminant_group.invariant_factors == (2,) * 6
    assert [sum(1 for x in v.coords if x) for v in M.glue] == [8]
    M = build_M("Z3xZ3")
    assert M.index == 9 and M.result.rank == 16
    assert M.result.discriminant_group.invariant_factors == (3,) * 4
    M = build_M("Z2xZ6")
    assert M.index == 12 and M.result.rank == 18
    assert M.result.discriminant_group.invariant_factors == (2, 6)


@pytest.mark.parametrize("row", [r for r in ROW_IDS if r != "K_Z6"])
def test_rows_verify(row):
    rep = verify_catalog_row(row)
    assert rep.ok, rep.failed_fields()


def test_row_Z4_fields():
    rep = verify_catalog_row("K_Z4")
    assert rep.check("rank").computed == 18
    assert rep.check("index").computed == 2**4
    assert rep.check("disc").computed == "(Z/4)^2 x (Z/2)^2"
    # DERIVED: 4 * 12 + 6 * 2
    assert rep.check("root_count").computed == 60


def test_row_D8p_roots():
    # DERIVED: four D4 summands with 24 roots each and three A1 summands
    assert verify_catalog_row("K_D8p").check("root_count").computed == 4 * 24 + 3 * 2


def test_row_T():
    rep = verify_catalog_row("K_T")
    assert [rep.check(f).computed for f in ("rank", "index", "disc")] == [19, 3, "(Z/6)^3"]


def test_corrupted_glue_names_row():
    M = build_K("D12")
    bad = [tuple(x + (1 if i == 0 else 0) / 2 for i, x in enumerate(v.coords)) for v in M.glue]
    rep = verify_with_glue("K_D12", bad)
    assert not rep.ok and rep.row == "K_D12"
    assert rep.failed_fields() == ["glue"]
    assert "K_D12" in markdown_table([rep])


def test_D8p_correction():
    c = wendland_correction_D8p()
    assert c.support_size == 6 and len(c.witness_labels) == 6
    assert c.rejected
    assert all(c.given_glue_pass)
    # DERIVED: all 7 nonzero classes of disc(K_D8') tried
    assert len(c.extensions) == 7 and c.no_admissible_extension
    assert max(e[2] for e in c.extensions) <= 6


def test_D12_correction():
    c = wendland_correction_D12()
    assert c.candidate_length == 5 and c.bound == 3
    assert not c.candidate_passes
    assert c.kummer_length == 3 and c.kummer_passes


def test_counterexample_H_Z2():
    h = build_counterexample_H_Z2()
    assert h.index == 2**6
    # DERIVED: 2^16 / d(H) = 2^12
    assert 2**16 // abs(det_sympy([list(r) for r in h.overlattice.result.gram])) == 2**12
    assert h.root_count > 32
    assert h.root_count == 96
    assert h.witness_norm == -2


@pytest.mark.parametrize("row", ROW_IDS)
def test_det_relation_and_length_bound(row):
    e = catalog_entry(row)
    M = e.build()
    assert abs(M.base.det) == M.index**2 * abs(M.result.det)
    assert embeddability_length_check(M.result)


def test_embeddings():
    for sub, amb in (("M_Z3xZ3", "K_Z3"), ("M_Z4", "K_Z4")):
        e = embed_sublattice(sub, amb)
        assert e.ok


def test_frozen_glue_provenance():
    for row in SEARCH_ROWS:
        assert catalog_entry(row).origin == "search"
        assert frozen_glue(row)


@pytest.mark.parametrize("row", ["M_Z3xZ3", "M_Z2xZ2", "M_Z4xZ4"])
def test_frozen_glue_matches_fresh_search(row):
    d = derive_glue(row)
    assert d.unique
    struct = structure_of(catalog_entry(row).root_lattice)
    fresh = struct.span(struct.element_of(v) for v in d.candidates[0])
    assert canonical_key(struct, fresh) == canonical_key(struct, glue_subgroup(catalog_entry(row).build()))


def test_decomposition_of_built_M():
    assert format_ade_sum(root_decomposition(build_M("Z8").result)) == "A7^2+A3+A1"


def test_unknown_row():
    with pytest.raises(CatalogError):
        verify_catalog_row("K_Z5")


def test_random_disc_sample_q_even_on_glue():
    rng = random.Random(7)
    for row in ("K_Z2", "M_Z6"):
        M = build_M(row[2:]) if row[0] == "M" else build_K(row[2:])
        D = M.base.discriminant_group
        for v in M.glue:
            assert D.q(v.coords) == 0
        D = M.result.discriminant_group
        x = D.random_element(rng)
        assert D.order_of(x) in (1, 2, 3, 6)
