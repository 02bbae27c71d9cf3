from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from k3glue.lattice import LatticeError, mod2
from k3glue.nsclassify import (
    TRIVIAL_ONLY,
    PolarizedExtensionProblem,
    classify,
    classify_extensions,
    evenness_congruence,
    polarization_feasibility,
)
from k3glue.overlattice import is_primitive_sublattice
from k3glue.roots import ade_sum


def problem(d, row="M_Z3"):
    return PolarizedExtensionProblem.from_catalog(row, 2 * d)


def brute_count(P, n=3):
    """Elements m of order n in disc(N) with 2d/n^2 + q(m) even."""
    D = P.N.discriminant_group
    return sum(1 for e in D.elements()
               if D.order_of(e) == n and mod2(Fraction(P.degree, n * n) + D.q(e)) == 0)


@pytest.mark.parametrize("d", [1, 2, 4, 5, 7])
def test_d_not_divisible_by_3(d):
    assert classify_extensions(problem(d)) == []
    c = classify(problem(d))
    assert c.trivial_only and c.note.startswith(TRIVIAL_ONLY)


def test_d_0_mod_9():
    (c,) = classify_extensions(problem(9))
    assert c.label == "H/3 + d_{1} + d_{2} + d_{3}"
    assert c.coefficients == (1, 1, 1, 0, 0, 0)


def test_d_3_mod_9():
    (c,) = classify_extensions(problem(3))
    assert c.label == "H/3 + d_{1} + d_{2} + 2d_{3} + 2d_{4}"


def test_d_6_mod_9():
    (c,) = classify_extensions(problem(6))
    assert c.label == "H/3 + d_{1} + 2d_{2}"


@pytest.mark.parametrize("d", [3, 6, 9, 12, 27])
def test_orbits_cover_all_solutions(d):
    # DERIVED: direct count over disc(M_Z3)
    P = problem(d)
    assert sum(c.orbit_size for c in classify_extensions(P)) == brute_count(P)


def test_known_representatives():
    (c9,) = classify_extensions(problem(9))
    # the glue of M_Z3 moves (1,1,1,0,0,0) to (2,2,2,1,1,1) and (1,2,0,0,0,0) to (2,0,1,1,1,1)
    assert c9.contains((2, 2, 2, 1, 1, 1))
    (c6,) = classify_extensions(problem(6))
    assert c6.contains((2, 0, 1, 1, 1, 1))
    assert not c6.contains((1, 1, 1, 0, 0, 0))


@pytest.mark.parametrize("d", [3, 6, 9])
def test_extension_is_even_and_primitive(d):
    for c in classify_extensions(problem(d)):
        v = c.verify()
        assert v == {"even": True, "N_primitive": True, "h_primitive": True, "index": True}
        X = c.overlattice()
        assert X.result.is_even
        r = c.problem.N.rank
        rows = [X.transport([int(i == j + 1) for i in range(r + 1)]) for j in range(r)]
        assert is_primitive_sublattice(c.problem.N, X.result, rows)


def test_output_depends_only_on_d_mod_9():
    by_residue = {}
    for d in range(1, 46):
        out = [c.coefficients for c in classify_extensions(problem(d))]
        by_residue.setdefault(d % 9, set()).add(tuple(out))
    assert all(len(v) == 1 for v in by_residue.values())


def test_evenness_congruence():
    assert evenness_congruence(problem(9), 3)
    assert evenness_congruence(problem(6), 2)
    assert not evenness_congruence(problem(1), 0)
    with pytest.raises(ValueError):
        evenness_congruence(problem(9), 7)
    with pytest.raises(LatticeError):
        evenness_congruence(problem(1, "M_Z2"), 0)


@settings(max_examples=30)
@given(st.integers(1, 60), st.integers(0, 6))
def test_evenness_congruence_formula(d, k):
    assert evenness_congruence(problem(d), k) == ((2 * d - 6 * k) % 18 == 0)


def test_problem_validation():
    N = ade_sum(["A2"] * 6)
    with pytest.raises(ValueError):
        PolarizedExtensionProblem(N, 3)
    with pytest.raises(ValueError):
        PolarizedExtensionProblem(N, -2)
    with pytest.raises(ValueError):
        classify(PolarizedExtensionProblem(N, 18, p=4))


def test_plain_lattice_without_presentation():
    # A2^6 without glue has more symmetry classes than M_Z3
    P = PolarizedExtensionProblem(ade_sum(["A2"] * 6), 18)
    classes = classify_extensions(P)
    assert len(classes) == 2
    assert sum(c.orbit_size for c in classes) == brute_count(P)


def test_json_shape():
    js = classify(problem(9)).to_json()
    assert js["residue"] == {"modulus": 9, "d_mod": 0}
    assert js["classes"][0]["orbit_size"] == 20


def test_feasibility_K_Z2():
    r = polarization_feasibility("K_Z2", 4)
    assert r.length_bound == 22 - 17 == 5
    assert r.extensions[0].index == 1
    assert any(e.length_ok for e in r.extensions)
    assert all(e.length <= 5 for e in r.extensions if e.length_ok)


def test_feasibility_M_Z3():
    r = polarization_feasibility("M_Z3", 2)
    assert [e.index for e in r.extensions] == [1]
    r = polarization_feasibility("M_Z3", 18)
    assert [e.index for e in r.extensions] == [1, 3]
    assert r.moduli_dimension == 22 - 2 - 13
