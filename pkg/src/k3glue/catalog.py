"""The named lattices as executable data.

``K_G`` is the Kummer-type overlattice of the curve lattice ``F_G`` of a
quotient ``A/G`` of an Abelian surface; ``M_G`` is the Nikulin-type
overlattice of ``E_G`` for a symplectic Abelian group ``G`` on a K3
surface.  Row ids are ``K_<tag>`` and ``M_<tag>``.

Glue is written with the discriminant classes ``d_i`` used by hand for
each lattice.  Rows whose glue is only determined up to symmetry are
found once by a constrained search and then read from ``data/glue.json``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import isqrt
from typing import Iterable, Sequence

from .divisibility import DivisibilityCode, DivisibilityConstraints, check_code
from .lattice import Lattice, LatticeError, group_structure, mod2, rational_from_json, rational_to_json
from .overlattice import (
    GlueError,
    GlueVector,
    Overlattice,
    build_overlattice,
    embeddability_length_check,
    glue_subgroup,
    is_primitive_sublattice,
    validate_glue,
)
from .roots import AdeType, ade_sum, enumerate_roots, format_ade_sum, is_isometric, parse_ade_sum
from .symmetry import GlueStructure, admissible_elements, canonical_key, search_subgroups, structure_of

DATA_VERSION = 1

ABELIAN_ON_K3 = "abelian-on-K3"
ON_ABELIAN_SURFACE = "action-on-abelian-surface"


class CatalogError(LatticeError):
    pass


@dataclass(frozen=True)
class GroupTag:
    name: str
    kind: str
    gap_id: str | None = None  # metadata only


@dataclass(frozen=True)
class Expected:
    index: int
    rank: int
    disc: tuple[int, ...]  # invariant factors, ascending

    def disc_str(self) -> str:
        return group_structure(self.disc)


@dataclass(frozen=True)
class _Row:
    family: str  # "K" or "M"
    tag: str
    root_type: str
    expected: Expected
    glue_group: tuple[int, ...]  # invariant factors of the glue subgroup


_GAP = {
    "Z2": "(2,1)", "Z3": "(3,1)", "Z4": "(4,1)", "Z5": "(5,1)", "Z6": "(6,2)", "Z7": "(7,1)",
    "Z8": "(8,1)", "Z2xZ2": "(4,2)", "Z2xZ2xZ2": "(8,5)", "Z2^4": "(16,14)", "Z2xZ4": "(8,2)",
    "Z2xZ6": "(12,5)", "Z3xZ3": "(9,2)", "Z4xZ4": "(16,2)",
    "D8": "(8,4)", "D8p": "(8,4)", "D12": "(12,1)", "T": "(24,3)",
}

K_TAGS = ("Z2", "Z3", "Z4", "Z6", "D8", "D8p", "D12", "T")
M_TAGS = ("Z2", "Z3", "Z4", "Z5", "Z6", "Z7", "Z8", "Z2xZ2", "Z2xZ2xZ2", "Z2^4",
          "Z2xZ4", "Z2xZ6", "Z3xZ3", "Z4xZ4")

_ROWS: dict[str, _Row] = {}


def _add(family, tag, root_type, index, rank, disc, glue_group=()):
    _ROWS[f"{family}_{tag}"] = _Row(family, tag, root_type, Expected(index, rank, tuple(disc)), tuple(glue_group))


_add("K", "Z2", "A1^16", 2**5, 16, (2,) * 6, (2,) * 5)
_add("K", "Z3", "A2^9", 3**3, 18, (3,) * 3, (3,) * 3)
_add("K", "Z4", "A3^4+A1^6", 2**4, 18, (2, 2, 4, 4), (2, 2, 4))
_add("K", "Z6", "A5+A2^4+A1^5", 6, 18, (6,) * 4, (6,))
_add("K", "D8", "D4^2+A3^3+A1^2", 2**3, 19, (4,) * 3, (2, 4))
_add("K", "D8p", "D4^4+A1^3", 2**4, 19, (2,) * 3, (2,) * 4)
_add("K", "D12", "D5+A3^3+A2^2+A1", 4, 19, (2, 12, 12), (4,))
_add("K", "T", "E6+D4+A2^4+A1", 3, 19, (6,) * 3, (3,))

_add("M", "Z2", "A1^8", 2, 8, (2,) * 6, (2,))
_add("M", "Z3", "A2^6", 3, 12, (3,) * 4, (3,))
_add("M", "Z4", "A3^4+A1^2", 4, 14, (2, 2, 4, 4), (4,))
_add("M", "Z5", "A4^4", 5, 16, (5, 5), (5,))
_add("M", "Z6", "A5^2+A2^2+A1^2", 6, 16, (6, 6), (6,))
_add("M", "Z7", "A6^3", 7, 18, (7,), (7,))
_add("M", "Z8", "A7^2+A3+A1", 8, 18, (2, 4), (8,))
_add("M", "Z2xZ2", "A1^12", 2**2, 12, (2,) * 8, (2, 2))
_add("M", "Z2xZ2xZ2", "A1^14", 2**3, 14, (2,) * 8, (2, 2, 2))
_add("M", "Z2^4", "A1^15", 2**4, 15, (2,) * 7, (2, 2, 2, 2))
_add("M", "Z2xZ4", "A3^4+A1^4", 8, 16, (2, 2, 4, 4), (2, 4))
_add("M", "Z2xZ6", "A5^3+A1^3", 12, 18, (2, 6), (2, 6))
_add("M", "Z3xZ3", "A2^8", 3**2, 16, (3,) * 4, (3, 3))
_add("M", "Z4xZ4", "A3^6", 4**2, 18, (4, 4), (4, 4))

ROW_IDS = tuple(_ROWS)


def group_tag(name: str, kind: str) -> GroupTag:
    tags = K_TAGS if kind == ON_ABELIAN_SURFACE else M_TAGS if kind == ABELIAN_ON_K3 else ()
    if name not in tags:
        raise CatalogError(f"no {kind} group tagged {name!r}")
    return GroupTag(name, kind, _GAP.get(name))


def rows_for_group(tag: str) -> list[str]:
    out = [r for r in ROW_IDS if _ROWS[r].tag == tag]
    if not out:
        raise CatalogError(f"unknown group tag {tag!r}")
    return out


def _row(row: str) -> _Row:
    try:
        return _ROWS[row]
    except KeyError:
        raise CatalogError(f"unknown catalog row {row!r}") from None


# --- curve labels ---------------------------------------------------------


def _K(point: str, sup=None) -> str:
    s = f"K_{{{point}}}"
    return s if sup is None else s + f"^{{({sup})}}"


_D4_ORDER = (1, 0, 2, 3)  # outer, centre, outer, outer
_A3_CENTRE = (1, 0, 2)


def _d4(point):
    return [_K(point, j) for j in _D4_ORDER]


def _a3_centre(point):
    return [_K(point, j) for j in _A3_CENTRE]


def _labels(family: str, tag: str) -> list[str]:
    if family == "M":
        types = parse_ade_sum(_ROWS[f"M_{tag}"].root_type)
        if all(t == AdeType("A", 1) for t in types):
            return [f"M_{{{i}}}" for i in range(1, len(types) + 1)]
        out = []
        for j, t in enumerate(types, 1):
            out += [f"M_{{{i}}}^{{({j})}}" for i in range(1, t.n + 1)]
        return out
    if tag == "Z2":
        return [f"K_{{{i}}}" for i in range(1, 17)]
    if tag == "Z3":
        return [f"a_{{{i}}}^{{({j})}}" for j in range(1, 10) for i in (1, 2)]
    if tag == "Z4":
        return [f"a_{{{i}}}^{{({j})}}" for j in range(1, 5) for i in (1, 2, 3)] + [
            f"a^{{({j})}}" for j in range(5, 11)]
    if tag == "Z6":
        out = [f"K_{{1}}^{{({j})}}" for j in range(1, 6)]
        out += [f"K_{{{i}}}^{{({j})}}" for i in range(2, 6) for j in (1, 2)]
        return out + [f"K_{{{i}}}^{{(1)}}" for i in range(6, 11)]
    if tag == "D8":
        out = _d4("(0,0)") + _d4("((1+i)/2,(1+i)/2)")
        for p in ("(1/2,1/2)", "(0,(1+i)/2)", "(1/2,i/2)"):
            out += _a3_centre(p)
        return out + [_K("(1/2,0)", 0), _K("((1+i)/2,1/2)", 0)]
    if tag == "D8p":
        out = []
        for p in ("(0,0)", "((1+i)/2,0)", "(i/2,i/2)", "(1/2,i/2)"):
            out += _d4(p)
        return out + [_K("(1/2,0)", 0), _K("((1+i)/4,(1+i)/4)", 0), _K("((1+i)/4,(i-1)/4)", 0)]
    if tag == "D12":
        out = [_K("(0,0)", j) for j in (4, 0, 2, 1, 3)]
        for p in ("(1/2,1/2)", "(zeta_3/2,zeta_3/2)", "((1+zeta_3)/2,(1+zeta_3)/2)"):
            out += [_K(p, j) for j in (1, 2, 3)]
        for p in ("(0,(1-zeta_3)/3)", "((1-zeta_3)/3,(1-zeta_3)/3)"):
            out += [_K(p, j) for j in (1, 2)]
        return out + [_K("(0,1/2)")]
    if tag == "T":
        out = ["e_3", "e_1", "e_2", "e_0", "e_4", "e_5", "f_1", "f_0", "f_2", "f_3"]
        out += [f"a_{{{i}}}^{{({h})}}" for h in range(2, 6) for i in (1, 2)]
        return out + ["a^{(1)}"]
    raise CatalogError(f"no labels for {family}_{tag}")


@lru_cache(maxsize=None)
def _root_lattice(row: str) -> Lattice:
    r = _row(row)
    name = ("F_" if r.family == "K" else "E_") + r.tag
    return ade_sum(parse_ade_sum(r.root_type), _labels(r.family, r.tag), name)


def build_F(tag: str) -> Lattice:
    if tag not in K_TAGS:
        raise CatalogError(f"{tag!r} is not a quotient of an Abelian surface (F_G is for {', '.join(K_TAGS)})")
    return _root_lattice(f"K_{tag}")


def build_E(tag: str) -> Lattice:
    if tag not in M_TAGS:
        raise CatalogError(f"{tag!r} is not an Abelian symplectic group on a K3 surface")
    return _root_lattice(f"M_{tag}")


# --- explicit glue ----------------------------------------------------------

F = Fraction


def _lin(L: Lattice, *terms) -> tuple[Fraction, ...]:
    """``sum c * d`` for (c, d) pairs, each d a ``{label: coefficient}`` map."""
    v = [F(0)] * L.rank
    for c, d in terms:
        for lab, x in d.items():
            v[L.index_of(lab)] += c * F(x)
    return tuple(v)


def _half(*labels) -> dict:
    return {lab: F(1, 2) for lab in labels}


def _a3_class(labels) -> dict:
    return {lab: F(k, 4) for k, lab in enumerate(labels, 1)}


def _a2_class(l1, l2) -> dict:
    return {l1: F(1, 3), l2: F(2, 3)}


def _glue_K_Z3_given(L: Lattice) -> list[tuple[Fraction, ...]]:
    def a(i, j):
        return f"a_{{{i}}}^{{({j})}}"

    def diff(j, s=1):
        return (s * F(1, 3), {a(1, j): 1, a(2, j): -1})

    v1 = _lin(L, *(diff(j) for j in range(1, 7)))
    v2 = _lin(L, diff(1), diff(2), diff(3, -1), diff(4, -1), diff(7), diff(8))
    return [v1, v2]


def _glue_K_Z4(L: Lattice) -> list[tuple[Fraction, ...]]:
    d = {j: _a3_class([f"a_{{{i}}}^{{({j})}}" for i in (1, 2, 3)]) for j in range(1, 5)}
    d.update({j: _half(f"a^{{({j})}}") for j in range(5, 11)})
    v1 = _lin(L, *((1, d[j]) for j in range(1, 11)))
    v2 = _lin(L, (2, d[1]), (2, d[2]), (1, d[5]), (1, d[6]), (1, d[7]), (1, d[8]))
    v3 = _lin(L, (2, d[1]), (2, d[3]), (1, d[7]), (1, d[8]), (1, d[9]), (1, d[10]))
    return [v1, v2, v3]


def _glue_K_Z6(L: Lattice) -> list[tuple[Fraction, ...]]:
    a5 = {f"K_{{1}}^{{({j})}}": F(j, 6) for j in range(1, 6)}
    a2 = [_a2_class(f"K_{{{i}}}^{{(1)}}", f"K_{{{i}}}^{{(2)}}") for i in range(2, 6)]
    a1 = _half(*(f"K_{{{i}}}^{{(1)}}" for i in range(6, 11)))
    return [_lin(L, (1, a5), *((1, x) for x in a2), (1, a1))]


def _d8_classes():
    c, s = "(0,0)", "((1+i)/2,(1+i)/2)"
    return {
        1: _half(_K(c, 1), _K(c, 2)),
        2: _half(_K(c, 1), _K(c, 3)),
        3: _half(_K(s, 1), _K(s, 2)),
        4: _half(_K(s, 1), _K(s, 3)),
        5: _half(_K("(1/2,0)", 0)),
        6: _half(_K("((1+i)/2,1/2)", 0)),
        7: _a3_class([_K("(1/2,1/2)", j) for j in _A3_CENTRE]),
        8: _a3_class([_K("(0,(1+i)/2)", j) for j in _A3_CENTRE]),
        9: _a3_class([_K("(1/2,i/2)", j) for j in _A3_CENTRE]),
    }


def _glue_K_D8(L: Lattice) -> list[tuple[Fraction, ...]]:
    d = _d8_classes()
    return [
        _lin(L, (1, d[1]), (1, d[3]), (2, d[7]), (2, d[8])),
        _lin(L, (1, d[2]), (1, d[4]), (2, d[8]), (2, d[9])),
        _lin(L, (1, d[1]), (1, d[3]), (2, d[9]), (1, d[5]), (1, d[6])),
    ]


def _d8p_classes():
    out = {}
    for k, p in enumerate(("(0,0)", "((1+i)/2,0)", "(i/2,i/2)", "(1/2,i/2)")):
        out[2 * k + 1] = _half(_K(p, 1), _K(p, 2))
        out[2 * k + 2] = _half(_K(p, 1), _K(p, 3))
    out[9] = _half(_K("(1/2,0)", 0))
    out[10] = _half(_K("((1+i)/4,(1+i)/4)", 0))
    out[11] = _half(_K("((1+i)/4,(i-1)/4)", 0))
    return out


def _glue_K_D8p(L: Lattice) -> list[tuple[Fraction, ...]]:
    d = _d8p_classes()

    def s(*ix):
        return _lin(L, *((1, d[i]) for i in ix))

    return [s(1, 3, 5, 7), s(2, 4, 6, 8), s(1, 3, 4, 6, 9, 10), s(1, 4, 7, 8, 9, 11)]


def _d12_classes():
    c = "(0,0)"
    a3 = [[_K(p, j) for j in (1, 2, 3)]
          for p in ("(1/2,1/2)", "(zeta_3/2,zeta_3/2)", "((1+zeta_3)/2,(1+zeta_3)/2)")]
    a2 = [(_K(p, 1), _K(p, 2)) for p in ("(0,(1-zeta_3)/3)", "((1-zeta_3)/3,(1-zeta_3)/3)")]
    d1 = {_K(c, 4): F(2, 4), _K(c, 1): F(1, 4), _K(c, 2): F(2, 4), _K(c, 3): F(3, 4)}
    d2 = {**_a3_class(a3[0]), **_a2_class(*a2[0])}
    d3 = {**_a3_class(a3[1]), **_a2_class(*a2[1])}
    d4 = _a3_class(a3[2])
    d5 = _half(_K("(0,1/2)"))
    return {1: d1, 2: d2, 3: d3, 4: d4, 5: d5}


def _v_D12(L: Lattice) -> tuple[Fraction, ...]:
    d = _d12_classes()
    return _lin(L, (1, d[1]), (9, d[2]), (9, d[3]), (1, d[4]), (1, d[5]))


def _t_classes():
    return {
        1: {"e_3": F(1, 3), "e_2": F(2, 3), "e_4": F(1, 3), "e_5": F(2, 3), **_half("f_1", "f_2")},
        2: {**_a2_class("a_{1}^{(2)}", "a_{2}^{(2)}"), **_half("f_1", "f_3")},
        3: {**_a2_class("a_{1}^{(3)}", "a_{2}^{(3)}"), **_half("a^{(1)}")},
        4: _a2_class("a_{1}^{(4)}", "a_{2}^{(4)}"),
        5: _a2_class("a_{1}^{(5)}", "a_{2}^{(5)}"),
    }


def _glue_K_T(L: Lattice) -> list[tuple[Fraction, ...]]:
    d = _t_classes()
    return [_lin(L, (4, d[1]), (4, d[2]), (4, d[3]), (1, d[4]), (1, d[5]))]


def _glue_M_Z2(L: Lattice) -> list[tuple[Fraction, ...]]:
    return [tuple(F(1, 2) for _ in range(L.rank))]


_EXPLICIT = {
    "K_Z4": _glue_K_Z4,
    "K_Z6": _glue_K_Z6,
    "K_D8": _glue_K_D8,
    "K_D8p": _glue_K_D8p,
    "K_D12": lambda L: [_v_D12(L)],
    "K_T": _glue_K_T,
    "M_Z2": _glue_M_Z2,
}

# rows completed or found by search; K_Z3 keeps its two given classes
SEARCH_ROWS = tuple(r for r in ROW_IDS if r not in _EXPLICIT)


# --- constrained search and frozen data -------------------------------------


@dataclass(frozen=True)
class DerivedGlue:
    row: str
    candidates: tuple[tuple[tuple[Fraction, ...], ...], ...]  # glue generators, one entry per symmetry class

    @property
    def unique(self) -> bool:
        return len(self.candidates) == 1

    def diagnostic(self) -> str:
        if self.unique:
            return f"{self.row}: one candidate class"
        return f"{self.row}: {len(self.candidates)} candidate classes match the expected row"


def _divides(m: int):
    return lambda n: m % n == 0


def _matches(struct: GlueStructure, L: Lattice, H, r: _Row) -> tuple[bool, Overlattice | None]:
    if len(H) != r.expected.index or struct.group_invariants(H) != r.glue_group:
        return False, None
    M = build_overlattice(L, [struct.vector(g) for g in struct.generators(H)])
    ok = M.result.rank == r.expected.rank and M.result.discriminant_group.invariant_factors == r.expected.disc
    return ok, M


def derive_glue(row: str) -> DerivedGlue:
    """Rerun the constrained search behind a search-derived row.

    Candidates are root-preserving isotropic glue subgroups obeying the
    divisibility constraints whose group, index and discriminant group
    match the row.  For ``K_Z3`` the two given classes are completed.
    """
    r = _row(row)
    if row not in SEARCH_ROWS:
        raise CatalogError(f"{row} has explicit glue")
    L = _root_lattice(row)
    struct = structure_of(L)
    allowed = admissible_elements(struct, supports=DivisibilityConstraints().supports())
    found = []
    if row == "K_Z3":
        base = struct.span(struct.element_of(v) for v in _glue_K_Z3_given(L))
        if not base - {struct.zero} <= allowed:
            raise CatalogError("the given K_Z3 classes are not admissible")
        seen = set()
        for x in sorted(allowed - base):
            H = struct.extend(base, x, allowed | {struct.zero})
            if H is None or H in seen:
                continue
            seen.add(H)
            ok, _ = _matches(struct, L, H, r)
            if ok:
                third = min(H - base)
                found.append((H, [struct.vector(third)]))
        # completions are distinct subgroups; keep the symmetry classes (with base fixed, all are listed)
        keys = {}
        for H, gens in found:
            keys.setdefault(canonical_key(struct, H), (H, gens))
        given = _glue_K_Z3_given(L)
        cands = [tuple(given + gens) for _, (H, gens) in sorted(keys.items(), key=lambda kv: sorted(kv[1][0]))]
        return DerivedGlue(row, tuple(cands))
    res = search_subgroups(struct, allowed, order_filter=_divides(r.expected.index))
    for H in res.subgroups:
        ok, _ = _matches(struct, L, H, r)
        if ok:
            found.append(tuple(struct.vector(g) for g in struct.generators(H)))
    return DerivedGlue(row, tuple(found))


def freeze_data(rows: Iterable[str] = SEARCH_ROWS) -> dict:
    """Search every derived row and return the data file contents.

    A row with zero or several candidate classes is an error: nothing is
    silently chosen.
    """
    out = {"version": DATA_VERSION, "rows": {}}
    for row in rows:
        dg = derive_glue(row)
        if not dg.unique:
            raise CatalogError(dg.diagnostic())
        out["rows"][row] = {"glue": [rational_to_json(v) for v in dg.candidates[0]]}
    return out


@lru_cache(maxsize=1)
def _frozen() -> dict:
    text = resources.files("k3glue").joinpath("data/glue.json").read_text()
    obj = json.loads(text)
    if obj.get("version") != DATA_VERSION:
        raise CatalogError(f"catalog data version {obj.get('version')} is not {DATA_VERSION}")
    return obj["rows"]


def frozen_glue(row: str) -> list[tuple[Fraction, ...]]:
    rows = _frozen()
    if row not in rows:
        raise CatalogError(f"no frozen glue for {row}")
    return [rational_from_json(v, f"$.rows.{row}.glue[{i}]") for i, v in enumerate(rows[row]["glue"])]


# --- entries ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    row: str
    tag: GroupTag
    root_lattice: Lattice
    glue: tuple[GlueVector, ...]
    expected: Expected
    origin: str  # "explicit" or "search"

    def build(self) -> Overlattice:
        name = ("K_" if self.row.startswith("K") else "M_") + self.tag.name
        return build_overlattice(self.root_lattice, self.glue, name)


@lru_cache(maxsize=None)
def catalog_entry(row: str) -> CatalogEntry:
    r = _row(row)
    L = _root_lattice(row)
    if row in _EXPLICIT:
        vs, origin = _EXPLICIT[row](L), "explicit"
    else:
        vs, origin = frozen_glue(row), "search"
    kind = ON_ABELIAN_SURFACE if r.family == "K" else ABELIAN_ON_K3
    glue = tuple(GlueVector(L, v) for v in vs)
    return CatalogEntry(row, group_tag(r.tag, kind), L, glue, r.expected, origin)


@lru_cache(maxsize=None)
def _built(row: str) -> Overlattice:
    return catalog_entry(row).build()


def build_row(row: str) -> Overlattice:
    _row(row)
    return _built(row)


def build_K(tag: str) -> Overlattice:
    if tag not in K_TAGS:
        raise CatalogError(f"{tag!r} has no Kummer-type lattice")
    return _built(f"K_{tag}")


def build_M(tag: str) -> Overlattice:
    if tag not in M_TAGS:
        raise CatalogError(f"{tag!r} has no Nikulin-type lattice")
    return _built(f"M_{tag}")


# --- verification -----------------------------------------------------------


@dataclass(frozen=True)
class Check:
    field: str
    expected: object
    computed: object
    ok: bool


@dataclass(frozen=True)
class RowReport:
    row: str
    root_type: str
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed_fields(self) -> list[str]:
        return [c.field for c in self.checks if not c.ok]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.field == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "row": self.row,
            "root_lattice": self.root_type,
            "verdict": "pass" if self.ok else "fail",
            "checks": [{"field": c.field, "expected": _js(c.expected), "computed": _js(c.computed),
                        "verdict": "pass" if c.ok else "fail"} for c in self.checks],
        }


def _js(x):
    if isinstance(x, tuple):
        return [_js(y) for y in x]
    if isinstance(x, Fraction):
        return str(x)
    return x


def verify_entry(entry: CatalogEntry) -> RowReport:
    """Check an entry against its expected row; failures name the field."""
    L = entry.root_lattice
    exp = entry.expected
    root_type = format_ade_sum(structure_of(L).types)
    val = validate_glue(L, entry.glue)
    if not val:
        return RowReport(entry.row, root_type, (Check("glue", "isotropic", "; ".join(val.diagnostics), False),))
    try:
        M = entry.build()
    except GlueError as exc:
        return RowReport(entry.row, root_type, (Check("glue", "even overlattice", str(exc), False),))
    K = M.result
    dF, dK = abs(L.det), abs(K.det)
    q, rem = divmod(dF, dK)
    r = isqrt(q) if not rem and isqrt(q) ** 2 == q else None
    disc = K.discriminant_group.invariant_factors
    nF, nK = len(M.base_roots), len(M.roots)
    checks = [
        Check("rank", exp.rank, K.rank, exp.rank == K.rank),
        Check("index", exp.index, r if r is not None else f"{dF}/{dK}", r == exp.index == M.index),
        Check("disc", exp.disc_str(), group_structure(disc), disc == exp.disc),
        Check("det_relation", f"{dF} = r^2 * {dK}", f"{dF} = {M.index}^2 * {dK}", dF == M.index**2 * dK),
        Check("root_count", nF, nK, nF == nK),
        Check("root_sets", True, M.roots_coincide(), M.roots_coincide()),
        Check("length_bound", f"<= {22 - K.rank}", K.discriminant_group.length,
              embeddability_length_check(K)),
    ]
    return RowReport(entry.row, root_type, tuple(checks))


def verify_catalog_row(row: str) -> RowReport:
    """Verify one row, given as ``K_<tag>``/``M_<tag>``."""
    return verify_entry(catalog_entry(row))


def verify_with_glue(row: str, vectors: Sequence[Sequence]) -> RowReport:
    """Verify a row against replacement glue, e.g. a deliberately broken one."""
    base = catalog_entry(row)
    L = base.root_lattice
    try:
        glue = tuple(GlueVector(L, v) for v in vectors)
    except GlueError as exc:
        return RowReport(row, format_ade_sum(structure_of(L).types), (Check("glue", "dual vectors", str(exc), False),))
    return verify_entry(CatalogEntry(row, base.tag, L, glue, base.expected, "override"))


def markdown_table(reports: Sequence[RowReport]) -> str:
    head = "| row | root lattice | rank | r | disc | roots | verdict |\n|---|---|---|---|---|---|---|"
    lines = [head]
    for rep in reports:
        if len(rep.checks) == 1:
            lines.append(f"| {rep.row} | {rep.root_type} | | | | | fail ({rep.checks[0].field}) |")
            continue
        c = {x.field: x for x in rep.checks}
        verdict = "pass" if rep.ok else "fail: " + ", ".join(rep.failed_fields())
        lines.append(
            f"| {rep.row} | {rep.root_type} | {c['rank'].computed} | {c['index'].computed} | "
            f"{c['disc'].computed} | {c['root_count'].computed} | {verdict} |"
        )
    return "\n".join(lines)


# --- corrections to earlier descriptions and the counterexample --------------


@dataclass(frozen=True)
class D8pCorrection:
    """Certificate that a glue class of six curves divided by 2 is impossible."""

    witness: tuple[Fraction, ...]  # over the basis of F_D8'
    witness_labels: tuple[str, ...]  # curves carrying the half-integral coefficients
    support_size: int
    witness_q: Fraction
    code_passes: bool  # check_code on the single word of the witness
    given_glue_pass: tuple[bool, ...]  # v1'..v4' each satisfy the divisibility constraint
    extensions: tuple[tuple[tuple[int, ...], Fraction, int, bool], ...]  # (delta coeffs, q, support, admissible)

    @property
    def rejected(self) -> bool:
        return not self.code_passes

    @property
    def no_admissible_extension(self) -> bool:
        return not any(e[3] for e in self.extensions)


def _half_support(L: Lattice, v: Sequence[Fraction]) -> tuple[str, ...]:
    struct = structure_of(L)
    x = struct.element_of(v)
    rep = struct.vector(x)
    return tuple(L.label(i) for i, a in enumerate(rep) if a == F(1, 2))


def wendland_correction_D8p() -> D8pCorrection:
    """Go through disc(K_D8') over the basis delta_1', delta_2', delta_3'.

    Every class is carried by at most seven curves and none is even.  The
    witness is the first class, in the order delta_1', delta_2', ...,
    whose half-curve support has six curves.
    """
    L = build_F("D8p")
    d = _d8p_classes()
    deltas = [_lin(L, *((1, d[i]) for i in ix)) for ix in ((2, 3, 4, 5), (3, 4, 6, 7), (4, 5, 6, 7, 11))]
    struct = structure_of(L)
    Hk = glue_subgroup(build_K("D8p"))
    weights = DivisibilityConstraints().allowed[2]
    given = tuple(struct.support(struct.element_of(v), 2) in weights for v in _glue_K_D8p(L))
    ext = []
    witness = None
    combos = sorted((c for c in itertools.product((0, 1), repeat=3) if any(c)),
                    key=lambda c: (sum(c), [-x for x in c]))
    for coeffs in combos:
        v = tuple(sum((c * dv[i] for c, dv in zip(coeffs, deltas)), F(0)) for i in range(L.rank))
        x = struct.element_of(v)
        # smallest curve support over the coset of the glue
        coset = [struct.add(x, h) for h in Hk]
        best = min(struct.support(y, 2) for y in coset)
        q = mod2(L.norm(v))
        ext.append((coeffs, q, best, q == 0 and best in weights))
        if best == 6 and witness is None:
            witness = struct.vector(min(y for y in coset if struct.support(y, 2) == 6))
    if witness is None:
        raise CatalogError("no six-curve class in disc(K_D8')")
    labels = _half_support(L, witness)
    code = DivisibilityCode.from_supports(len(labels), [range(len(labels))])
    return D8pCorrection(witness, labels, len(labels), mod2(L.norm(witness)), check_code(code), given, tuple(ext))


@dataclass(frozen=True)
class D12Correction:
    candidate_disc: tuple[int, ...]
    candidate_length: int
    candidate_passes: bool
    kummer_length: int
    kummer_passes: bool
    rank: int

    @property
    def bound(self) -> int:
        return 22 - self.rank


def wendland_correction_D12() -> D12Correction:
    """The 2-divisible candidate ``F_D12 + 2 v_D12`` against the length bound."""
    L = build_F("D12")
    v = _v_D12(L)
    cand = build_overlattice(L, [tuple(2 * x for x in v)], "Pi_D12").result
    K = build_K("D12").result
    dg = cand.discriminant_group
    return D12Correction(dg.invariant_factors, dg.length, embeddability_length_check(cand),
                         K.discriminant_group.length, embeddability_length_check(K), cand.rank)


@dataclass(frozen=True, eq=False)
class CounterexampleHZ2:
    overlattice: Overlattice
    witness: tuple[Fraction, ...]  # a root of H outside F, over the basis of F
    witness_norm: Fraction

    @property
    def index(self) -> int:
        return self.overlattice.index

    @property
    def root_count(self) -> int:
        return len(self.overlattice.roots)


def build_counterexample_H_Z2() -> CounterexampleHZ2:
    """``A1^16`` glued by the four quadruples and two octads: index 2^6 with new roots."""
    L = build_F("Z2")

    def half(ix):
        return tuple(F(1, 2) if i + 1 in ix else F(0) for i in range(16))

    vs = [half(range(4 * j + 1, 4 * j + 5)) for j in range(4)]
    vs.append(half((1, 2, 5, 6, 9, 10, 13, 14)))
    vs.append(half((1, 3, 5, 7, 9, 11, 13, 15)))
    H = build_overlattice(L, vs, "H_Z2")
    w = vs[0]
    if L.norm(w) != -2 or H.transport_rational(w) is None:
        raise CatalogError("expected (K_1+K_2+K_3+K_4)/2 to be a root of H")
    return CounterexampleHZ2(H, w, L.norm(w))


# --- primitive embeddings M_G -> K_G' --------------------------------------------


@dataclass(frozen=True, eq=False)
class SublatticeEmbedding:
    sub_row: str
    ambient_row: str
    blocks: tuple[int, ...]  # summands of the ambient root lattice that are kept
    inclusion: tuple[tuple[int, ...], ...]  # basis of the sublattice in ambient coordinates
    sublattice: Lattice
    primitive: bool
    isometric: bool

    @property
    def ok(self) -> bool:
        return self.primitive and self.isometric


def _saturation(entry_row: str, keep: Sequence[int]):
    M = _built(entry_row)
    L = M.base
    struct = structure_of(L)
    H = glue_subgroup(M)
    keep = tuple(keep)
    sub = [h for h in H if all(h[i] == 0 for i in range(len(h)) if i not in keep)]
    coords = [i for b in keep for i in range(struct.offsets[b], struct.offsets[b] + struct.types[b].n)]
    E = ade_sum([struct.types[b] for b in keep])
    sstruct = structure_of(E)
    gens = sstruct.generators(frozenset(tuple(h[b] for b in keep) for h in sub))
    S = build_overlattice(E, [sstruct.vector(g) for g in gens])
    rows = []
    for b in S.basis:
        x = [F(0)] * L.rank
        for c, val in zip(coords, b):
            x[c] = val
        y = M.transport_rational(x)
        if y is None:
            raise CatalogError("saturated sublattice has a non-integral image")
        rows.append(y)
    return S.result, tuple(rows)


def embed_sublattice(sub_row: str, ambient_row: str) -> SublatticeEmbedding:
    """Find summands of the ambient root lattice whose saturation in the
    ambient overlattice is isometric to the sub row, and check primitivity."""
    target = _built(sub_row).result
    want = sorted(structure_of(_root_lattice(sub_row)).types)
    types = structure_of(_root_lattice(ambient_row)).types
    K = _built(ambient_row).result
    for keep in itertools.combinations(range(len(types)), len(want)):
        if sorted(types[b] for b in keep) != want:
            continue
        S, rows = _saturation(ambient_row, keep)
        if S.discriminant_group.invariant_factors != target.discriminant_group.invariant_factors:
            continue
        if not is_isometric(S, target):
            continue
        prim = is_primitive_sublattice(S, K, rows)
        return SublatticeEmbedding(sub_row, ambient_row, keep, rows, S, prim, True)
    raise CatalogError(f"no summands of {ambient_row} saturate to {sub_row}")
