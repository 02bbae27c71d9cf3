"""Finite-index overlattices from glue vectors.

An even overlattice ``M`` of ``L`` corresponds to an isotropic subgroup
``H`` of ``disc(L)``; then ``[M : L] = |H|`` and ``d(L) = [M : L]^2 d(M)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .divisibility import DivisibilityConstraints
from .exactlin import (
    common_denominator,
    determinant,
    hermite_normal_form,
    mat_mul,
    rational_inverse,
    reduce_mod_one,
    smith_normal_form,
    transpose,
)
from .lattice import Lattice, LatticeError, mod1, mod2
from .roots import RootSet, enumerate_roots
from .symmetry import (
    SearchOverflowError,
    admissible_elements,
    canonical_key,
    search_subgroups,
    structure_of,
)

__all__ = [
    "GlueError",
    "GlueVector",
    "GlueValidation",
    "Overlattice",
    "SearchOverflowError",
    "validate_glue",
    "build_overlattice",
    "is_primitive_sublattice",
    "embeddability_length_check",
    "minimal_root_preserving_overlattices",
    "glue_subgroup",
    "glue_key",
]


class GlueError(LatticeError):
    pass


@dataclass(frozen=True, eq=False)
class GlueVector:
    """A class of ``L^v / L``, stored by its representative in [0,1)^n."""

    base: Lattice
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        c = tuple(Fraction(x) for x in self.coords)
        if len(c) != self.base.rank:
            raise GlueError(f"glue vector has {len(c)} coordinates, lattice rank is {self.base.rank}")
        if not self.base.in_dual(c):
            raise GlueError(f"vector {_fmt(c)} is not in the dual lattice")
        object.__setattr__(self, "coords", reduce_mod_one(c))

    @classmethod
    def from_labels(cls, base: Lattice, coeffs: dict) -> "GlueVector":
        return cls(base, base.vector(coeffs))

    def __eq__(self, other):
        return isinstance(other, GlueVector) and self.base == other.base and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __add__(self, other: "GlueVector") -> "GlueVector":
        return GlueVector(self.base, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __rmul__(self, k: int) -> "GlueVector":
        return GlueVector(self.base, tuple(k * a for a in self.coords))

    @property
    def q(self) -> Fraction:
        return mod2(self.base.norm(self.coords))

    @property
    def order(self) -> int:
        return common_denominator(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)


def _fmt(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


@dataclass(frozen=True)
class GlueValidation:
    ok: bool
    diagnostics: tuple[str, ...] = ()
    offending: tuple[Fraction, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def _as_vector(L: Lattice, v) -> tuple[Fraction, ...]:
    if isinstance(v, GlueVector):
        return v.coords
    return GlueVector(L, v).coords


def validate_glue(L: Lattice, vs: Sequence) -> GlueValidation:
    """Is the subgroup generated by ``vs`` isotropic for the discriminant form?

    It is enough to test ``q`` on generators and ``b`` on pairs of them.
    """
    vecs = [_as_vector(L, v) for v in vs]
    for i, v in enumerate(vecs):
        q = mod2(L.norm(v))
        if q:
            return GlueValidation(False, (f"generator {i} has q = {q} mod 2, not 0",), v)
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            b = mod1(L.inner(vecs[i], vecs[j]))
            if b:
                s = tuple(a + c for a, c in zip(vecs[i], vecs[j]))
                return GlueValidation(
                    False, (f"generators {i} and {j} pair to b = {b} mod 1, not 0",), reduce_mod_one(s)
                )
    return GlueValidation(True)


@dataclass(frozen=True, eq=False)
class Overlattice:
    base: Lattice
    glue: tuple[GlueVector, ...]
    result: Lattice
    basis: tuple[tuple[Fraction, ...], ...]  # basis of M over the basis of L
    inclusion: tuple[tuple[int, ...], ...]  # row i = basis vector i of L in M coordinates
    index: int

    def transport(self, x: Sequence) -> tuple:
        """Coordinates in ``M`` of a vector given over the basis of ``L``."""
        n = self.result.rank
        out = [0] * n
        for xi, row in zip(x, self.inclusion):
            if xi:
                for j in range(n):
                    out[j] += xi * row[j]
        return tuple(out)

    def transport_rational(self, x: Sequence) -> tuple[int, ...] | None:
        """Like ``transport`` for a rational vector; None if it is not in ``M``."""
        n = self.result.rank
        out = [Fraction(0)] * n
        for xi, row in zip(x, self.inclusion):
            if xi:
                for j in range(n):
                    out[j] += xi * row[j]
        if any(y.denominator != 1 for y in out):
            return None
        return tuple(int(y) for y in out)

    def to_base(self, y: Sequence) -> tuple[Fraction, ...]:
        n = self.base.rank
        out = [Fraction(0)] * n
        for yi, row in zip(y, self.basis):
            if yi:
                for j in range(n):
                    out[j] += yi * row[j]
        return tuple(out)

    @cached_property
    def roots(self) -> RootSet:
        return enumerate_roots(self.result)

    @cached_property
    def base_roots(self) -> RootSet:
        return enumerate_roots(self.base)

    def transported_base_roots(self) -> frozenset:
        return frozenset(self.transport(r) for r in self.base_roots.all())

    def roots_coincide(self) -> bool:
        return self.roots.as_set() == self.transported_base_roots()

    def new_roots(self) -> list[tuple[Fraction, ...]]:
        """Roots of ``M`` outside ``L``, over the basis of ``L``."""
        old = self.transported_base_roots()
        return [self.to_base(r) for r in self.roots.all() if r not in old]


def build_overlattice(L: Lattice, vs: Sequence, name: str = "") -> Overlattice:
    val = validate_glue(L, vs)
    if not val:
        raise GlueError("glue is not isotropic: " + "; ".join(val.diagnostics))
    glue = tuple(v if isinstance(v, GlueVector) else GlueVector(L, v) for v in vs)
    n = L.rank
    den = common_denominator(x for v in glue for x in v.coords) if glue else 1
    rows = [[den * int(i == j) for j in range(n)] for i in range(n)]
    rows += [[int(den * x) for x in v.coords] for v in glue]
    h = hermite_normal_form(rows)
    if len(h) != n:
        raise GlueError("glue generators do not give a full-rank lattice")
    basis = tuple(tuple(Fraction(x, den) for x in row) for row in h)
    gram_q = mat_mul(mat_mul(basis, L.gram), transpose(basis))
    if any(x.denominator != 1 for row in gram_q for x in row):
        raise GlueError("overlattice Gram matrix is not integral")
    gram = tuple(tuple(int(x) for x in row) for row in gram_q)
    det_h = determinant(h)
    index, rem = divmod(den**n, abs(det_h))
    if rem:
        raise GlueError("index is not an integer")
    M = Lattice(gram, None, name)
    if L.det != index * index * M.det:
        raise GlueError(f"d(L) = {L.det} but r^2 d(M) = {index * index * M.det}")
    inv = rational_inverse(basis)
    if any(Fraction(x).denominator != 1 for row in inv for x in row):
        raise GlueError("base lattice is not contained in the overlattice")
    inclusion = tuple(tuple(int(x) for x in row) for row in inv)
    return Overlattice(L, glue, M, basis, inclusion, index)


def is_primitive_sublattice(M: Lattice, L: Lattice, inclusion: Sequence[Sequence[int]]) -> bool:
    """``inclusion`` row i is basis vector i of ``M`` in coordinates of ``L``."""
    inc = [list(map(int, row)) for row in inclusion]
    if len(inc) != M.rank or any(len(r) != L.rank for r in inc):
        raise LatticeError("inclusion matrix has the wrong shape")
    img = mat_mul(mat_mul(inc, L.gram), transpose(inc))
    if tuple(map(tuple, img)) != M.gram:
        raise LatticeError("inclusion does not respect the Gram matrices")
    d, _, _ = smith_normal_form(inc)
    return all(d[i][i] == 1 for i in range(M.rank))


def embeddability_length_check(L: Lattice, ambient_rank: int = 22) -> bool:
    """Necessary condition for a primitive embedding into an even unimodular
    lattice of the given rank: ``l(L) <= ambient_rank - rank(L)``."""
    if L.rank > ambient_rank:
        raise LatticeError(f"rank {L.rank} exceeds the ambient rank {ambient_rank}")
    return L.discriminant_group.length <= ambient_rank - L.rank


@dataclass(frozen=True, eq=False)
class SearchReport:
    overlattices: tuple[Overlattice, ...]
    classes_seen: int
    admissible_elements: int


def minimal_root_preserving_overlattices(F: Lattice, max_length: int,
                                         constraints: DivisibilityConstraints | None = None,
                                         *, limit: int = 20000, report: bool = False):
    """Maximal even overlattices of ``F`` with the same roots, up to symmetry.

    ``F`` must be a direct sum of ADE lattices in standard block form.  A
    glue subgroup qualifies when it is isotropic, adds no roots and, under
    ``constraints``, every element of prime order has an allowed curve
    support.  The maximal qualifying subgroups whose overlattice has length
    at most ``max_length`` are returned, one per symmetry class, sorted by
    index and then by glue code.
    """
    if not len(enumerate_roots(F)):
        raise LatticeError("lattice has no roots")
    struct = structure_of(F)
    cons = constraints if constraints is not None else DivisibilityConstraints()
    allowed = admissible_elements(struct, supports=cons.supports())
    res = search_subgroups(struct, allowed, limit=limit)
    out = []
    for H, is_max in zip(res.subgroups, res.maximal):
        if not is_max:
            continue
        gens = struct.generators(H)
        M = build_overlattice(F, [struct.vector(g) for g in gens])
        if M.result.discriminant_group.length <= max_length:
            out.append((M.index, sorted(H), M))
    out.sort(key=lambda t: (t[0], t[1]))
    lattices = tuple(t[2] for t in out)
    if report:
        return SearchReport(lattices, res.classes_seen, len(allowed))
    return list(lattices)


def glue_subgroup(M: Overlattice) -> frozenset:
    """The glue of an overlattice of a standard ADE sum, as class tuples."""
    struct = structure_of(M.base)
    return struct.span([struct.element_of(v.coords) for v in M.glue])


def glue_key(M: Overlattice) -> tuple:
    struct = structure_of(M.base)
    return canonical_key(struct, glue_subgroup(M))

