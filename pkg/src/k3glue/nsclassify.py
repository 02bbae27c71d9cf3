"""Overlattices of ``Zh + N`` in which both ``h`` and ``N`` stay primitive.

Here ``h^2 = 2d > 0`` and ``N`` is even and negative definite.  An index
``n`` overlattice of this kind is generated over ``Zh + N`` by a single
vector ``v = h/n + m`` with ``m`` a class of order ``n`` in ``disc(N)``:
the glue meets neither summand, so it projects isomorphically onto a
subgroup of ``Z/2d``.  Then ``v.h = 2d/n`` must be an integer and
``v^2 = 2d/n^2 + q(m)`` must be even.

Classes are identified under the symmetries of the root lattice of ``N``
(permutations of equal summands and diagram automorphisms) that fix the
glue of ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from sympy import divisors, isprime

from .exactlin import rational_inverse, reduce_mod_one, vec_mat
from .lattice import Lattice, LatticeError, group_structure, mod2, rational_to_json
from .overlattice import (
    Overlattice,
    build_overlattice,
    embeddability_length_check,
    glue_subgroup,
    is_primitive_sublattice,
)
from .roots import root_components
from .symmetry import GlueStructure, canonical_key, glue_structure_from_components, structure_of

__all__ = [
    "PolarizedExtensionProblem",
    "ExtensionClass",
    "Classification",
    "classify",
    "classify_extensions",
    "evenness_congruence",
    "FeasibilityReport",
    "polarization_feasibility",
]

TRIVIAL_ONLY = "only the trivial extension"


# --- how disc(N) is presented -------------------------------------------


class _RootModel:
    """``disc(N)`` as ``H^perp / H`` inside ``disc(R)``, ``R`` the root lattice of ``N``."""

    def __init__(self, N: Lattice, struct: GlueStructure, glue: frozenset, to_n, from_n):
        self.N = N
        self.struct = struct
        self.glue = glue
        self._to_n = to_n
        self._from_n = from_n

    def classes_of_order(self, n: int) -> list[frozenset]:
        D = self.N.discriminant_group
        out = []
        for e in D.elements():
            if D.order_of(e) == n:
                x = self.struct.element_of(self._from_n(e.vector))
                out.append(frozenset(self.struct.add(x, h) for h in self.glue))
        return out

    def q(self, c: frozenset) -> Fraction:
        return self.struct.q(next(iter(c)))

    def key(self, c: frozenset) -> tuple:
        tags = {h: "N" for h in self.glue}
        tags.update({x: "v" for x in c})
        return canonical_key(self.struct, tags)

    @staticmethod
    def rep_key(x) -> tuple:
        nz = tuple(i for i, a in enumerate(x) if a)
        return (len(nz), nz, tuple(x[i] for i in nz))

    def vector(self, x) -> tuple[Fraction, ...]:
        return reduce_mod_one(self._to_n(self.struct.vector(x)))

    def support(self, x) -> int:
        return sum(1 for a in x if a)

    def coefficients(self, x) -> list[int] | None:
        """Multiples of the standard generator ``d_j`` of each A-type summand."""
        out = []
        for sd, a in zip(self.struct.summands, x):
            t = sd.type
            if t.family != "A":
                return None
            g = sd.index_of(reduce_mod_one([Fraction(i + 1, t.n + 1) for i in range(t.n)]))
            m, c = 0, 0
            while c != a:
                c = sd.add[c][g]
                m += 1
            out.append(m)
        return out

    def expression(self, x) -> str:
        coeffs = self.coefficients(x)
        if coeffs is not None:
            return " + ".join(_term(m, f"d_{{{j + 1}}}") for j, m in enumerate(coeffs) if m)
        return " + ".join(f"[{a}]_{{{j + 1}}}" for j, a in enumerate(x) if a)


class _PlainModel:
    """Fallback when the roots of ``N`` do not span: no symmetry is used."""

    def __init__(self, N: Lattice):
        self.D = N.discriminant_group

    def classes_of_order(self, n: int) -> list[frozenset]:
        return [frozenset([x.coords]) for x in self.D.elements() if self.D.order_of(x) == n]

    def q(self, c: frozenset) -> Fraction:
        return self.D.q(self.D.element(next(iter(c))))

    def key(self, c) -> tuple:
        return c

    rep_key = staticmethod(lambda x: (sum(1 for a in x if a), x))

    def vector(self, x) -> tuple[Fraction, ...]:
        return self.D.element(x).vector

    def support(self, x) -> int:
        return sum(1 for a in x if a)

    def coefficients(self, x):
        return None

    def expression(self, x) -> str:
        return " + ".join(_term(a, f"g_{{{j + 1}}}") for j, a in enumerate(x) if a)


def _term(m: int, sym: str) -> str:
    return sym if m == 1 else f"{m}{sym}"


def _model_for(N: Lattice, presentation: Overlattice | None):
    if presentation is not None:
        M = presentation
        return _RootModel(N, structure_of(M.base), glue_subgroup(M),
                          lambda v: vec_mat(v, M.inclusion), lambda y: vec_mat(y, M.basis))
    comps = root_components(N)
    if sum(c.type.n for c in comps) != N.rank:
        return _PlainModel(N)
    struct, glue = glue_structure_from_components(N, comps)
    simple = [r for c in comps for r in c.simple]
    inv = rational_inverse(simple)
    return _RootModel(N, struct, glue, lambda v: vec_mat(v, simple), lambda y: vec_mat(y, inv))


# --- problems and classes -------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolarizedExtensionProblem:
    N: Lattice
    degree: int  # h^2 = 2d
    p: int = 3
    presentation: Overlattice | None = None  # N as an overlattice of a standard ADE sum

    def __post_init__(self):
        if self.degree <= 0 or self.degree % 2:
            raise ValueError(f"h^2 must be a positive even integer, got {self.degree}")
        if not self.N.is_even:
            raise LatticeError("N must be even")
        if self.p < 2:
            raise ValueError("the index must be at least 2")
        if self.presentation is not None and self.presentation.result.gram != self.N.gram:
            raise LatticeError("presentation does not match N")

    @classmethod
    def from_catalog(cls, row: str, degree: int, p: int = 3) -> "PolarizedExtensionProblem":
        from .catalog import build_row

        M = build_row(row)
        return cls(M.result, degree, p, M)

    @property
    def d(self) -> int:
        return self.degree // 2

    @cached_property
    def ambient(self) -> Lattice:
        """``Zh + N`` with ``h`` as the first basis vector."""
        n = self.N.rank
        gram = [[0] * (n + 1) for _ in range(n + 1)]
        gram[0][0] = self.degree
        for i in range(n):
            for j in range(n):
                gram[i + 1][j + 1] = self.N.gram[i][j]
        labels = ("h", *self.N.labels) if self.N.labels and "h" not in self.N.labels else None
        return Lattice(tuple(map(tuple, gram)), labels, f"Zh({self.degree}) + {self.N.name or 'N'}")

    @cached_property
    def _model(self):
        return _model_for(self.N, self.presentation)


@dataclass(frozen=True, eq=False)
class ExtensionClass:
    """``v = h/n + m`` up to symmetry, with ``m`` the chosen representative."""

    problem: PolarizedExtensionProblem = field(repr=False)
    index: int
    element: tuple[int, ...]
    coset: frozenset = field(repr=False)
    q: Fraction  # q(m) in [0, 2)
    orbit_size: int
    expression: str
    coefficients: tuple[int, ...] | None

    @property
    def support(self) -> int:
        return sum(1 for a in self.element if a)

    @property
    def label(self) -> str:
        return f"H/{self.index} + {self.expression}"

    def contains(self, element: Sequence[int]) -> bool:
        """Is ``element`` a representative of the same class of ``disc(N)``?"""
        return tuple(element) in self.coset

    @cached_property
    def vector(self) -> tuple[Fraction, ...]:
        """``v`` over the basis ``h, N`` of the ambient lattice."""
        return (Fraction(1, self.index), *self.problem._model.vector(self.element))

    def overlattice(self) -> Overlattice:
        return build_overlattice(self.problem.ambient, [self.vector])

    def verify(self) -> dict[str, bool]:
        X = self.overlattice()
        r = self.problem.N.rank
        n_rows = [X.transport([int(i == j + 1) for i in range(r + 1)]) for j in range(r)]
        h_row = [X.transport([1] + [0] * r)]
        return {
            "even": X.result.is_even,
            "N_primitive": is_primitive_sublattice(self.problem.N, X.result, n_rows),
            "h_primitive": is_primitive_sublattice(Lattice(((self.problem.degree,),)), X.result, h_row),
            "index": X.index == self.index,
        }

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "class": self.label,
            "coefficients": list(self.coefficients) if self.coefficients is not None else None,
            "support": self.support,
            "q_m": str(self.q),
            "orbit_size": self.orbit_size,
            "glue": rational_to_json(self.vector),
        }


def _classes(problem: PolarizedExtensionProblem, n: int) -> list[ExtensionClass]:
    if problem.degree % n:
        return []
    model = problem._model
    orbits: dict = {}
    for c in model.classes_of_order(n):
        if mod2(Fraction(problem.degree, n * n) + model.q(c)):
            continue
        orbits.setdefault(model.key(c), []).append(c)
    out = []
    for members in orbits.values():
        rep = min((x for c in members for x in c), key=model.rep_key)
        coset = next(c for c in members if rep in c)
        coeffs = model.coefficients(rep)
        out.append(ExtensionClass(problem, n, tuple(rep), coset, model.q(coset), len(members),
                                  model.expression(rep), tuple(coeffs) if coeffs is not None else None))
    out.sort(key=lambda e: model.rep_key(e.element))
    return out


@dataclass(frozen=True, eq=False)
class Classification:
    problem: PolarizedExtensionProblem
    classes: tuple[ExtensionClass, ...]

    @property
    def trivial_only(self) -> bool:
        return not self.classes

    @property
    def note(self) -> str:
        if not self.trivial_only:
            return f"{len(self.classes)} class(es) of index {self.problem.p}"
        if self.problem.degree % self.problem.p:
            return f"{TRIVIAL_ONLY}: {self.problem.p} does not divide h^2 = {self.problem.degree}"
        return TRIVIAL_ONLY

    def to_json(self) -> dict:
        p, d = self.problem.p, self.problem.d
        return {
            "lattice": self.problem.N.name,
            "h2": self.problem.degree,
            "d": d,
            "p": p,
            "residue": {"modulus": p * p, "d_mod": d % (p * p)},
            "trivial_only": self.trivial_only,
            "note": self.note,
            "classes": [c.to_json() for c in self.classes],
        }


def classify(problem: PolarizedExtensionProblem) -> Classification:
    if not isprime(problem.p):
        raise ValueError(f"only prime indices are classified, got {problem.p}")
    return Classification(problem, tuple(_classes(problem, problem.p)))


def classify_extensions(problem: PolarizedExtensionProblem) -> list[ExtensionClass]:
    """Index-``p`` overlattices of ``Zh + N`` with ``h`` and ``N`` primitive,
    one per symmetry class; empty when only ``Zh + N`` itself exists."""
    return list(classify(problem).classes)


def evenness_congruence(problem: PolarizedExtensionProblem, k: int) -> bool:
    """Is ``(h/3 + m)^2`` even when ``m`` is a sum of ``k`` classes ``+-d_j``?

    Needs ``N`` glued from six A2 blocks, where each ``d_j`` has ``q = -2/3``.
    """
    model = problem._model
    if problem.p != 3 or not isinstance(model, _RootModel) or [str(t) for t in model.struct.types] != ["A2"] * 6:
        raise LatticeError("evenness congruence needs index 3 and N glued from A2^6")
    if not 0 <= k <= 6:
        raise ValueError("k counts nonzero coefficients, so 0 <= k <= 6")
    qd = model.struct.q((1, 0, 0, 0, 0, 0))
    return mod2(Fraction(problem.degree, 9) + k * qd) == 0


# --- polarizations --------------------------------------------------------


@dataclass(frozen=True)
class FeasibleExtension:
    index: int
    glue: str  # "trivial" or the class of v
    disc: tuple[int, ...]
    length: int
    length_ok: bool

    def to_json(self) -> dict:
        return {"index": self.index, "glue": self.glue, "disc": group_structure(self.disc),
                "length": self.length, "length_ok": self.length_ok}


@dataclass(frozen=True)
class FeasibilityReport:
    lattice: str
    degree: int
    rank: int
    max_rank: int
    extensions: tuple[FeasibleExtension, ...]

    @property
    def length_bound(self) -> int:
        return self.max_rank - self.rank

    @property
    def moduli_dimension(self) -> int:
        # period domain of signature (2, max_rank - 2 - rank)
        return self.max_rank - 2 - self.rank

    @property
    def any_feasible(self) -> bool:
        return any(e.length_ok for e in self.extensions)

    def to_json(self) -> dict:
        return {"lattice": self.lattice, "h2": self.degree, "rank": self.rank,
                "length_bound": self.length_bound, "moduli_dimension": self.moduli_dimension,
                "extensions": [e.to_json() for e in self.extensions]}


def polarization_feasibility(K: Lattice | Overlattice | str, degree: int, max_rank: int = 22) -> FeasibilityReport:
    """Every even overlattice of ``Zh(2d) + K`` with ``h`` and ``K`` primitive,
    with the necessary length condition for embedding in rank ``max_rank``."""
    if isinstance(K, str):
        problem = PolarizedExtensionProblem.from_catalog(K, degree, 2)
    elif isinstance(K, Overlattice):
        problem = PolarizedExtensionProblem(K.result, degree, 2, K)
    else:
        problem = PolarizedExtensionProblem(K, degree, 2)
    X0 = problem.ambient
    rows = [FeasibleExtension(1, "trivial", X0.discriminant_group.invariant_factors, X0.discriminant_group.length,
                              embeddability_length_check(X0, max_rank))]
    exponent = problem.N.discriminant_group.exponent
    for n in divisors(degree):
        if n == 1 or exponent % n:
            continue
        for c in _classes(problem, n):
            X = c.overlattice().result
            D = X.discriminant_group
            rows.append(FeasibleExtension(n, c.label, D.invariant_factors, D.length,
                                          embeddability_length_check(X, max_rank)))
    return FeasibilityReport(problem.N.name, degree, X0.rank, max_rank, tuple(rows))
