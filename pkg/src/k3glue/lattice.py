"""Even lattices, their duals and discriminant forms.

A lattice is stored by its Gram matrix in a fixed basis.  Vectors of
L (x) Q are written as coordinate tuples over that basis, so the dual L^v
consists of the rational vectors y with ``gram @ y`` integral.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .exactlin import (
    bilinear,
    common_denominator,
    determinant,
    is_symmetric,
    mat_vec,
    rational_inverse,
    reduce_mod_one,
    smith_normal_form,
    to_fractions,
    unimodular_inverse,
)


class LatticeError(ValueError):
    pass


class SchemaError(LatticeError):
    """Malformed lattice JSON; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def mod2(x) -> Fraction:
    x = Fraction(x)
    return x - 2 * (x.numerator // (2 * x.denominator))


def mod1(x) -> Fraction:
    x = Fraction(x)
    return x - x.numerator // x.denominator


@dataclass(frozen=True, eq=False)
class Lattice:
    gram: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = None
    name: str = ""

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        if not g or not is_symmetric(g):
            raise LatticeError("gram matrix must be square and symmetric")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(g):
                raise LatticeError(f"{len(labels)} labels for rank {len(g)}")
            object.__setattr__(self, "labels", labels)
        if self.det == 0:
            raise LatticeError("degenerate gram matrix")

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.gram == other.gram and self.labels == other.labels

    def __hash__(self):
        return hash((self.gram, self.labels))

    def __repr__(self):
        nm = f" {self.name!r}" if self.name else ""
        return f"<Lattice{nm} rank={self.rank} det={self.det}>"

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def det(self) -> int:
        return determinant(self.gram)

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else f"b{i + 1}"

    def index_of(self, label: str) -> int:
        if not self.labels:
            raise KeyError(label)
        return self.labels.index(label)

    def inner(self, x: Sequence, y: Sequence):
        return bilinear(self.gram, x, y)

    def norm(self, x: Sequence):
        return bilinear(self.gram, x, x)

    def pairing_vector(self, y: Sequence) -> list:
        """Pairings of ``y`` with the basis vectors."""
        return mat_vec(self.gram, y)

    def in_dual(self, y: Sequence) -> bool:
        return all(Fraction(t).denominator == 1 for t in self.pairing_vector(y))

    def vector(self, coeffs: dict[str, object]) -> tuple[Fraction, ...]:
        """Rational vector from a ``{label: coefficient}`` mapping."""
        v = [Fraction(0)] * self.rank
        for lab, c in coeffs.items():
            v[self.index_of(lab)] += Fraction(c)
        return tuple(v)

    def relabel(self, labels: Sequence[str] | None, name: str | None = None) -> "Lattice":
        return Lattice(self.gram, tuple(labels) if labels is not None else None, self.name if name is None else name)

    @cached_property
    def gram_inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(row) for row in rational_inverse(self.gram))

    @cached_property
    def discriminant_group(self) -> "DiscriminantGroup":
        return _compute_discriminant_group(self)


def dual_basis(L: Lattice) -> list[tuple[Fraction, ...]]:
    """Rows of gram^-1: the i-th vector pairs to 1 with basis vector i, 0 otherwise."""
    return [tuple(row) for row in L.gram_inverse]


@dataclass(frozen=True)
class DiscElement:
    coords: tuple[int, ...]
    vector: tuple[Fraction, ...]

    def is_zero(self) -> bool:
        return not any(self.coords)


@dataclass(frozen=True, eq=False)
class DiscriminantGroup:
    invariant_factors: tuple[int, ...]
    generators: tuple[tuple[Fraction, ...], ...]
    q_values: tuple[Fraction, ...]
    b_values: tuple[tuple[Fraction, ...], ...]
    lattice: Lattice = field(repr=False)
    _coord_rows: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def length(self) -> int:
        return len(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def coordinates(self, y: Sequence) -> tuple[int, ...]:
        """Coordinates of the class of the dual vector ``y``."""
        z = self.lattice.pairing_vector(y)
        if any(Fraction(t).denominator != 1 for t in z):
            raise LatticeError("vector is not in the dual lattice")
        z = [int(t) for t in z]
        return tuple(sum(a * b for a, b in zip(row, z)) % d for row, d in zip(self._coord_rows, self.invariant_factors))

    def element(self, coords: Sequence[int]) -> DiscElement:
        coords = tuple(int(c) % d for c, d in zip(coords, self.invariant_factors))
        if len(coords) != self.length:
            raise LatticeError("wrong number of coordinates")
        n = self.lattice.rank
        v = [Fraction(0)] * n
        for c, g in zip(coords, self.generators):
            if c:
                for i in range(n):
                    v[i] += c * g[i]
        return DiscElement(coords, reduce_mod_one(v))

    def element_of(self, y: Sequence) -> DiscElement:
        return self.element(self.coordinates(y))

    def zero(self) -> DiscElement:
        return self.element([0] * self.length)

    def add(self, x: DiscElement, y: DiscElement) -> DiscElement:
        return self.element([a + b for a, b in zip(x.coords, y.coords)])

    def scale(self, k: int, x: DiscElement) -> DiscElement:
        return self.element([k * a for a in x.coords])

    def order_of(self, x: DiscElement) -> int:
        from math import gcd

        out = 1
        for c, d in zip(x.coords, self.invariant_factors):
            o = d // gcd(c, d)
            out = out * o // gcd(out, o)
        return out

    def q(self, x) -> Fraction:
        if isinstance(x, DiscElement):
            x = x.vector
        return mod2(self.lattice.norm(to_fractions(x)))

    def b(self, x, y) -> Fraction:
        if isinstance(x, DiscElement):
            x = x.vector
        if isinstance(y, DiscElement):
            y = y.vector
        return mod1(self.lattice.inner(to_fractions(x), to_fractions(y)))

    def elements(self) -> Iterator[DiscElement]:
        for coords in itertools.product(*(range(d) for d in self.invariant_factors)):
            yield self.element(coords)

    def random_element(self, rng) -> DiscElement:
        return self.element([rng.randrange(d) for d in self.invariant_factors])

    def subgroup(self, gens: Iterable[DiscElement]) -> frozenset[tuple[int, ...]]:
        """Coordinate tuples of the subgroup generated by ``gens``."""
        elems = {tuple([0] * self.length)}
        for g in gens:
            frontier = set(elems)
            step = g.coords
            while True:
                new = set()
                for e in frontier:
                    s = tuple((a + b) % d for a, b, d in zip(e, step, self.invariant_factors))
                    if s not in elems:
                        new.add(s)
                if not new:
                    break
                elems |= new
                frontier = new
        return frozenset(elems)


def _compute_discriminant_group(L: Lattice) -> DiscriminantGroup:
    # L^v/L is Z^n / gram Z^n in pairing coordinates z = gram @ y.  With
    # u*gram*v = diag(d), the map z -> u z identifies it with (+) Z/d_i.
    d, u, _ = smith_normal_form(L.gram)
    n = L.rank
    diag = [abs(d[i][i]) for i in range(n)]
    keep = [i for i in range(n) if diag[i] != 1]
    uinv = unimodular_inverse(u)
    ginv = L.gram_inverse
    gens = []
    for i in keep:
        z = [uinv[r][i] for r in range(n)]
        y = mat_vec(ginv, z)
        gens.append(reduce_mod_one(y))
    factors = tuple(diag[i] for i in keep)
    rows = tuple(tuple(u[i]) for i in keep)
    q_vals = tuple(mod2(L.norm(g)) for g in gens)
    b_vals = tuple(tuple(mod1(L.inner(g, h)) for h in gens) for g in gens)
    return DiscriminantGroup(factors, tuple(gens), q_vals, b_vals, L, rows)


def discriminant_group(L: Lattice) -> DiscriminantGroup:
    return L.discriminant_group


def disc_form_value(L: Lattice, x) -> Fraction:
    """q(x) in [0, 2) for a class of L^v/L (vector or DiscElement)."""
    if isinstance(x, DiscElement):
        x = x.vector
    x = to_fractions(x)
    if not L.in_dual(x):
        raise LatticeError("vector is not in the dual lattice")
    return mod2(L.norm(x))


def length(L: Lattice) -> int:
    return L.discriminant_group.length


def direct_sum(*lattices: Lattice, name: str = "") -> Lattice:
    n = sum(L.rank for L in lattices)
    gram = [[0] * n for _ in range(n)]
    off = 0
    labels: list[str] | None = []
    for L in lattices:
        for i in range(L.rank):
            for j in range(L.rank):
                gram[off + i][off + j] = L.gram[i][j]
        if labels is not None and L.labels is not None:
            labels.extend(L.labels)
        else:
            labels = None
        off += L.rank
    if labels is not None and len(set(labels)) != len(labels):
        labels = None
    return Lattice(tuple(map(tuple, gram)), tuple(labels) if labels else None, name)


def group_structure(factors: Sequence[int]) -> str:
    """Human form of an invariant-factor list, e.g. ``(Z/4)^2 x (Z/2)^2``."""
    if not factors:
        return "0"
    parts = []
    for d, grp in itertools.groupby(sorted(factors, reverse=True)):
        k = len(list(grp))
        parts.append(f"Z/{d}" if k == 1 else f"(Z/{d})^{k}")
    return " x ".join(parts)


def invariant_factors_of(orders: Iterable[int]) -> tuple[int, ...]:
    """Invariant factors d1 | d2 | ... of a product of cyclic groups."""
    from sympy import factorint

    prime_powers: dict[int, list[int]] = {}
    for m in orders:
        for p, e in factorint(m).items():
            prime_powers.setdefault(p, []).append(p**e)
    if not prime_powers:
        return ()
    k = max(len(v) for v in prime_powers.values())
    out = [1] * k
    for p, vals in prime_powers.items():
        vals = sorted(vals)
        vals = [1] * (k - len(vals)) + vals
        for i, x in enumerate(vals):
            out[i] *= x
    return tuple(x for x in out if x > 1)


# --- JSON interchange ---------------------------------------------------


def rational_to_json(v: Sequence) -> dict:
    v = to_fractions(v)
    den = common_denominator(v)
    return {"num": [int(x * den) for x in v], "den": den}


def rational_from_json(obj, path: str = "$") -> tuple[Fraction, ...]:
    if not isinstance(obj, dict):
        raise SchemaError(path, "rational vector must be an object")
    for key in ("num", "den"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing field")
    num, den = obj["num"], obj["den"]
    if not isinstance(num, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in num):
        raise SchemaError(f"{path}.num", "expected a list of integers")
    if not isinstance(den, int) or isinstance(den, bool) or den <= 0:
        raise SchemaError(f"{path}.den", "expected a positive integer")
    return tuple(Fraction(x, den) for x in num)


def lattice_to_json(L: Lattice, name: str | None = None) -> dict:
    out = {"name": L.name if name is None else name, "rank": L.rank, "gram": [list(r) for r in L.gram]}
    if L.labels is not None:
        out["labels"] = list(L.labels)
    return out


def lattice_from_json(obj, path: str = "$") -> Lattice:
    if not isinstance(obj, dict):
        raise SchemaError(path, "lattice must be a JSON object")
    for key in ("name", "rank", "gram"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing field")
    extra = set(obj) - {"name", "rank", "gram", "labels"}
    if extra:
        raise SchemaError(f"{path}.{sorted(extra)[0]}", "unknown field")
    name, rank, gram = obj["name"], obj["rank"], obj["gram"]
    if not isinstance(name, str):
        raise SchemaError(f"{path}.name", "expected a string")
    if not isinstance(rank, int) or isinstance(rank, bool) or rank <= 0:
        raise SchemaError(f"{path}.rank", "expected a positive integer")
    if not isinstance(gram, list) or len(gram) != rank:
        raise SchemaError(f"{path}.gram", f"expected {rank} rows")
    for i, row in enumerate(gram):
        if not isinstance(row, list) or len(row) != rank:
            raise SchemaError(f"{path}.gram[{i}]", f"expected {rank} entries")
        for j, x in enumerate(row):
            if not isinstance(x, int) or isinstance(x, bool):
                raise SchemaError(f"{path}.gram[{i}][{j}]", "expected an integer")
    for i in range(rank):
        for j in range(i):
            if gram[i][j] != gram[j][i]:
                raise SchemaError(f"{path}.gram[{i}][{j}]", "gram matrix is not symmetric")
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != rank or not all(isinstance(s, str) for s in labels):
            raise SchemaError(f"{path}.labels", f"expected {rank} strings")
    try:
        return Lattice(tuple(map(tuple, gram)), tuple(labels) if labels is not None else None, name)
    except LatticeError as exc:
        raise SchemaError(f"{path}.gram", str(exc)) from None


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=False, separators=(",", ": "), indent=None) + "\n"


def load_lattice(text: str) -> Lattice:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno}", exc.msg) from None
    return lattice_from_json(obj)
