"""Divisibility codes: linear codes recording which sets of disjoint curves
(A1's over F_2, A2-configurations over F_3) can be divisible.

Over F_2 a nonzero word must have weight 8 or 16, over F_3 weight 6 or 9.
Weights over F_3 count configurations, not curves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .lattice import Lattice, LatticeError
from .roots import AdeType, dynkin_graph
from .symmetry import GlueStructure, search_subgroups, structure_of, summand_disc

DEFAULT_WEIGHTS = {2: frozenset({8, 16}), 3: frozenset({6, 9})}
MAX_CODE_LENGTH = 24


class CodeLengthError(ValueError):
    pass


@dataclass(frozen=True)
class DivisibilityCode:
    field_order: int
    length: int
    generator_matrix: tuple[tuple[int, ...], ...]
    allowed_weights: frozenset[int] = None  # type: ignore[assignment]

    def __post_init__(self):
        p = self.field_order
        if p not in DEFAULT_WEIGHTS:
            raise ValueError("field order must be 2 or 3")
        rows = tuple(tuple(int(x) % p for x in row) for row in self.generator_matrix)
        for row in rows:
            if len(row) != self.length:
                raise ValueError(f"generator row of length {len(row)}, expected {self.length}")
        object.__setattr__(self, "generator_matrix", rows)
        w = DEFAULT_WEIGHTS[p] if self.allowed_weights is None else frozenset(self.allowed_weights)
        if not w <= DEFAULT_WEIGHTS[p]:
            raise ValueError(f"allowed weights over F_{p} must lie in {sorted(DEFAULT_WEIGHTS[p])}")
        object.__setattr__(self, "allowed_weights", w)

    @classmethod
    def from_supports(cls, length: int, supports: Iterable[Iterable[int]]) -> "DivisibilityCode":
        """Binary code spanned by characteristic vectors of 0-based index sets."""
        rows = []
        for s in supports:
            s = set(s)
            rows.append(tuple(int(i in s) for i in range(length)))
        return cls(2, length, tuple(rows))

    def codewords(self) -> set[tuple[int, ...]]:
        p = self.field_order
        out = {tuple([0] * self.length)}
        for coeffs in itertools.product(range(p), repeat=len(self.generator_matrix)):
            w = [0] * self.length
            for c, row in zip(coeffs, self.generator_matrix):
                if c:
                    for i, x in enumerate(row):
                        w[i] = (w[i] + c * x) % p
            out.add(tuple(w))
        return out

    @property
    def dimension(self) -> int:
        n = len(self.codewords())
        d = 0
        while n > 1:
            n //= self.field_order
            d += 1
        return d

    def weights(self) -> list[int]:
        return sorted(sum(1 for x in w if x) for w in self.codewords() if any(w))


def check_code(c: DivisibilityCode) -> bool:
    return all(w in c.allowed_weights for w in c.weights())


def _allowed_words(p: int, length: int, weights: Iterable[int]) -> set[tuple[int, ...]]:
    out = set()
    for w in weights:
        if w > length:
            continue
        for pos in itertools.combinations(range(length), w):
            for vals in itertools.product(range(1, p), repeat=w):
                word = [0] * length
                for i, v in zip(pos, vals):
                    word[i] = v
                out.add(tuple(word))
    return out


def _structure(p: int, length: int) -> GlueStructure:
    return GlueStructure((AdeType("A", p - 1),) * length)


def search_codes(p: int, length: int, weights: Iterable[int] | None = None, limit: int = 20000):
    """All admissible codes up to monomial equivalence, as sets of words."""
    if not 0 <= length <= MAX_CODE_LENGTH:
        raise CodeLengthError(f"code length must be between 0 and {MAX_CODE_LENGTH}")
    weights = frozenset(weights) if weights is not None else DEFAULT_WEIGHTS[p]
    if length == 0:
        return [frozenset([()])]
    allowed = _allowed_words(p, length, weights)
    return search_subgroups(_structure(p, length), allowed, limit=limit).subgroups


def _code_from_words(p: int, length: int, words: frozenset, weights) -> DivisibilityCode:
    struct = _structure(p, length) if length else None
    gens = struct.generators(words) if struct else []
    # F_3 words: class index equals the coefficient, so generators are words already
    return DivisibilityCode(p, length, tuple(gens), weights)


def max_divisibility_dimension(field_order: int, length: int, weights: Iterable[int] | None = None
                               ) -> tuple[int, DivisibilityCode]:
    p = field_order
    w = frozenset(weights) if weights is not None else DEFAULT_WEIGHTS[p]
    codes = search_codes(p, length, w)
    best = max(codes, key=len)
    dim = 0
    n = len(best)
    while n > 1:
        n //= p
        dim += 1
    return dim, _code_from_words(p, length, best, w)


def count_maximal_codes(field_order: int, length: int) -> int:
    """Number of inequivalent codes of maximal dimension."""
    codes = search_codes(field_order, length)
    top = max(len(c) for c in codes)
    return sum(1 for c in codes if len(c) == top)


def pairwise_intersection_check(c: DivisibilityCode) -> bool:
    """Distinct weight-8 words meet in 4 curves, or in none when that fits."""
    if c.field_order != 2:
        raise ValueError("intersection check is for binary codes")
    eights = [frozenset(i for i, x in enumerate(w) if x) for w in c.codewords() if sum(w) == 8]
    for a, b in itertools.combinations(eights, 2):
        k = len(a & b)
        if k == 4:
            continue
        if k == 0 and c.length >= 16:
            continue
        return False
    return True


# sets from the length-15 argument, 1-based
CERTIFICATE_SETS = (
    frozenset(range(1, 9)),
    frozenset([1, 2, 3, 4, 9, 10, 11, 12]),
    frozenset([1, 2, 5, 6, 9, 10, 13, 14]),
    frozenset([1, 3, 5, 7, 9, 11, 13, 15]),
)


@dataclass(frozen=True)
class FifthSetCertificate:
    length: int
    sets: tuple[frozenset[int], ...]  # 1-based curve indices
    base_admissible: bool
    candidates_checked: int
    meeting_all_in_four: int  # 8-sets outside the span meeting every nonzero codeword in 4 curves
    extensions: tuple[frozenset[int], ...]  # words whose addition keeps the code admissible

    @property
    def extension_count(self) -> int:
        return len(self.extensions)

    @property
    def no_extension(self) -> bool:
        return not self.extensions


def no_fifth_set_certificate(length: int = 15) -> FifthSetCertificate:
    """Replay the S_1..S_4 construction at the given length and try every
    admissible further word.

    Sets that do not fit are dropped, so length 14 keeps S_1, S_2, S_3.
    """
    if not 1 <= length <= MAX_CODE_LENGTH:
        raise CodeLengthError(f"code length must be between 1 and {MAX_CODE_LENGTH}")
    sets = tuple(s for s in CERTIFICATE_SETS if max(s) <= length)
    base = DivisibilityCode.from_supports(length, [[i - 1 for i in s] for s in sets])
    span = base.codewords()
    span_sets = [frozenset(i + 1 for i, x in enumerate(c) if x) for c in span if any(c)]
    checked = 0
    four = 0
    ext = []
    for w in (8, 16):
        if w > length:
            continue
        for pos in itertools.combinations(range(length), w):
            checked += 1
            word = tuple(int(i in pos) for i in range(length))
            if word in span:
                continue
            t = frozenset(i + 1 for i in pos)
            if w == 8 and all(len(t & s) == 4 for s in span_sets):
                four += 1
            if all(sum((a + b) % 2 for a, b in zip(word, x)) in (8, 16) for x in span):
                ext.append(t)
    ext.sort(key=sorted)
    return FifthSetCertificate(length, sets, check_code(base), checked, four, tuple(ext))


# --- constraints on glue --------------------------------------------------


@dataclass(frozen=True)
class DivisibilityConstraints:
    """Allowed curve-support sizes for glue elements of prime order."""

    allowed: Mapping[int, frozenset[int]] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))

    @classmethod
    def none(cls) -> "DivisibilityConstraints":
        return cls({})

    def supports(self) -> dict[int, tuple[int, ...]]:
        return {p: tuple(sorted(w)) for p, w in self.allowed.items()}

    @staticmethod
    def summand_support(t: AdeType, rep: Sequence, p: int) -> int:
        """Support size of an order-p class of one summand (0 otherwise)."""
        sd = summand_disc(t)
        c = sd.index_of(rep)
        return sd.support2[c] if p == 2 else sd.support3[c] if p == 3 else 0


def support_of_glue(F: Lattice, v: Sequence, prime: int) -> list[tuple[int, ...]]:
    """Curve configurations carrying the order-``prime`` multiple of ``v``.

    ``v`` is a dual vector of ``F`` in standard block form.  For ``prime = 2``
    each configuration is one curve; for ``prime = 3`` it is the pair of
    curves of an A2-configuration.  Basis indices are 0-based.
    """
    if prime not in (2, 3):
        raise ValueError("supports are defined for p = 2 and p = 3")
    struct = structure_of(F)
    x = struct.element_of(v)
    o = struct.order_of(x)
    if o == 1:
        return []
    if o % prime:
        raise LatticeError(f"glue element of order {o} has no multiple of order {prime}")
    y = struct.scale(o // prime, x)
    out: list[tuple[int, ...]] = []
    for sd, off, c in zip(struct.summands, struct.offsets, y):
        if not c:
            continue
        rep = sd.reps[c]
        nz = [i for i, a in enumerate(rep) if a]
        if prime == 2:
            out.extend((off + i,) for i in nz if rep[i] * 2 == 1)
        else:
            for comp in nx.connected_components(dynkin_graph(sd.type).subgraph(nz)):
                out.append(tuple(off + i for i in sorted(comp)))
    return sorted(out)
