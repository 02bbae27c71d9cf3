"""ADE root lattices, exact short-vector enumeration and root systems.

All lattices are negative definite here, so "short" is measured with the
positive form ``-gram``.  The enumeration kernel is Fincke-Pohst on an
LLL-reduced basis with every bound computed in exact rational arithmetic
(gmpy2 ``mpq``), so no tolerance ever enters a decision.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Iterable, Sequence

import gmpy2
import networkx as nx

from .exactlin import (
    bilinear,
    determinant,
    is_negative_definite,
    lll_reduce,
    mat_mul,
    rational_inverse,
)
from .lattice import Lattice, LatticeError, direct_sum

mpq = gmpy2.mpq


class NotDefiniteError(LatticeError):
    pass


class RankMismatchError(LatticeError):
    """Isometry asked for lattices of different rank."""


# --- ADE types ----------------------------------------------------------


@dataclass(frozen=True, order=True)
class AdeType:
    family: str
    n: int

    def __post_init__(self):
        if self.family not in ("A", "D", "E"):
            raise ValueError(f"unknown ADE family {self.family!r}")
        ok = {"A": self.n >= 1, "D": self.n >= 4, "E": self.n in (6, 7, 8)}[self.family]
        if not ok:
            raise ValueError(f"invalid ADE type {self.family}{self.n}")

    @classmethod
    def parse(cls, text: str) -> "AdeType":
        m = re.fullmatch(r"\s*([ADE])_?(\d+)\s*", text)
        if not m:
            raise ValueError(f"cannot parse ADE type {text!r}")
        return cls(m.group(1), int(m.group(2)))

    def __str__(self):
        return f"{self.family}{self.n}"

    @property
    def rank(self) -> int:
        return self.n

    @property
    def abs_det(self) -> int:
        return {"A": self.n + 1, "D": 4, "E": 9 - self.n}[self.family]

    @property
    def root_count(self) -> int:
        if self.family == "A":
            return self.n * (self.n + 1)
        if self.family == "D":
            return 2 * self.n * (self.n - 1)
        return {6: 72, 7: 126, 8: 240}[self.n]

    @property
    def sort_key(self):
        # E before D before A, larger first: matches the usual way sums are written
        return ("EDA".index(self.family), -self.n)


def parse_ade_sum(text: str) -> list[AdeType]:
    """Parse ``"D4^2+A3^3+A1^2"`` (also accepts ``⊕`` and spaces)."""
    out: list[AdeType] = []
    for part in re.split(r"[+⊕]", text.replace(" ", "")):
        if not part:
            continue
        m = re.fullmatch(r"([ADE])_?(\d+)(?:\^(\d+))?", part)
        if not m:
            raise ValueError(f"cannot parse {part!r}")
        out.extend([AdeType(m.group(1), int(m.group(2)))] * int(m.group(3) or 1))
    return out


def format_ade_sum(types: Iterable[AdeType]) -> str:
    types = sorted(types, key=lambda t: t.sort_key)
    parts = []
    for t, grp in itertools.groupby(types):
        k = len(list(grp))
        parts.append(str(t) if k == 1 else f"{t}^{k}")
    return "+".join(parts) if parts else "0"


def dynkin_edges(t: AdeType) -> list[tuple[int, int]]:
    """Edges of the Dynkin diagram in Bourbaki numbering (0-based)."""
    n = t.n
    if t.family == "A":
        return [(i, i + 1) for i in range(n - 1)]
    if t.family == "D":
        return [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    # E_n: 1-3-4-5-6-7-8 chain, 2 attached to 4
    chain = [0, 2, 3, 4, 5, 6, 7][: n - 1]
    return list(zip(chain, chain[1:])) + [(1, 3)]


@lru_cache(maxsize=None)
def _ade_gram(t: AdeType) -> tuple[tuple[int, ...], ...]:
    g = [[-2 if i == j else 0 for j in range(t.n)] for i in range(t.n)]
    for i, j in dynkin_edges(t):
        g[i][j] = g[j][i] = 1
    return tuple(map(tuple, g))


def ade_gram(t: AdeType | str, labels: Sequence[str] | None = None) -> Lattice:
    if isinstance(t, str):
        t = AdeType.parse(t)
    return Lattice(_ade_gram(t), tuple(labels) if labels else None, str(t))


def ade_sum(types: Iterable[AdeType | str], labels: Sequence[str] | None = None, name: str = "") -> Lattice:
    blocks = [ade_gram(t) for t in types]
    L = direct_sum(*blocks, name=name)
    return L.relabel(labels) if labels is not None else L


def dynkin_graph(t: AdeType) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(t.n))
    g.add_edges_from(dynkin_edges(t))
    return g


# --- exact Fincke-Pohst ---------------------------------------------------


def _ldl(q: Sequence[Sequence[int]]):
    """``q(z) = sum_i d_i (z_i + sum_{j>i} m_ij z_j)^2`` for positive definite q."""
    n = len(q)
    d = [mpq(0)] * n
    m = [[mpq(0)] * n for _ in range(n)]
    for i in range(n):
        s = mpq(q[i][i])
        for k in range(i):
            s -= m[k][i] * m[k][i] * d[k]
        if s <= 0:
            raise NotDefiniteError("form is not positive definite")
        d[i] = s
        for j in range(i + 1, n):
            s = mpq(q[i][j])
            for k in range(i):
                s -= m[k][i] * m[k][j] * d[k]
            m[i][j] = s / d[i]
    return m, d


def _ceil(x) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x) -> int:
    return x.numerator // x.denominator


def _fp_enumerate(q, bound, offset=None):
    """All integer y with q(y + offset) <= bound, as (y, value) pairs."""
    n = len(q)
    m, d = _ldl(q)
    c = [mpq(x) for x in offset] if offset is not None else [mpq(0)] * n
    bound = mpq(bound)
    y = [0] * n
    out = []

    def rec(i: int, remaining):
        s = mpq(0)
        mi = m[i]
        for j in range(i + 1, n):
            if mi[j]:
                s -= mi[j] * (y[j] + c[j])
        t = s - c[i]
        r = remaining / d[i]
        s0 = isqrt(_floor(r)) + 1
        di = d[i]
        for v in range(_ceil(t - s0), _floor(t + s0) + 1):
            part = di * (v - t) ** 2
            if part > remaining:
                continue
            y[i] = v
            if i == 0:
                out.append((tuple(y), bound - (remaining - part)))
            else:
                rec(i - 1, remaining - part)
        y[i] = 0

    rec(n - 1, bound)
    return out


def enumerate_short_vectors(gram: Sequence[Sequence[int]], bound, offset: Sequence | None = None,
                            *, negative: bool = True) -> list[tuple[tuple, Fraction]]:
    """Vectors ``x`` of the lattice (or of the coset ``offset + L``) with |x.x| <= bound.

    ``gram`` is negative definite unless ``negative=False``.  Returns pairs
    ``(x, |x.x|)`` with ``x`` in the original coordinates (integral tuples, or
    Fractions for a coset) sorted lexicographically.
    """
    q = [[-v for v in row] for row in gram] if negative else [list(row) for row in gram]
    n = len(q)
    t, qr = lll_reduce(q)
    if offset is not None:
        tinv = rational_inverse(t)
        off_new = [sum(Fraction(offset[k]) * tinv[k][j] for k in range(n)) for j in range(n)]
    else:
        off_new = None
    out = []
    for y, val in _fp_enumerate(qr, bound, off_new):
        x = [0] * n
        for i, yi in enumerate(y):
            if yi:
                row = t[i]
                for j in range(n):
                    x[j] += yi * row[j]
        if offset is not None:
            x = tuple(Fraction(x[j]) + Fraction(offset[j]) for j in range(n))
        else:
            x = tuple(x)
        out.append((x, Fraction(int(val.numerator), int(val.denominator))))
    out.sort()
    return out


def min_coset_norm(gram: Sequence[Sequence[int]], offset: Sequence) -> Fraction:
    """Minimum of |x.x| over the coset ``offset + L`` (negative definite gram)."""
    bound = Fraction(2)
    while True:
        vecs = enumerate_short_vectors(gram, bound, offset)
        if vecs:
            return min(v for _, v in vecs)
        bound *= 2


def _require_definite(L: Lattice) -> None:
    if not is_negative_definite(L.gram):
        raise NotDefiniteError(f"lattice {L.name or ''} is not negative definite".replace("  ", " "))


# --- roots ----------------------------------------------------------------


def _canonical_sign(v: tuple[int, ...]) -> tuple[int, ...]:
    for x in v:
        if x:
            return v if x > 0 else tuple(-y for y in v)
    return v


@dataclass(frozen=True)
class RootSet:
    """Roots of a lattice, stored as lexicographically positive representatives."""

    positive: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return 2 * len(self.positive)

    def __iter__(self):
        return iter(self.all())

    def __contains__(self, v) -> bool:
        v = tuple(int(x) for x in v)
        return _canonical_sign(v) in self._index

    @property
    def _index(self) -> frozenset:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = frozenset(self.positive)
            object.__setattr__(self, "_idx", idx)
        return idx

    def all(self) -> list[tuple[int, ...]]:
        out = list(self.positive) + [tuple(-x for x in v) for v in self.positive]
        out.sort()
        return out

    def as_set(self) -> frozenset:
        return frozenset(self.all())


def enumerate_roots(L: Lattice) -> RootSet:
    _require_definite(L)
    pos = []
    for x, val in enumerate_short_vectors(L.gram, 2):
        if val == 2:
            c = _canonical_sign(x)
            if c == x:
                pos.append(x)
    pos.sort()
    return RootSet(tuple(pos))


def roots_by_orbit(t: AdeType) -> RootSet:
    """Roots of an ADE lattice as the Weyl orbit of the simple roots.

    This is independent of the enumeration kernel and serves as a cross-check.
    """
    g = _ade_gram(t)
    n = t.n
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    seen = set(simple)
    frontier = list(simple)
    while frontier:
        new = []
        for x in frontier:
            for i in range(n):
                p = sum(x[k] * g[k][i] for k in range(n))
                if p:
                    y = list(x)
                    y[i] += p
                    y = tuple(y)
                    if y not in seen:
                        seen.add(y)
                        new.append(y)
        frontier = new
    pos = sorted({_canonical_sign(v) for v in seen})
    return RootSet(tuple(pos))


# --- root system decomposition -------------------------------------------


def simple_roots(R: RootSet) -> list[tuple[int, ...]]:
    """Simple system for the lexicographic positivity (which is a group order)."""
    pos = R.positive
    idx = R._index
    out = []
    for r in pos:
        decomposable = False
        for p in pos:
            if p == r:
                continue
            d = tuple(a - b for a, b in zip(r, p))
            if _canonical_sign(d) == d and d in idx:
                decomposable = True
                break
        if not decomposable:
            out.append(r)
    return out


@dataclass(frozen=True)
class RootComponent:
    type: AdeType
    simple: tuple[tuple[int, ...], ...]  # simple roots in Bourbaki order, lattice coordinates


def identify_ade(rank: int, abs_det: int, root_count: int) -> AdeType:
    cands = [AdeType("A", rank)]
    if rank >= 4:
        cands.append(AdeType("D", rank))
    if rank in (6, 7, 8):
        cands.append(AdeType("E", rank))
    for t in cands:
        if (t.abs_det, t.root_count) == (abs_det, root_count):
            return t
    raise LatticeError(f"no ADE type with rank {rank}, |det| {abs_det}, {root_count} roots")


def _order_component(L: Lattice, simple: list[tuple[int, ...]], t: AdeType) -> tuple[tuple[int, ...], ...]:
    g = nx.Graph()
    g.add_nodes_from(range(len(simple)))
    for i, j in itertools.combinations(range(len(simple)), 2):
        if L.inner(simple[i], simple[j]):
            g.add_edge(i, j)
    gm = nx.algorithms.isomorphism.GraphMatcher(dynkin_graph(t), g)
    best = None
    for mapping in gm.isomorphisms_iter():
        order = tuple(simple[mapping[k]] for k in range(t.n))
        if best is None or order < best:
            best = order
    assert best is not None
    return best


def root_components(L: Lattice, roots: RootSet | None = None) -> list[RootComponent]:
    """Indecomposable components of the root system, each with an ordered simple system."""
    R = roots if roots is not None else enumerate_roots(L)
    simple = simple_roots(R)
    graph = nx.Graph()
    graph.add_nodes_from(range(len(simple)))
    for i, j in itertools.combinations(range(len(simple)), 2):
        if L.inner(simple[i], simple[j]):
            graph.add_edge(i, j)
    comps = []
    for nodes in nx.connected_components(graph):
        part = [simple[i] for i in sorted(nodes)]
        gram = [[L.inner(a, b) for b in part] for a in part]
        k = len(part)
        det = abs(determinant(gram))
        count = len(enumerate_roots(Lattice(tuple(map(tuple, gram)))))
        t = identify_ade(k, det, count)
        comps.append(RootComponent(t, _order_component(L, part, t)))
    comps.sort(key=lambda c: (c.type.sort_key, c.simple))
    return comps


def root_decomposition(L: Lattice) -> list[AdeType]:
    """ADE types of the root system of ``L`` as a sorted multiset (list)."""
    _require_definite(L)
    return [c.type for c in root_components(L)]


# --- Weyl groups ------------------------------------------------------------


WEYL_RANK_LIMIT = 6


@lru_cache(maxsize=None)
def weyl_group(t: AdeType) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All Weyl group elements as integer matrices acting on row vectors of
    simple-root coordinates (``x -> x @ w``)."""
    if t.rank > WEYL_RANK_LIMIT:
        raise ValueError(f"Weyl group of {t} is not materialized (rank > {WEYL_RANK_LIMIT})")
    g = _ade_gram(t)
    n = t.n
    gens = []
    for i in range(n):
        s = [[int(r == c) for c in range(n)] for r in range(n)]
        for r in range(n):
            s[r][i] += g[r][i]
        gens.append(tuple(map(tuple, s)))
    ident = tuple(tuple(int(r == c) for c in range(n)) for r in range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        new = []
        for w in frontier:
            for s in gens:
                ws = tuple(map(tuple, mat_mul(w, s)))
                if ws not in seen:
                    seen.add(ws)
                    new.append(ws)
        frontier = new
    return tuple(sorted(seen))


def from_epsilon(t: AdeType, vectors: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
    """Convert vectors in the standard epsilon basis to simple-root coordinates.

    Type A_n uses epsilon_1..epsilon_{n+1} with alpha_i = e_i - e_{i+1}; type D_n
    uses epsilon_1..epsilon_n with alpha_n = e_{n-1} + e_n.
    """
    n = t.n
    if t.family == "A":
        simple = [[int(j == i) - int(j == i + 1) for j in range(n + 1)] for i in range(n)]
    elif t.family == "D":
        simple = [[int(j == i) - int(j == i + 1) for j in range(n)] for i in range(n - 1)]
        simple.append([int(j in (n - 2, n - 1)) for j in range(n)])
    else:
        raise ValueError("epsilon coordinates are only provided for types A and D")
    out = []
    for v in vectors:
        v = list(v)
        if len(v) != len(simple[0]):
            raise ValueError(f"expected {len(simple[0])} epsilon coordinates")
        # solve c @ simple = v; simple has full row rank, use the Gram trick
        ss = [[sum(a * b for a, b in zip(r1, r2)) for r2 in simple] for r1 in simple]
        rhs = [sum(a * b for a, b in zip(r, v)) for r in simple]
        inv = rational_inverse(ss)
        c = [sum(inv[i][j] * rhs[j] for j in range(n)) for i in range(n)]
        back = [sum(c[i] * simple[i][j] for i in range(n)) for j in range(len(v))]
        if back != v or any(Fraction(x).denominator != 1 for x in c):
            raise ValueError(f"{tuple(v)} is not in the root lattice of {t}")
        out.append(tuple(int(x) for x in c))
    return out


def weyl_basis_containment(R: AdeType, orthogonal_roots: Sequence[Sequence[int]]) -> bool:
    """Is there a Weyl element carrying every given root into the simple basis?

    Roots are in simple-root coordinates.  Images are accepted up to sign:
    for pairwise orthogonal roots this changes nothing, because the reflection
    in an image root flips it and fixes the others.
    """
    g = _ade_gram(R)
    roots = [tuple(int(x) for x in r) for r in orthogonal_roots]
    for r in roots:
        if len(r) != R.n or bilinear(g, r, r) != -2:
            raise ValueError(f"{r} is not a root of {R}")
    for a, b in itertools.combinations(roots, 2):
        if bilinear(g, a, b) != 0:
            raise ValueError(f"roots {a} and {b} are not orthogonal")
    n = R.n
    for w in weyl_group(R):
        ok = True
        for r in roots:
            img = [sum(r[k] * w[k][j] for k in range(n)) for j in range(n)]
            if sum(abs(x) for x in img) != 1:
                ok = False
                break
        if ok:
            return True
    return False


# --- isometry ---------------------------------------------------------------


def _fast_invariants(L: Lattice):
    dg = L.discriminant_group
    inv = [abs(L.det), dg.invariant_factors]
    if dg.order <= 1 << 14:
        inv.append(tuple(sorted(dg.q(x) for x in dg.elements())))
    return inv


def is_isometric(L1: Lattice, L2: Lattice) -> bool:
    """Decide whether two negative definite lattices are isometric.

    Cheap invariants are compared first.  When the root system has full rank
    the question reduces exactly to equivalence of glue codes over the root
    lattice (every isometry preserves the root system, and the automorphisms
    of an ADE lattice act on its discriminant through diagram symmetries).
    Otherwise a short-vector backtracking search decides it.
    """
    if L1.rank != L2.rank:
        raise RankMismatchError(f"rank {L1.rank} vs rank {L2.rank}")
    _require_definite(L1)
    _require_definite(L2)
    if L1.gram == L2.gram:
        return True
    if _fast_invariants(L1) != _fast_invariants(L2):
        return False
    R1, R2 = enumerate_roots(L1), enumerate_roots(L2)
    if len(R1) != len(R2):
        return False
    c1, c2 = root_components(L1, R1), root_components(L2, R2)
    if [c.type for c in c1] != [c.type for c in c2]:
        return False
    if sum(c.type.rank for c in c1) == L1.rank:
        from .symmetry import glue_structure_from_components, subgroups_equivalent

        s1, h1 = glue_structure_from_components(L1, c1)
        s2, h2 = glue_structure_from_components(L2, c2)
        return subgroups_equivalent(s1, h1, s2, h2)
    return _backtrack_isometry(L1, L2) is not None


def _backtrack_isometry(L1: Lattice, L2: Lattice):
    """Plesken-Souvignier style search; returns the image basis or None."""
    n = L1.rank
    q1 = [[-v for v in row] for row in L1.gram]
    t, qr = lll_reduce(q1)
    basis = [tuple(row) for row in t]
    norms = [qr[i][i] for i in range(n)]
    top = max(norms)
    short1 = [v for v, _ in enumerate_short_vectors(L1.gram, top) if any(v)]
    short2 = [v for v, _ in enumerate_short_vectors(L2.gram, top) if any(v)]
    if len(short1) != len(short2):
        return None

    def fingerprint(L, v, pool):
        counts = {}
        for w in pool:
            key = (-L.norm(w), -L.inner(v, w))
            counts[key] = counts.get(key, 0) + 1
        return tuple(sorted(counts.items()))

    fp_basis = [fingerprint(L1, b, short1) for b in basis]
    by_norm: dict = {}
    for v in short2:
        by_norm.setdefault(-L2.norm(v), []).append(v)
    cands = []
    for i, b in enumerate(basis):
        pool = [v for v in by_norm.get(norms[i], []) if fingerprint(L2, v, short2) == fp_basis[i]]
        if not pool:
            return None
        cands.append(pool)
    order = sorted(range(n), key=lambda i: len(cands[i]))
    image: dict[int, tuple] = {}

    def rec(k: int) -> bool:
        if k == n:
            return True
        i = order[k]
        for v in cands[i]:
            if all(L2.inner(v, image[j]) == L1.inner(basis[i], basis[j]) for j in image):
                image[i] = v
                if rec(k + 1):
                    return True
                del image[i]
        return False

    return [image[i] for i in range(n)] if rec(0) else None
