"""Glue codes over direct sums of ADE lattices, up to their symmetry.

For ``F = R_1 + ... + R_s`` with every ``R_i`` an ADE lattice in standard
form, ``disc(F)`` is the product of the summand discriminant groups and an
element is a tuple of class indices, one per summand.  Automorphisms of
``F`` act on ``disc(F)`` through permutations of isomorphic summands and
Dynkin diagram symmetries of each summand (Weyl groups act trivially).

Equivalence of glue subgroups under that group is decided by canonical
labelling (nauty) of a coloured graph with three layers: summands, summand
classes and glue elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd
from typing import Callable, Iterable, Mapping, Sequence

import networkx as nx
import pynauty

from .exactlin import determinant, rational_inverse, reduce_mod_one
from .lattice import Lattice, LatticeError, discriminant_group, invariant_factors_of, mod2
from .roots import (
    AdeType,
    RootComponent,
    _ade_gram,
    ade_gram,
    dynkin_graph,
    enumerate_roots,
    identify_ade,
    min_coset_norm,
)

Element = tuple[int, ...]


class SearchOverflowError(RuntimeError):
    def __init__(self, reached: int, limit: int):
        super().__init__(f"glue search exceeded {limit} symmetry classes ({reached} reached)")
        self.reached = reached
        self.limit = limit


# --- one summand ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SummandDisc:
    """Tables for the discriminant group of one ADE lattice."""

    type: AdeType
    reps: tuple[tuple[Fraction, ...], ...]  # class representatives in [0,1)^n, zero first
    add: tuple[tuple[int, ...], ...]
    neg: tuple[int, ...]
    order: tuple[int, ...]
    q: tuple[Fraction, ...]
    min_norm: tuple[Fraction, ...]  # minimum of |x.x| on the coset
    orbit: tuple[int, ...]  # orbit id under diagram automorphisms
    autos: tuple[tuple[int, ...], ...]  # class permutations induced by diagram automorphisms
    support2: tuple[int, ...]  # curves with coefficient 1/2 (order-2 classes)
    support3: tuple[int, ...]  # A2-configurations carrying the class (order-3 classes)
    cycle_generator: int | None  # generator used for cycle edges, cyclic groups of order >= 3

    @property
    def size(self) -> int:
        return len(self.reps)

    def index_of(self, rep: Sequence) -> int:
        return self._index[reduce_mod_one(rep)]

    @cached_property
    def _index(self) -> dict:
        return {r: i for i, r in enumerate(self.reps)}


def _support3(t: AdeType, rep: Sequence[Fraction]) -> int:
    nz = [i for i, x in enumerate(rep) if x]
    g = dynkin_graph(t).subgraph(nz)
    return nx.number_connected_components(g)


@lru_cache(maxsize=None)
def summand_disc(t: AdeType) -> SummandDisc:
    L = ade_gram(t)
    dg = discriminant_group(L)
    reps = sorted(e.vector for e in dg.elements())
    index = {r: i for i, r in enumerate(reps)}
    n = len(reps)

    def idx(v):
        return index[reduce_mod_one(v)]

    add = tuple(tuple(idx([a + b for a, b in zip(reps[i], reps[j])]) for j in range(n)) for i in range(n))
    neg = tuple(idx([-a for a in reps[i]]) for i in range(n))
    order = []
    for i in range(n):
        k, c = 1, i
        while c != 0:
            c = add[c][i]
            k += 1
        order.append(k if i else 1)
    q = tuple(dg.q(r) for r in reps)
    mins = tuple(Fraction(0) if i == 0 else min_coset_norm(L.gram, reps[i]) for i in range(n))
    autos = set()
    dyn = dynkin_graph(t)
    for m in nx.algorithms.isomorphism.GraphMatcher(dyn, dyn).isomorphisms_iter():
        perm = []
        for r in reps:
            img = [Fraction(0)] * t.n
            for a, b in m.items():
                img[b] = r[a]
            perm.append(idx(img))
        autos.add(tuple(perm))
    autos = tuple(sorted(autos))
    orbit = [None] * n
    next_id = 0
    for i in range(n):
        if orbit[i] is None:
            for p in autos:
                orbit[p[i]] = next_id
            next_id += 1
    sup2 = tuple(sum(1 for x in reps[i] if x == Fraction(1, 2)) if order[i] == 2 else 0 for i in range(n))
    sup3 = tuple(_support3(t, reps[i]) if order[i] == 3 else 0 for i in range(n))
    gen = None
    if n >= 3 and max(order) == n:
        gen = min(i for i in range(n) if order[i] == n)
    return SummandDisc(t, tuple(reps), add, neg, tuple(order), q, mins, tuple(orbit), autos, sup2, sup3, gen)


# --- the whole sum --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GlueStructure:
    """``disc(F)`` for ``F`` the direct sum of the given ADE types, in this order."""

    types: tuple[AdeType, ...]

    @cached_property
    def summands(self) -> tuple[SummandDisc, ...]:
        return tuple(summand_disc(t) for t in self.types)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, o = [], 0
        for t in self.types:
            out.append(o)
            o += t.n
        return tuple(out)

    @property
    def rank(self) -> int:
        return sum(t.n for t in self.types)

    @property
    def zero(self) -> Element:
        return (0,) * len(self.types)

    @cached_property
    def order(self) -> int:
        out = 1
        for s in self.summands:
            out *= s.size
        return out

    def add(self, x: Element, y: Element) -> Element:
        return tuple(s.add[a][b] for s, a, b in zip(self.summands, x, y))

    def neg(self, x: Element) -> Element:
        return tuple(s.neg[a] for s, a in zip(self.summands, x))

    def scale(self, k: int, x: Element) -> Element:
        out = self.zero
        for _ in range(k % self.exponent):
            out = self.add(out, x)
        return out

    @cached_property
    def exponent(self) -> int:
        e = 1
        for s in self.summands:
            for o in s.order:
                e = e * o // gcd(e, o)
        return e

    def order_of(self, x: Element) -> int:
        e = 1
        for s, a in zip(self.summands, x):
            o = s.order[a]
            e = e * o // gcd(e, o)
        return e

    def q(self, x: Element) -> Fraction:
        return mod2(sum((s.q[a] for s, a in zip(self.summands, x)), Fraction(0)))

    def min_norm(self, x: Element) -> Fraction:
        return sum((s.min_norm[a] for s, a in zip(self.summands, x)), Fraction(0))

    def support(self, x: Element, p: int) -> int:
        if p == 2:
            return sum(s.support2[a] for s, a in zip(self.summands, x))
        if p == 3:
            return sum(s.support3[a] for s, a in zip(self.summands, x))
        raise ValueError("supports are defined for p = 2 and p = 3")

    def elements(self) -> Iterable[Element]:
        return itertools.product(*(range(s.size) for s in self.summands))

    def vector(self, x: Element) -> tuple[Fraction, ...]:
        out: list[Fraction] = []
        for s, a in zip(self.summands, x):
            out.extend(s.reps[a])
        return tuple(out)

    def element_of(self, v: Sequence) -> Element:
        """Class of a dual vector of ``F``; raises if ``v`` is not in the dual."""
        v = [Fraction(x) for x in v]
        if len(v) != self.rank:
            raise LatticeError(f"expected {self.rank} coordinates, got {len(v)}")
        out = []
        for s, o in zip(self.summands, self.offsets):
            sub = reduce_mod_one(v[o : o + s.type.n])
            if sub not in s._index:
                raise LatticeError(f"vector is not in the dual lattice (block {s.type} at {o})")
            out.append(s._index[sub])
        return tuple(out)

    def span(self, gens: Iterable[Element]) -> frozenset[Element]:
        elems = {self.zero}
        for g in gens:
            if g in elems:
                continue
            cur = list(elems)
            step = g
            mult = g
            while mult not in elems:
                elems.update(self.add(e, mult) for e in cur)
                mult = self.add(mult, step)
        return frozenset(elems)

    def extend(self, H: frozenset, a: Element, allowed: set | None = None) -> frozenset | None:
        """``<H, a>``; with ``allowed`` given, None as soon as an element falls outside it."""
        elems = set(H)
        mult = a
        hl = list(H)
        while mult not in H:
            for e in hl:
                s = self.add(e, mult)
                if allowed is not None and s not in allowed:
                    return None
                elems.add(s)
            mult = self.add(mult, a)
        return frozenset(elems)

    def group_invariants(self, H: Iterable[Element]) -> tuple[int, ...]:
        """Invariant factors of a subgroup, from its element orders."""
        H = list(H)
        return _invariants_from_orders([self.order_of(x) for x in H])

    def generators(self, H: frozenset) -> list[Element]:
        """A small generating set, chosen deterministically."""
        gens: list[Element] = []
        cur = frozenset([self.zero])
        for x in sorted(H, key=lambda e: (-self.order_of(e), e)):
            if x not in cur:
                gens.append(x)
                cur = self.span(gens)
                if len(cur) == len(H):
                    break
        return gens

    def apply(self, perm: Sequence[int], autos: Sequence[Sequence[int]], x: Element) -> Element:
        """Image of ``x`` under summand permutation ``perm`` and per-summand class maps."""
        out = [0] * len(x)
        for i, a in enumerate(x):
            out[perm[i]] = autos[i][a]
        return tuple(out)

    # graph layers shared by every canonical key
    @cached_property
    def _base_graph(self):
        colors: dict[int, tuple] = {}
        adj: dict[int, set] = {}
        s = len(self.types)
        class_node = []
        nid = s
        for i, sd in enumerate(self.summands):
            colors[i] = ("0S", str(sd.type))
            adj.setdefault(i, set())
            row = []
            for c in range(sd.size):
                colors[nid] = ("1C", str(sd.type), sd.orbit[c])
                adj.setdefault(nid, set()).add(i)
                adj[i].add(nid)
                row.append(nid)
                nid += 1
            g = sd.cycle_generator
            if g is not None:
                for c in range(sd.size):
                    d = sd.add[c][g]
                    adj[row[c]].add(row[d])
                    adj[row[d]].add(row[c])
            class_node.append(row)
        return colors, adj, class_node, nid


def _invariants_from_orders(orders: list[int]) -> tuple[int, ...]:
    # number of elements killed by p^k determines the p-primary part
    n = len(orders)
    if n == 1:
        return ()
    from sympy import factorint

    cyclic_orders = []
    for p, e in sorted(factorint(n).items()):
        counts = []
        k = 1
        while True:
            c = sum(1 for o in orders if (p**k) % o == 0)
            counts.append(c)
            if c == p**e:
                break
            k += 1
        # c_k = |H[p^k]|; number of cyclic factors of order >= p^k is log_p(c_k / c_{k-1})
        prev = 1
        ranks = []
        for c in counts:
            r = 0
            x = c // prev
            while x > 1:
                x //= p
                r += 1
            ranks.append(r)
            prev = c
        for k in range(len(ranks)):
            nxt = ranks[k + 1] if k + 1 < len(ranks) else 0
            cyclic_orders.extend([p ** (k + 1)] * (ranks[k] - nxt))
    return invariant_factors_of(cyclic_orders)


def canonical_key(struct: GlueStructure, elements: Mapping[Element, object] | Iterable[Element]) -> tuple:
    """Isomorphism key of a set of tagged elements under the symmetry of ``F``.

    Two inputs receive the same key iff some symmetry of ``F`` maps one onto
    the other preserving tags.  Zero is ignored.
    """
    if not isinstance(elements, Mapping):
        elements = {x: 0 for x in elements}
    colors, adj, class_node, nid = struct._base_graph
    colors = dict(colors)
    adj = {k: set(v) for k, v in adj.items()}
    for x in sorted(elements):
        if not any(x):
            continue
        colors[nid] = ("2E", elements[x])
        nbrs = {class_node[i][a] for i, a in enumerate(x) if a}
        adj[nid] = nbrs
        for m in nbrs:
            adj[m].add(nid)
        nid += 1
    keys = sorted(set(colors.values()), key=repr)
    part = [set(v for v, c in colors.items() if c == k) for k in keys]
    g = pynauty.Graph(nid, directed=False, adjacency_dict={k: sorted(v) for k, v in adj.items()}, vertex_coloring=part)
    sizes = tuple((repr(k), len(p)) for k, p in zip(keys, part))
    return sizes, pynauty.certificate(g)


def subgroups_equivalent(s1: GlueStructure, h1, s2: GlueStructure, h2) -> bool:
    if sorted(s1.types) != sorted(s2.types):
        return False
    if len(h1) != len(h2):
        return False
    # put both on a common summand order
    def normalise(s, h):
        perm = sorted(range(len(s.types)), key=lambda i: (s.types[i].sort_key, i))
        t = GlueStructure(tuple(s.types[i] for i in perm))
        return t, [tuple(x[i] for i in perm) for x in h]

    t1, g1 = normalise(s1, h1)
    t2, g2 = normalise(s2, h2)
    return canonical_key(t1, g1) == canonical_key(t2, g2)


def glue_structure_from_components(L: Lattice, comps: Sequence[RootComponent]) -> tuple[GlueStructure, frozenset]:
    """Glue code of a lattice whose roots span a finite-index sublattice.

    Returns the structure of the root lattice (in the order of ``comps``)
    and ``L / R`` as a subgroup of ``disc(R)``.
    """
    struct = GlueStructure(tuple(c.type for c in comps))
    simple = [r for c in comps for r in c.simple]
    if len(simple) != L.rank:
        raise LatticeError("root system does not have full rank")
    sinv = rational_inverse(simple)
    gens = [struct.element_of(row) for row in sinv]
    return struct, struct.span(gens)


# --- admissible subgroup search -------------------------------------------


@dataclass
class SearchResult:
    subgroups: list[frozenset]
    maximal: list[bool]
    classes_seen: int


def admissible_elements(struct: GlueStructure, *, supports: Mapping[int, Sequence[int]] | None = None,
                        predicate: Callable[[Element], bool] | None = None) -> set[Element]:
    """Nonzero glue elements allowed in a root-preserving even overlattice.

    An element qualifies when ``q = 0`` mod 2, its coset has no vector of
    norm 2 and, for elements of prime order ``p`` listed in ``supports``,
    its curve support has an allowed size.
    """
    # integer numerators over a common denominator keep the sweep cheap
    den = 1
    for s in struct.summands:
        for v in s.q + s.min_norm:
            den = den * v.denominator // gcd(den, v.denominator)
    qn = [[int(v * den) for v in s.q] for s in struct.summands]
    mn = [[int(v * den) for v in s.min_norm] for s in struct.summands]
    out = set()
    for x in struct.elements():
        if sum(t[a] for t, a in zip(qn, x)) % (2 * den):
            continue
        if sum(t[a] for t, a in zip(mn, x)) <= 2 * den:
            continue
        if supports:
            o = struct.order_of(x)
            if o in supports and struct.support(x, o) not in supports[o]:
                continue
        if predicate is not None and not predicate(x):
            continue
        out.add(x)
    return out


def search_subgroups(struct: GlueStructure, allowed: set[Element], *, max_order: int | None = None,
                     limit: int = 20000, order_filter: Callable[[int], bool] | None = None) -> SearchResult:
    """All subgroups of ``disc(F)`` with every nonzero element in ``allowed``,
    one per symmetry class, breadth first by number of generators.

    ``max_order`` stops growth; ``order_filter(|H|)`` can prune orders that
    can never lead to a wanted subgroup.  Raises SearchOverflowError once
    more than ``limit`` classes have been seen.
    """
    allowed_plus = set(allowed) | {struct.zero}
    cands = sorted(allowed)
    zero = frozenset([struct.zero])
    seen: dict = {canonical_key(struct, zero): zero}
    found = [zero]
    extendable = {zero: False}
    frontier = [zero]
    while frontier:
        nxt = []
        for H in frontier:
            tried: set = set()
            for a in cands:
                if a in H:
                    continue
                H2 = struct.extend(H, a, allowed_plus)
                if H2 is None:
                    continue
                extendable[H] = True
                if H2 in tried:
                    continue
                tried.add(H2)
                if max_order is not None and len(H2) > max_order:
                    continue
                if order_filter is not None and not order_filter(len(H2)):
                    continue
                key = canonical_key(struct, H2)
                if key in seen:
                    continue
                seen[key] = H2
                found.append(H2)
                extendable[H2] = False
                nxt.append(H2)
                if len(seen) > limit:
                    raise SearchOverflowError(len(seen), limit)
        frontier = nxt
    # any admissible extension, even one beyond max_order, makes H non-maximal
    maximal = [not extendable[H] for H in found]
    return SearchResult(found, maximal, len(seen))


def structure_of(F: Lattice) -> GlueStructure:
    """Read off the ADE blocks of a Gram matrix in standard block form.

    Blocks must be contiguous and each must equal the standard Gram matrix
    of its type; anything else raises LatticeError.
    """
    g = F.gram
    n = F.rank
    types = []
    start = 0
    while start < n:
        end = start + 1
        reach = start
        while True:
            for i in range(start, end):
                for j in range(n):
                    if g[i][j] and j != i:
                        if j < start:
                            raise LatticeError("Gram matrix is not in block form")
                        reach = max(reach, j)
            if reach < end:
                break
            end = reach + 1
        block = tuple(tuple(row[start:end]) for row in g[start:end])
        k = end - start
        sub = Lattice(block)
        try:
            t = identify_ade(k, abs(determinant(block)), len(enumerate_roots(sub)))
        except LatticeError:
            raise LatticeError(f"block at {start} is not an ADE root lattice") from None
        if _ade_gram(t) != block:
            raise LatticeError(f"block at {start} is {t} but not in standard numbering")
        types.append(t)
        start = end
    return GlueStructure(tuple(types))
