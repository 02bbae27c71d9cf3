"""Independent reference computations used to derive frozen test values.

Nothing here imports k3glue: determinants and normal forms go through
sympy, roots and dual cosets are found by plain box enumeration.
"""

import itertools
from fractions import Fraction

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form as _sympy_snf


def det_sympy(m):
    return int(Matrix(m).det())


def det_cofactor(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        if m[0][j]:
            minor = [row[:j] + row[j + 1:] for row in m[1:]]
            total += (-1) ** j * m[0][j] * det_cofactor(minor)
    return total


def invariant_factors_sympy(m):
    d = _sympy_snf(Matrix(m), domain=ZZ)
    n = min(d.shape)
    return [abs(int(d[i, i])) for i in range(n)]


def leading_minors_sympy(m):
    M = Matrix(m)
    return [int(M[:k, :k].det()) for k in range(1, M.rows + 1)]


def ade_gram_oracle(family, n):
    """Negative definite Cartan form: -2 on the diagonal, 1 on edges."""
    edges = []
    if family == "A":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif family == "D":
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    elif family == "E":
        # chain 0..n-2 with the last node on the third one
        edges = [(i, i + 1) for i in range(n - 2)] + [(2, n - 1)]
    g = [[-2 * int(i == j) for j in range(n)] for i in range(n)]
    for a, b in edges:
        g[a][b] = g[b][a] = 1
    return g


def block_sum(*grams):
    n = sum(len(g) for g in grams)
    out = [[0] * n for _ in range(n)]
    off = 0
    for g in grams:
        for i, row in enumerate(g):
            for j, x in enumerate(row):
                out[off + i][off + j] = x
        off += len(g)
    return out


def norm(g, x):
    return sum(g[i][j] * x[i] * x[j] for i in range(len(x)) for j in range(len(x)))


def roots_box(g, bound=2):
    """All x with x.x = -2 and every |x_i| <= bound (fine for small ADE blocks)."""
    n = len(g)
    out = set()
    for x in itertools.product(range(-bound, bound + 1), repeat=n):
        if norm(g, x) == -2:
            out.add(x)
    return out


def dual_cosets(g):
    """Representatives of L^v/L as vectors m^-1 z for z in a box, reduced mod Z^n."""
    M = Matrix(g)
    inv = M.inv()
    n = len(g)
    d = abs(int(M.det()))
    seen = set()
    for z in itertools.product(range(d), repeat=n):
        y = inv * Matrix(z)
        rep = tuple(Fraction(int(v.p), int(v.q)) % 1 for v in y)
        seen.add(rep)
    return seen


def binary_code_span(rows, length):
    out = {tuple([0] * length)}
    for coeffs in itertools.product((0, 1), repeat=len(rows)):
        w = [0] * length
        for c, r in zip(coeffs, rows):
            if c:
                w = [(a + b) % 2 for a, b in zip(w, r)]
        out.add(tuple(w))
    return out


def max_binary_dimension_brute(length, weights):
    """Greedy-free exhaustive search over codes spanned by allowed words."""
    words = []
    for w in weights:
        if w <= length:
            for pos in itertools.combinations(range(length), w):
                words.append(tuple(int(i in pos) for i in range(length)))
    best = 0

    def rec(span, start, dim):
        nonlocal best
        best = max(best, dim)
        for k in range(start, len(words)):
            w = words[k]
            if w in span:
                continue
            new = span | {tuple((a + b) % 2 for a, b in zip(w, s)) for s in span}
            if all(sum(x) in weights for x in new if any(x)):
                rec(new, k + 1, dim + 1)

    rec({tuple([0] * length)}, 0, 0)
    return best


def invariants_from_orders(orders):
    """Invariant factors of a finite abelian group given the order of every element.

    For each prime p the number of elements killed by p^k is prod p^min(k, e_i),
    which fixes the exponents e_i.
    """
    from sympy import factorint

    n = len(orders)
    per_prime = {}
    for p, v in factorint(n).items():
        counts = [1]
        while counts[-1] < p**v:
            k = len(counts)
            if k > v:
                raise ValueError("orders do not come from a group")
            counts.append(sum(1 for o in orders if (p**k) % o == 0))
        # exps[k-1] = number of exponents e_i >= k
        exps = []
        for k in range(1, len(counts)):
            ratio, m = counts[k] // counts[k - 1], 0
            while ratio > 1:
                ratio //= p
                m += 1
            exps.append(m)
        es = []
        for k, ge in enumerate(exps, 1):
            nxt = exps[k] if k < len(exps) else 0
            es += [k] * (ge - nxt)
        per_prime[p] = sorted(es)
    size = max((len(v) for v in per_prime.values()), default=0)
    out = [1] * size
    for p, es in per_prime.items():
        es = [0] * (size - len(es)) + es
        for i, x in enumerate(es):
            out[i] *= p**x
    return tuple(x for x in out if x > 1)
