"""Exact integer and rational dense linear algebra.

Matrices are plain nested lists (or tuples) of Python ints; rational
vectors are tuples of :class:`fractions.Fraction`.  Nothing here ever
touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

IntMatrix = list[list[int]]
RatVector = tuple[Fraction, ...]


class MatrixShapeError(ValueError):
    pass


def _check_rect(m: Sequence[Sequence[int]]) -> tuple[int, int]:
    rows = len(m)
    if rows == 0:
        raise MatrixShapeError("matrix has no rows")
    cols = len(m[0])
    if cols == 0:
        raise MatrixShapeError("matrix has no columns")
    for row in m:
        if len(row) != cols:
            raise MatrixShapeError("ragged matrix")
    return rows, cols


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def copy_matrix(m: Sequence[Sequence[int]]) -> IntMatrix:
    return [list(row) for row in m]


def transpose(m: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*m)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def vec_mat(v: Sequence, a: Sequence[Sequence]) -> list:
    n = len(a[0])
    out = [0] * n
    for x, row in zip(v, a):
        if x:
            for j in range(n):
                out[j] += x * row[j]
    return out


def is_symmetric(m: Sequence[Sequence[int]]) -> bool:
    n = len(m)
    return all(len(row) == n for row in m) and all(
        m[i][j] == m[j][i] for i in range(n) for j in range(i + 1, n)
    )


def determinant(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free Bareiss elimination.

    >>> determinant([[-2, 1], [1, -2]])
    3
    """
    rows, cols = _check_rect(m)
    if rows != cols:
        raise MatrixShapeError(f"determinant of a non-square {rows}x{cols} matrix")
    a = copy_matrix(m)
    n = rows
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (akk * row_i[j] - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def leading_minors(m: Sequence[Sequence[int]]) -> list[int]:
    n, _ = _check_rect(m)
    return [determinant([list(row[:k]) for row in m[:k]]) for k in range(1, n + 1)]


def is_negative_definite(m: Sequence[Sequence[int]]) -> bool:
    """True iff the k-th leading principal minor has sign (-1)^k for every k."""
    _check_rect(m)
    if not is_symmetric(m):
        raise MatrixShapeError("definiteness test needs a symmetric matrix")
    for k, minor in enumerate(leading_minors(m), start=1):
        if minor == 0 or (minor > 0) != (k % 2 == 0):
            return False
    return True


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(d, u, v)`` with ``d = u*m*v`` diagonal, ``u``, ``v`` unimodular.

    The diagonal satisfies ``d[0][0] | d[1][1] | ...`` with non-negative
    entries.  Pivots are chosen of minimal absolute value in the remaining
    block, which keeps intermediate entries small on Gram matrices.

    >>> smith_normal_form([[-2, 1], [1, -2]])[0]
    [[1, 0], [0, 3]]
    """
    rows, cols = _check_rect(m)
    a = copy_matrix(m)
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i: int, j: int) -> None:
        if i != j:
            a[i], a[j] = a[j], a[i]
            u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        if i != j:
            for row in a:
                row[i], row[j] = row[j], row[i]
            for row in v:
                row[i], row[j] = row[j], row[i]

    def add_row(dst: int, src: int, q: int) -> None:
        # row_dst += q * row_src
        ra, rs = a[dst], a[src]
        for j in range(cols):
            ra[j] += q * rs[j]
        ua, us = u[dst], u[src]
        for j in range(rows):
            ua[j] += q * us[j]

    def add_col(dst: int, src: int, q: int) -> None:
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    x = a[i][j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
                        if best[0] == 1:
                            break
                if best is not None and best[0] == 1:
                    break
            if best is None:
                return a, u, v
            _, pi, pj = best
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = a[t][t]
            clean = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    if a[t][j]:
                        clean = False
            if not clean:
                continue
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return a, u, v


def invariant_factors(m: Sequence[Sequence[int]]) -> list[int]:
    d, _, _ = smith_normal_form(m)
    return [d[i][i] for i in range(min(len(d), len(d[0])))]


def rational_inverse(m: Sequence[Sequence]) -> list[list[Fraction]]:
    """Gauss-Jordan inverse over Q."""
    n, c = _check_rect(m)
    if n != c:
        raise MatrixShapeError("inverse of a non-square matrix")
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                rc = a[col]
                a[r] = [x - f * y for x, y in zip(a[r], rc)]
    return [row[n:] for row in a]


def unimodular_inverse(m: Sequence[Sequence[int]]) -> IntMatrix:
    inv = rational_inverse(m)
    out = []
    for row in inv:
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append([int(x) for x in row])
    return out


def hermite_normal_form(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style Hermite normal form of the row lattice of ``m``.

    Zero rows are dropped; pivots are positive and entries above each pivot
    are reduced into ``[0, pivot)``.
    """
    rows, cols = _check_rect(m)
    a = copy_matrix(m)
    r = 0
    for col in range(cols):
        if r == rows:
            break
        while True:
            nz = [i for i in range(r, rows) if a[i][col]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][col]))
            a[r], a[piv] = a[piv], a[r]
            p = a[r][col]
            done = True
            for i in range(r + 1, rows):
                if a[i][col]:
                    q = a[i][col] // p
                    if q:
                        ar = a[r]
                        a[i] = [x - q * y for x, y in zip(a[i], ar)]
                    if a[i][col]:
                        done = False
            if done:
                break
        if a[r][col] == 0:
            continue
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
        p = a[r][col]
        for i in range(r):
            q = a[i][col] // p
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return [row for row in a[:r]]


def common_denominator(xs) -> int:
    den = 1
    for x in xs:
        d = Fraction(x).denominator
        den = den * d // gcd(den, d)
    return den


def to_fractions(v) -> RatVector:
    return tuple(Fraction(x) for x in v)


def reduce_mod_one(v) -> RatVector:
    """Representative of ``v`` modulo Z^n with every entry in [0, 1)."""
    return tuple(Fraction(x) - (Fraction(x).numerator // Fraction(x).denominator) for x in v)


def bilinear(gram: Sequence[Sequence[int]], x: Sequence, y: Sequence):
    if any(isinstance(t, Fraction) for t in x) or any(isinstance(t, Fraction) for t in y):
        # clear denominators so the inner loop runs on ints
        dx, dy = common_denominator(x), common_denominator(y)
        xi_ = [int(t * dx) for t in x]
        yi_ = [int(t * dy) for t in y]
        return Fraction(_int_bilinear(gram, xi_, yi_), dx * dy)
    return _int_bilinear(gram, x, y)


def _int_bilinear(gram, x, y):
    total = 0
    for i, xi in enumerate(x):
        if xi:
            row = gram[i]
            s = 0
            for j, yj in enumerate(y):
                if yj:
                    s += row[j] * yj
            total += xi * s
    return total


def lll_reduce(gram: Sequence[Sequence[int]], delta: Fraction = Fraction(3, 4)) -> tuple[IntMatrix, IntMatrix]:
    """LLL reduction of a positive definite integral Gram matrix.

    Works on the Gram matrix directly with exact rational Gram-Schmidt data.
    Returns ``(t, g)`` where the rows of ``t`` express the reduced basis in
    the old one and ``g = t * gram * t^T``.
    """
    n = len(gram)
    g = copy_matrix(gram)
    t = identity(n)
    if n <= 1:
        return t, g

    def gso():
        mu = [[Fraction(0)] * n for _ in range(n)]
        b = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                s = Fraction(g[i][j])
                for k in range(j):
                    s -= mu[j][k] * mu[i][k] * b[k]
                mu[i][j] = s / b[j]
            s = Fraction(g[i][i])
            for k in range(i):
                s -= mu[i][k] * mu[i][k] * b[k]
            b[i] = s
        return mu, b

    def size_reduce(k: int, j: int, q: int) -> None:
        # b_k -= q b_j
        t[k] = [x - q * y for x, y in zip(t[k], t[j])]
        gk = g[k]
        gj = g[j]
        gkk = gk[k] - 2 * q * gk[j] + q * q * gj[j]
        for i in range(n):
            g[k][i] = g[k][i] - q * g[j][i]
        for i in range(n):
            g[i][k] = g[k][i]
        g[k][k] = gkk

    def swap(k: int) -> None:
        t[k], t[k - 1] = t[k - 1], t[k]
        g[k], g[k - 1] = g[k - 1], g[k]
        for row in g:
            row[k], row[k - 1] = row[k - 1], row[k]

    mu, b = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            m = mu[k][j]
            if abs(m) > Fraction(1, 2):
                q = round(m)
                size_reduce(k, j, q)
                for i in range(j):
                    mu[k][i] -= q * mu[j][i]
                mu[k][j] -= q
        if b[k] >= (delta - mu[k][k - 1] ** 2) * b[k - 1]:
            k += 1
        else:
            swap(k)
            mu, b = gso()
            k = max(k - 1, 1)
    return t, g
