"""Exact integer linear algebra: Smith normal form, kernels, Hermite bases.

Everything operates on Python ints (arbitrary precision) represented as lists
of lists; matrices are small (phase-space dimensions), so clarity wins over
asymptotics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(mat) -> list[list[int]]:
    return [list(col) for col in zip(*mat)]


def matmul(a, b) -> list[list[int]]:
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        for k in range(inner):
            v = ai[k]
            if v:
                bk = b[k]
                row = out[i]
                for j in range(cols):
                    row[j] += v * bk[j]
    return out


def matvec(a, x) -> list[int]:
    return [sum(v * w for v, w in zip(row, x)) for row in a]


def det(mat) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(mat)
    if n == 0:
        return 1
    a = [list(map(int, row)) for row in mat]
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
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inverse_unimodular(mat) -> list[list[int]]:
    """Exact inverse of an integer matrix with determinant +-1."""
    n = len(mat)
    d = det(mat)
    if d not in (1, -1):
        raise ValueError(f"matrix is not unimodular (det = {d})")
    aug = [[Fraction(mat[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    out = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    assert all(v.denominator == 1 for row in out for v in row)
    return [[int(v) for v in row] for row in out]


def smith_normal_form(mat) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Decompose an integer matrix as U @ mat @ V = S.

    U (m x m) and V (n x n) are unimodular; S is diagonal with non-negative
    entries d_1 | d_2 | ... (the elementary divisors).  Returns (U, S, V).
    """
    a = [list(map(int, row)) for row in mat]
    m = len(a)
    n = len(a[0]) if m else 0
    u = identity(m)
    v = identity(n)

    def swap_rows(i1, i2):
        a[i1], a[i2] = a[i2], a[i1]
        u[i1], u[i2] = u[i2], u[i1]

    def swap_cols(j1, j2):
        for row in a:
            row[j1], row[j2] = row[j2], row[j1]
        for row in v:
            row[j1], row[j2] = row[j2], row[j1]

    def add_row(src, dst, q):
        # row dst += q * row src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        # move the smallest nonzero entry of the trailing block to (t, t)
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = abs(a[i][j])
                if x and (best is None or x < best):
                    best = x
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])

        while True:
            restart = False
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(t, i, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        swap_rows(t, i)
                        restart = True
                        break
            if restart:
                continue
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(t, j, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        swap_cols(t, j)
                        restart = True
                        break
            if restart:
                continue
            # pivot must divide every entry of the trailing block
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if a[i][j] % a[t][t]:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(offender, t, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return u, a, v


def elementary_divisors(mat) -> list[int]:
    _, s, _ = smith_normal_form(mat)
    out = []
    for i in range(min(len(s), len(s[0]) if s else 0)):
        if s[i][i]:
            out.append(s[i][i])
    return out


def integer_kernel(mat) -> list[list[int]]:
    """Basis vectors of {x in Z^n : mat @ x = 0}.

    The result is automatically saturated (it is the intersection of Z^n with
    a rational subspace).
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    if m == 0:
        return [list(col) for col in identity(n)]
    _, s, v = smith_normal_form(mat)
    rank = sum(1 for i in range(min(m, n)) if s[i][i] != 0)
    cols = transpose(v)
    return [cols[j] for j in range(rank, n)]


def row_lattice_basis(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of the lattice generated by integer row vectors (row echelon form)."""
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return []
    n = len(a[0])
    m = len(a)
    r = 0
    for c in range(n):
        while True:
            nz = [i for i in range(r, m) if a[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[i0] = a[i0], a[r]
            done = True
            for i in range(r + 1, m):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if r < m and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
            r += 1
            if r == m:
                break
    return [row for row in a[:r]]


def rational_row_clear(row) -> list[int]:
    """Scale a rational row vector to a primitive integer row."""
    fr = [Fraction(x) for x in row]
    if all(x == 0 for x in fr):
        return [0] * len(fr)
    from math import gcd, lcm

    denom = 1
    for x in fr:
        denom = lcm(denom, x.denominator)
    ints = [int(x * denom) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return [x // g for x in ints] if g > 1 else ints
