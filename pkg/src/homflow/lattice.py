"""Integer lattices: Hermite normal form, integer kernels, quotient groups."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from . import rational as rq

IntMatrix = list[list[int]]


def hermite_rows(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Zero rows are dropped.  Pivots are positive and entries above each pivot
    lie in ``[0, pivot)``, which makes the basis canonical for the lattice.
    """
    m = [list(map(int, r)) for r in rows]
    if not m:
        return []
    ncols = len(m[0])
    out: IntMatrix = []
    r = 0
    for c in range(ncols):
        # gcd-reduce column c among rows r..end
        while True:
            nz = [i for i in range(r, len(m)) if m[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(m[i][c]))
            m[r], m[p] = m[p], m[r]
            done = True
            for i in range(r + 1, len(m)):
                if m[i][c]:
                    q = m[i][c] // m[r][c]
                    m[i] = [x - q * y for x, y in zip(m[i], m[r])]
                    if m[i][c]:
                        done = False
            if done:
                break
        if r < len(m) and m[r][c] != 0:
            if m[r][c] < 0:
                m[r] = [-x for x in m[r]]
            for i in range(r):
                q = m[i][c] // m[r][c]
                if q:
                    m[i] = [x - q * y for x, y in zip(m[i], m[r])]
            r += 1
    out = [row for row in m[:r] if any(row)]
    return out


def integer_kernel(a: Sequence[Sequence[int]]) -> IntMatrix:
    """Hermite basis of ``{k in Z^n : a k = 0}``."""
    a = [list(map(int, r)) for r in a]
    n = len(a[0]) if a else 0
    if not a:
        return hermite_rows([[int(i == j) for j in range(n)] for i in range(n)])
    # column operations on a, tracked on an identity: a @ u stays equivalent
    m = [row[:] for row in a]
    u = [[int(i == j) for j in range(n)] for i in range(n)]  # columns of u are the transform

    def col_op(dst: int, src: int, q: int) -> None:
        for row in m:
            row[dst] -= q * row[src]
        for row in u:
            row[dst] -= q * row[src]

    def col_swap(i: int, j: int) -> None:
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in u:
            row[i], row[j] = row[j], row[i]

    c = 0
    for r in range(len(m)):
        if c >= n:
            break
        while True:
            nz = [j for j in range(c, n) if m[r][j] != 0]
            if not nz:
                break
            p = min(nz, key=lambda j: abs(m[r][j]))
            col_swap(c, p)
            for j in range(c + 1, n):
                if m[r][j]:
                    col_op(j, c, m[r][j] // m[r][c])
            if all(m[r][j] == 0 for j in range(c + 1, n)):
                break
        if m[r][c] != 0:
            c += 1
    basis = [[u[i][j] for i in range(n)] for j in range(c, n)]
    return hermite_rows(basis)


def smith_invariants(a: Sequence[Sequence[int]]) -> list[int]:
    """Invariant factors of a square integer matrix via determinantal divisors."""
    from itertools import combinations

    n = len(a)
    out = []
    prev = 1
    for k in range(1, n + 1):
        g = 0
        for rows in combinations(range(n), k):
            for cols in combinations(range(n), k):
                minor = rq.det([[Fraction(a[i][j]) for j in cols] for i in rows])
                g = math.gcd(g, int(minor))
        if g == 0:
            out.append(0)
            prev = 0
            continue
        out.append(g // prev if prev else 0)
        prev = g
    return out


def coset_representatives(a: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Representatives of ``Z^n / a Z^n`` for nonsingular square ``a``.

    Uses the Hermite form of the column lattice: vectors with
    ``0 <= m_i < h_ii`` form a transversal.
    """
    cols = [list(c) for c in zip(*a)]
    h = hermite_rows(cols)  # rows of h span the column lattice, upper triangular
    n = len(a)
    if len(h) != n:
        raise ValueError("matrix is singular; quotient is infinite")
    diag = [h[i][i] for i in range(n)]
    reps: list[tuple[int, ...]] = [()]
    for d in diag:
        reps = [r + (j,) for r in reps for j in range(d)]
    return reps


def periodic_points(a: Sequence[Sequence[int]], period: int) -> list[tuple[Fraction, ...]]:
    """All ``x in [0,1)^d`` with ``A^period x = x (mod Z^d)``, exact.

    These are ``(A^p - I)^{-1} m`` for ``m`` running over a transversal of
    ``Z^d / (A^p - I) Z^d``.
    """
    d = len(a)
    ap = rq.matpow(rq.as_matrix(a), period)
    m = [[int(ap[i][j]) - int(i == j) for j in range(d)] for i in range(d)]
    inv = rq.inverse(rq.as_matrix(m))
    pts = set()
    for rep in coset_representatives(m):
        x = rq.matvec(inv, [Fraction(v) for v in rep])
        pts.add(tuple(xi - math.floor(xi) for xi in x))
    return sorted(pts)


def minimal_period(a: Sequence[Sequence[int]], x: Sequence[Fraction], limit: int = 10_000) -> int:
    """Exact minimal period of a rational point under ``x -> A x mod 1``."""
    am = rq.as_matrix(a)
    start = tuple(xi - math.floor(xi) for xi in x)
    y = start
    for p in range(1, limit + 1):
        y = tuple(v - math.floor(v) for v in rq.matvec(am, list(y)))
        if y == start:
            return p
    raise ValueError("period exceeds limit")


def is_unimodular_surjection(p: Sequence[Sequence[int]]) -> bool:
    """True iff ``P Z^n = Z^m`` for an integer ``m x n`` matrix ``P``."""
    m = len(p)
    cols = [list(c) for c in zip(*p)]
    h = hermite_rows(cols)
    return len(h) == m and all(h[i][i] == 1 for i in range(m))
