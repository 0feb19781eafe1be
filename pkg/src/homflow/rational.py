"""Exact linear algebra and univariate polynomials over the rationals.

Matrices are lists of rows of :class:`fractions.Fraction`; polynomials are
coefficient lists ordered from the constant term upward.  Nothing here
touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Matrix = list[list[Fraction]]
Poly = list[Fraction]


def to_fraction(x) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings.  Floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# matrices

def zeros(n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    return [[Fraction(0)] * m for _ in range(n)]


def identity(n: int) -> Matrix:
    out = zeros(n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[to_fraction(x) for x in row] for row in rows]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def matadd(a: Matrix, b: Matrix, scale: Fraction | int = 1) -> Matrix:
    return [[x + scale * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matscale(a: Matrix, c) -> Matrix:
    return [[c * x for x in row] for row in a]


def is_zero_matrix(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def trace(a: Matrix) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def matpow(a: Matrix, k: int) -> Matrix:
    result = identity(len(a))
    base = a
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns.  Input is not modified."""
    m = [row[:] for row in a]
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def kernel(a: Matrix, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right null space, one vector per free column.

    Each vector has a 1 in its free column and zeros in the other free
    columns, so the basis is canonical for a given matrix.
    """
    if not a:
        n = ncols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    r, pivots = rref(a)
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(r, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


class InconsistentSystem(ValueError):
    """Raised by :func:`solve` when ``a x = b`` has no solution."""

    def __init__(self, message: str, residual: list[Fraction]):
        super().__init__(message)
        self.residual = residual


def solve(a: Matrix, b: Sequence[Fraction]) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Solve ``a x = b`` exactly.

    Returns the particular solution with every free variable set to zero
    and a kernel basis.  Raises :class:`InconsistentSystem` otherwise.
    """
    n = len(a[0]) if a else 0
    aug = [list(row) + [to_fraction(bi)] for row, bi in zip(a, b)]
    r, pivots = rref(aug)
    if n in pivots:
        # the residual of the least-change attempt is the offending row
        bad = pivots.index(n)
        raise InconsistentSystem("linear system is inconsistent", r[bad])
    x = [Fraction(0)] * n
    for row, pc in zip(r, pivots):
        x[pc] = row[n]
    return x, kernel(a, n)


def det(a: Matrix) -> Fraction:
    m = [row[:] for row in a]
    n = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        out *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * out


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in r]


def row_space_basis(vectors: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Canonical (reduced echelon) basis of the span of ``vectors``."""
    if not vectors:
        return []
    r, pivots = rref([list(v) for v in vectors])
    return [r[i] for i in range(len(pivots))]


def in_span(v: Sequence[Fraction], basis: Sequence[Sequence[Fraction]]) -> bool:
    if not any(x != 0 for x in v):
        return True
    if not basis:
        return False
    return rank([list(b) for b in basis] + [list(v)]) == rank([list(b) for b in basis])


def charpoly(a: Matrix) -> Poly:
    """Characteristic polynomial ``det(xI - a)`` by Faddeev-LeVerrier."""
    n = len(a)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    m = zeros(n)
    for k in range(1, n + 1):
        m = matmul(a, m)
        for i in range(n):
            m[i][i] += coeffs[n - k + 1]
        am = matmul(a, m)
        coeffs[n - k] = -trace(am) / k
    return coeffs


def poly_at_matrix(p: Poly, a: Matrix) -> Matrix:
    """Horner evaluation of ``p(a)``."""
    n = len(a)
    out = zeros(n)
    for c in reversed(p):
        out = matmul(out, a)
        for i in range(n):
            out[i][i] += c
    return out


# --------------------------------------------------------------------------
# polynomials

def ptrim(p: Sequence[Fraction]) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def pdeg(p: Poly) -> int:
    p = ptrim(p)
    return len(p) - 1 if p else -1


def padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return ptrim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def psub(p: Poly, q: Poly) -> Poly:
    return padd(p, [-c for c in q])


def pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return ptrim(out)


def pdivmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    q = ptrim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = ptrim(p)
    out = [Fraction(0)] * max(len(r) - len(q) + 1, 0)
    lead = q[-1]
    while len(r) >= len(q):
        c = r[-1] / lead
        shift = len(r) - len(q)
        out[shift] = c
        for i, b in enumerate(q):
            r[shift + i] -= c * b
        r = ptrim(r[:-1]) if r[-1] == 0 else ptrim(r)
    return ptrim(out), r


def pmonic(p: Poly) -> Poly:
    p = ptrim(p)
    return [c / p[-1] for c in p] if p else []


def pgcd(p: Poly, q: Poly) -> Poly:
    a, b = ptrim(p), ptrim(q)
    while b:
        a, b = b, pdivmod(a, b)[1]
    return pmonic(a)


def pderiv(p: Poly) -> Poly:
    return ptrim([i * c for i, c in enumerate(p)][1:])


def peval(p: Poly, x):
    out = 0
    for c in reversed(p):
        out = out * x + c
    return out


def squarefree_part(p: Poly) -> Poly:
    p = ptrim(p)
    if pdeg(p) <= 0:
        return pmonic(p)
    return pmonic(pdivmod(p, pgcd(p, pderiv(p)))[0])


def squarefree_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: ``p = c * prod f_i**i`` with each ``f_i`` squarefree."""
    p = pmonic(p)
    if pdeg(p) <= 0:
        return []
    out = []
    dp = pderiv(p)
    a = pgcd(p, dp)
    b = pdivmod(p, a)[0]
    c = pdivmod(dp, a)[0]
    d = psub(c, pderiv(b))
    i = 1
    while pdeg(b) > 0:
        a = pgcd(b, d)
        b = pdivmod(b, a)[0]
        c = pdivmod(d, a)[0]
        d = psub(c, pderiv(b))
        if pdeg(a) > 0:
            out.append((a, i))
        i += 1
    return out


def sturm_sequence(p: Poly, q: Poly | None = None) -> list[Poly]:
    """Generalized Sturm sequence ``p, q, -rem(p, q), ...``."""
    seq = [ptrim(p), ptrim(pderiv(p) if q is None else q)]
    while seq[-1]:
        r = pdivmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_changes(signs: Iterable[int]) -> int:
    nz = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def _sign_at_infinity(p: Poly, positive: bool) -> int:
    lead = p[-1]
    s = 1 if lead > 0 else -1
    if not positive and (len(p) - 1) % 2:
        s = -s
    return s


def variations_at_infinity(seq: list[Poly]) -> tuple[int, int]:
    """Sign variations of a polynomial sequence at ``-oo`` and ``+oo``."""
    lo = _sign_changes(_sign_at_infinity(p, False) for p in seq)
    hi = _sign_changes(_sign_at_infinity(p, True) for p in seq)
    return lo, hi


def count_real_roots(p: Poly) -> int:
    """Number of distinct real roots of ``p`` (Sturm's theorem)."""
    p = ptrim(p)
    if pdeg(p) <= 0:
        return 0
    lo, hi = variations_at_infinity(sturm_sequence(p))
    return lo - hi


def cauchy_index(num: Poly, den: Poly) -> int:
    """Cauchy index of ``num/den`` over the whole real line."""
    lo, hi = variations_at_infinity(sturm_sequence(den, num))
    return lo - hi


def poly_str(p: Poly, var: str = "x") -> str:
    p = ptrim(p)
    if not p:
        return "0"
    terms = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and abs(c) == 1:
            coef = "-" if c < 0 else ""
        else:
            coef = fraction_str(c) + ("*" if mono else "")
        terms.append(coef + mono)
    return " + ".join(terms).replace("+ -", "- ")
