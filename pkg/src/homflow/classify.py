"""Quasi-unipotent / partially hyperbolic classification of flow generators.

The tag is decided exactly from the characteristic polynomial of ``ad X``
by counting roots in the open right and left half-planes and on the
imaginary axis.  Subspace bases for the ``p0 / p+ / p-`` splitting are
floating point and only used for diagnostics.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from . import rational as rq
from .lie import (
    LieAlgebra,
    ad_matrix,
    bracket,
    center,
    centralizer,
    is_semisimple,
)

Poly = rq.Poly

TOLERANCE_LADDER = (1e-9, 1e-8, 1e-7, 1e-6, 1e-5)


class ClassificationError(ValueError):
    """A precondition of an operation in this module was violated."""


class CertificationError(RuntimeError):
    """An exact certificate failed; should not happen for valid input."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


# --------------------------------------------------------------------------
# half-plane root counting

def _imaginary_axis_parts(p: Poly) -> tuple[Poly, Poly]:
    """Real and imaginary parts of ``p(i mu)`` as real polynomials in ``mu``."""
    re = [Fraction(0)] * len(p)
    im = [Fraction(0)] * len(p)
    for k, c in enumerate(p):
        r = k % 4
        if r == 0:
            re[k] = c
        elif r == 1:
            im[k] = c
        elif r == 2:
            re[k] = -c
        else:
            im[k] = -c
    return rq.ptrim(re), rq.ptrim(im)


def _reflect(p: Poly) -> Poly:
    """``p(-x)``."""
    return [c if k % 2 == 0 else -c for k, c in enumerate(p)]


def halfplane_root_counts(p: Sequence, with_certificate: bool = False):
    """Roots of ``p`` with zero, positive and negative real part.

    Counted with multiplicity; the three counts add up to ``deg p``.

    Roots on the imaginary axis are the real roots ``mu`` of
    ``gcd(Re p(i mu), Im p(i mu))``, counted by Sturm chains on a squarefree
    decomposition.  The factor ``D = gcd(p(x), p(-x))`` carries those roots
    plus pairs ``{x, -x}`` that split evenly between the half-planes; the
    cofactor ``p / D`` has no imaginary roots and its split is read off a
    Cauchy index.
    """
    p = rq.ptrim([rq.to_fraction(c) for c in p])
    if not p:
        raise ValueError("zero polynomial has no root counts")
    n = len(p) - 1
    cert: dict = {"poly": [rq.fraction_str(c) for c in p]}
    if n == 0:
        return ((0, 0, 0), cert) if with_certificate else (0, 0, 0)

    re, im = _imaginary_axis_parts(p)
    g = rq.pgcd(re, im)
    sqf = rq.squarefree_decomposition(g)
    n0 = sum(mult * rq.count_real_roots(f) for f, mult in sqf)

    d = rq.pgcd(p, _reflect(p))
    q, rem = rq.pdivmod(p, d)
    assert not rem
    pairs = rq.pdeg(d) - n0
    if pairs % 2:
        raise CertificationError("symmetric factor has odd off-axis degree", {"D": d})
    m = rq.pdeg(q)
    if m == 0:
        diff = 0
        index = 0
    else:
        a, b = _imaginary_axis_parts(q)
        if m % 2 == 0:
            index = rq.cauchy_index(b, a)
            diff = -index  # n_minus - n_plus
        else:
            index = rq.cauchy_index(a, b)
            diff = index
    if (m + diff) % 2:
        raise CertificationError("inconsistent Cauchy index", {"q": q, "index": index})
    n_minus_q = (m + diff) // 2
    n_plus_q = m - n_minus_q
    counts = (n0, n_plus_q + pairs // 2, n_minus_q + pairs // 2)
    if sum(counts) != n:
        raise CertificationError("root counts do not add up to the degree", {"counts": counts})
    if not with_certificate:
        return counts
    cert.update(
        {
            "imaginary_axis_gcd": [rq.fraction_str(c) for c in g],
            "imaginary_axis_squarefree": [
                {"factor": [rq.fraction_str(c) for c in f], "multiplicity": k, "real_roots": rq.count_real_roots(f)}
                for f, k in sqf
            ],
            "symmetric_factor": [rq.fraction_str(c) for c in d],
            "cofactor": [rq.fraction_str(c) for c in q],
            "cauchy_index": index,
            "counts": list(counts),
        }
    )
    return counts, cert


# --------------------------------------------------------------------------
# classification

class FlowTag(str, enum.Enum):
    QUASI_UNIPOTENT = "QuasiUnipotent"
    PARTIALLY_HYPERBOLIC = "PartiallyHyperbolic"


@dataclass
class FlowClass:
    tag: FlowTag
    counts: tuple[int, int, int]
    certificate: dict

    def to_dict(self) -> dict:
        return {"tag": self.tag.value, "counts": list(self.counts), "certificate": self.certificate}


def classify_flow(alg: LieAlgebra, x: Sequence) -> FlowClass:
    """Decide whether ``ad X`` has spectrum on the imaginary axis only."""
    x = alg.element(x)
    chi = rq.charpoly(ad_matrix(alg, x))
    counts, cert = halfplane_root_counts(chi, with_certificate=True)
    tag = FlowTag.QUASI_UNIPOTENT if counts[1] == counts[2] == 0 else FlowTag.PARTIALLY_HYPERBOLIC
    cert["charpoly"] = rq.poly_str(chi, "t")
    return FlowClass(tag, counts, cert)


# --------------------------------------------------------------------------
# numeric splitting

def structure_tensor(alg: LieAlgebra) -> np.ndarray:
    """``c[k, i, j]`` = coefficient of ``e_k`` in ``[e_i, e_j]``."""
    c = np.zeros((alg.dim, alg.dim, alg.dim))
    for (i, j), v in alg.brackets.items():
        vv = np.array([float(t) for t in v])
        c[:, i, j] = vv
        c[:, j, i] = -vv
    return c


class SplittingError(RuntimeError):
    pass


@dataclass
class SpectralSplitting:
    p_zero: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    counts: tuple[int, int, int]
    certificate: dict
    tolerance: float
    invariance_residuals: dict = field(default_factory=dict)
    grading_residuals: dict = field(default_factory=dict)
    span_sigma_min: float = 0.0

    def to_dict(self) -> dict:
        return {
            "counts": list(self.counts),
            "tolerance": self.tolerance,
            "p_zero": self.p_zero.T.tolist(),
            "p_plus": self.p_plus.T.tolist(),
            "p_minus": self.p_minus.T.tolist(),
            "invariance_residuals": self.invariance_residuals,
            "grading_residuals": self.grading_residuals,
            "span_sigma_min": self.span_sigma_min,
            "certificate": self.certificate,
        }


def _schur_block(m: np.ndarray, select) -> tuple[np.ndarray, int]:
    _, z, sdim = scipy.linalg.schur(m, output="real", sort=select)
    return z[:, :sdim], sdim


def _off_residual(vectors: np.ndarray, q: np.ndarray) -> float:
    if vectors.size == 0:
        return 0.0
    if q.shape[1] == 0:
        return float(np.abs(vectors).max())
    return float(np.abs(vectors - q @ (q.T @ vectors)).max())


def spectral_splitting(alg: LieAlgebra, x: Sequence) -> SpectralSplitting:
    """Bases of ``p0, p+, p-`` for ``ad X``, sized to match the exact counts."""
    x = alg.element(x)
    ad = ad_matrix(alg, x)
    counts, cert = halfplane_root_counts(rq.charpoly(ad), with_certificate=True)
    m = np.array([[float(v) for v in row] for row in ad])
    n0, npl, nmi = counts

    chosen = None
    for tol in TOLERANCE_LADDER:
        q0, s0 = _schur_block(m, lambda re, im, t=tol: abs(re) <= t)
        qp, sp = _schur_block(m, lambda re, im, t=tol: re > t)
        qm, sm = _schur_block(m, lambda re, im, t=tol: re < -t)
        if (s0, sp, sm) == (n0, npl, nmi):
            chosen = (tol, q0, qp, qm)
            break
    if chosen is None:
        raise SplittingError(
            f"numeric subspaces do not match exact counts {counts} at tolerance {TOLERANCE_LADDER[-1]:g}"
        )
    tol, q0, qp, qm = chosen

    inv = {name: _off_residual(m @ q, q) for name, q in (("p_zero", q0), ("p_plus", qp), ("p_minus", qm))}
    c = structure_tensor(alg)

    def brackets(qa: np.ndarray, qb: np.ndarray) -> np.ndarray:
        if qa.shape[1] == 0 or qb.shape[1] == 0:
            return np.zeros((alg.dim, 0))
        out = np.einsum("kij,ia,jb->kab", c, qa, qb)
        return out.reshape(alg.dim, -1)

    grading = {
        "[p0,p0] in p0": _off_residual(brackets(q0, q0), q0),
        "[p0,p+] in p+": _off_residual(brackets(q0, qp), qp),
        "[p0,p-] in p-": _off_residual(brackets(q0, qm), qm),
        "[p+,p+] in p+": _off_residual(brackets(qp, qp), qp),
        "[p-,p-] in p-": _off_residual(brackets(qm, qm), qm),
    }
    sig = np.linalg.svd(np.hstack([q0, qp, qm]), compute_uv=False)
    return SpectralSplitting(
        p_zero=q0,
        p_plus=qp,
        p_minus=qm,
        counts=counts,
        certificate=cert,
        tolerance=tol,
        invariance_residuals=inv,
        grading_residuals=grading,
        span_sigma_min=float(sig.min()) if sig.size else 0.0,
    )


# --------------------------------------------------------------------------
# Jordan-Chevalley

@dataclass
class JordanPair:
    s: tuple[Fraction, ...]
    n: tuple[Fraction, ...]
    certificate: dict

    def to_dict(self, alg: LieAlgebra | None = None) -> dict:
        out = {
            "s": [rq.fraction_str(v) for v in self.s],
            "n": [rq.fraction_str(v) for v in self.n],
            "certificate": self.certificate,
        }
        if alg is not None:
            out["s_label"] = alg.label(self.s)
            out["n_label"] = alg.label(self.n)
        return out


def matrix_jordan_decomposition(a: rq.Matrix, max_iter: int = 64) -> tuple[rq.Matrix, rq.Matrix]:
    """``a = S + N`` with ``S`` semisimple, ``N`` nilpotent, commuting; exact.

    Newton iteration ``S <- S - f(S) f'(S)^{-1}`` with ``f`` the squarefree
    part of the characteristic polynomial.
    """
    f = rq.squarefree_part(rq.charpoly(a))
    df = rq.pderiv(f)
    s = [row[:] for row in a]
    for _ in range(max_iter):
        fs = rq.poly_at_matrix(f, s)
        if rq.is_zero_matrix(fs):
            break
        s = rq.matadd(s, rq.matmul(fs, rq.inverse(rq.poly_at_matrix(df, s))), -1)
    else:
        raise CertificationError("Newton iteration for the semisimple part did not terminate")
    return s, rq.matadd(a, s, -1)


def _is_nilpotent_matrix(a: rq.Matrix) -> bool:
    return rq.is_zero_matrix(rq.matpow(a, len(a))) if a else True


def _identity_check(lhs: Sequence[Fraction], rhs: Sequence[Fraction]) -> dict:
    residual = [u - v for u, v in zip(lhs, rhs)]
    return {"holds": not any(residual), "residual": [rq.fraction_str(v) for v in residual]}


def _nilpotency_check(a: rq.Matrix) -> dict:
    power = rq.identity(len(a))
    for k in range(1, len(a) + 1):
        power = rq.matmul(power, a)
        if rq.is_zero_matrix(power):
            return {"holds": True, "nilpotency_index": k}
    return {"holds": not a, "nilpotency_index": None}


def _squarefree_check(a: rq.Matrix) -> dict:
    f = rq.squarefree_part(rq.charpoly(a))
    return {
        "holds": rq.is_zero_matrix(rq.poly_at_matrix(f, a)),
        "annihilating_squarefree_poly": rq.poly_str(f, "t"),
    }


def jordan_chevalley(alg: LieAlgebra, x: Sequence) -> JordanPair:
    """Abstract Jordan decomposition ``X = s + n`` in a centerless algebra."""
    x = alg.element(x)
    z = center(alg)
    if z.dim:
        raise ClassificationError(
            f"algebra has a {z.dim}-dimensional center; the decomposition of X is not determined by ad X"
        )
    a = ad_matrix(alg, x)
    s_mat, _ = matrix_jordan_decomposition(a)

    # solve ad(s) = S for s
    ads = [ad_matrix(alg, alg.basis_element(i)) for i in range(alg.dim)]
    n = alg.dim
    system = [[ads[k][r][c] for k in range(n)] for r in range(n) for c in range(n)]
    rhs = [s_mat[r][c] for r in range(n) for c in range(n)]
    try:
        s, _ = rq.solve(system, rhs)
    except rq.InconsistentSystem as exc:
        raise CertificationError(
            "semisimple part of ad X is not an inner derivation",
            {"residual": [rq.fraction_str(v) for v in exc.residual]},
        ) from exc
    s = tuple(s)
    nil = tuple(xi - si for xi, si in zip(x, s))
    checks = {
        "sum": _identity_check([si + ni for si, ni in zip(s, nil)], x),
        "commute": _identity_check(bracket(alg, s, nil), alg.zero()),
        "ad_n_nilpotent": _nilpotency_check(ad_matrix(alg, nil)),
        "ad_s_minpoly_squarefree": _squarefree_check(ad_matrix(alg, s)),
    }
    if not all(c["holds"] for c in checks.values()):
        raise CertificationError("Jordan-Chevalley certificate failed", checks)
    return JordanPair(s, nil, {"exact": True, **checks})


@dataclass
class GroupJordan:
    c_generator: tuple[Fraction, ...]
    u_generator: tuple[Fraction, ...]
    certificate: dict


def group_jordan(alg: LieAlgebra, x: Sequence) -> GroupJordan:
    """Generators of the commuting semisimple and unipotent factors of ``exp(tX)``."""
    pair = jordan_chevalley(alg, x)
    return GroupJordan(pair.s, pair.n, pair.certificate)


# --------------------------------------------------------------------------
# sl2 triples

@dataclass
class Sl2Triple:
    a: tuple[Fraction, ...]
    n_plus: tuple[Fraction, ...]
    n_minus: tuple[Fraction, ...]
    certificate: dict

    def to_dict(self, alg: LieAlgebra | None = None) -> dict:
        out = {
            "a": [rq.fraction_str(v) for v in self.a],
            "n_plus": [rq.fraction_str(v) for v in self.n_plus],
            "n_minus": [rq.fraction_str(v) for v in self.n_minus],
            "certificate": self.certificate,
        }
        if alg is not None:
            out["labels"] = {k: alg.label(getattr(self, k)) for k in ("a", "n_plus", "n_minus")}
        return out


class Sl2EmbedError(ClassificationError):
    def __init__(self, message: str, residual: list | None = None):
        super().__init__(message)
        self.residual = residual


def _combine(basis: Sequence[Sequence[Fraction]], coeffs: Sequence[Fraction], dim: int) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * dim
    for c, b in zip(coeffs, basis):
        if c:
            for k in range(dim):
                out[k] += c * b[k]
    return tuple(out)


def sl2_embed(alg: LieAlgebra, n_plus: Sequence, s: Sequence | None = None) -> Sl2Triple:
    """Complete a nilpotent ``n+`` to a triple ``(a, n+, n-)``.

    Relations: ``[a, n+] = n+``, ``[a, n-] = -n-``, ``[n+, n-] = a``.  When
    ``s`` is given, every unknown is searched inside the centralizer of
    ``s`` so the triple commutes with it.
    """
    n_plus = alg.element(n_plus)
    ok, _ = is_semisimple(alg)
    if not ok:
        raise Sl2EmbedError("algebra is not semisimple (Killing form degenerate)")
    if not _is_nilpotent_matrix(ad_matrix(alg, n_plus)):
        raise Sl2EmbedError("n_plus is not nilpotent: ad(n_plus) has a nonzero eigenvalue")
    dim = alg.dim
    if s is not None:
        s = alg.element(s)
        if any(bracket(alg, s, n_plus)):
            raise Sl2EmbedError("s does not commute with n_plus")
        if any(jordan_chevalley(alg, s).n):
            raise Sl2EmbedError("s is not semisimple")
        space = [list(b) for b in centralizer(alg, s).basis]
    else:
        space = [list(alg.basis_element(i)) for i in range(dim)]

    if not any(n_plus):
        raise Sl2EmbedError("n_plus is zero")

    # stage 1: a = [n+, y] with [[n+, y], n+] = n+
    cols = [bracket(alg, bracket(alg, n_plus, b), n_plus) for b in space]
    system = rq.transpose([list(c) for c in cols])
    try:
        ycoef, _ = rq.solve(system, list(n_plus))
    except rq.InconsistentSystem as exc:
        raise Sl2EmbedError("stage 1 system for a is inconsistent", exc.residual) from exc
    y = _combine(space, ycoef, dim)
    a = bracket(alg, n_plus, y)

    # stage 2: [a, n-] + n- = 0 and [n+, n-] = a, jointly linear in n-
    cols = [
        tuple(u + v for u, v in zip(bracket(alg, a, b), b)) + bracket(alg, n_plus, b)
        for b in space
    ]
    system = rq.transpose([list(c) for c in cols])
    rhs = [Fraction(0)] * dim + list(a)
    try:
        mcoef, _ = rq.solve(system, rhs)
    except rq.InconsistentSystem as exc:
        raise Sl2EmbedError("stage 2 system for n_minus is inconsistent", exc.residual) from exc
    n_minus = _combine(space, mcoef, dim)

    checks = {
        "[a,n+]=n+": _identity_check(bracket(alg, a, n_plus), n_plus),
        "[a,n-]=-n-": _identity_check(bracket(alg, a, n_minus), [-v for v in n_minus]),
        "[n+,n-]=a": _identity_check(bracket(alg, n_plus, n_minus), a),
    }
    if s is not None:
        for name, v in (("a", a), ("n+", n_plus), ("n-", n_minus)):
            checks[f"[{name},s]=0"] = _identity_check(bracket(alg, v, s), alg.zero())
    if not all(c["holds"] for c in checks.values()):
        raise CertificationError("sl2 triple certificate failed", checks)
    return Sl2Triple(a, n_plus, n_minus, {"exact": True, **checks})
