"""Finite-dimensional real Lie algebras with exact rational structure constants."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import rational as rq

Vector = tuple[Fraction, ...]


class LieAlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants stored only for ``i < j``; ``[e_j, e_i]`` follows by sign.

    ``brackets[(i, j)]`` is the coordinate vector of ``[e_i, e_j]``.  Missing
    pairs are zero brackets.
    """

    dim: int
    basis_labels: tuple[str, ...]
    brackets: Mapping[tuple[int, int], Vector] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise LieAlgebraError("dimension must be positive")
        if len(self.basis_labels) != self.dim:
            raise LieAlgebraError("need one label per basis vector")
        clean = {}
        for (i, j), v in self.brackets.items():
            if not (0 <= i < j < self.dim):
                raise LieAlgebraError(f"bracket key ({i}, {j}) must satisfy 0 <= i < j < dim")
            v = tuple(rq.to_fraction(x) for x in v)
            if len(v) != self.dim:
                raise LieAlgebraError(f"bracket ({i}, {j}) has {len(v)} coefficients, expected {self.dim}")
            if any(v):
                clean[(i, j)] = v
        object.__setattr__(self, "brackets", clean)
        object.__setattr__(self, "_tensor", None)

    # structure constants as a dense list: c[i][j] = [e_i, e_j]
    @property
    def table(self) -> list[list[Vector]]:
        if self._tensor is None:
            zero = tuple([Fraction(0)] * self.dim)
            t = [[zero] * self.dim for _ in range(self.dim)]
            for (i, j), v in self.brackets.items():
                t[i][j] = v
                t[j][i] = tuple(-x for x in v)
            object.__setattr__(self, "_tensor", t)
        return self._tensor

    def basis_element(self, i: int) -> Vector:
        return tuple(Fraction(int(k == i)) for k in range(self.dim))

    def element(self, coords: Iterable) -> Vector:
        v = tuple(rq.to_fraction(x) for x in coords)
        if len(v) != self.dim:
            raise LieAlgebraError(f"element has {len(v)} coordinates, algebra has dimension {self.dim}")
        return v

    def zero(self) -> Vector:
        return tuple([Fraction(0)] * self.dim)

    def label(self, v: Sequence[Fraction]) -> str:
        terms = []
        for c, name in zip(v, self.basis_labels):
            if c:
                terms.append(name if c == 1 else f"{rq.fraction_str(c)}*{name}")
        return " + ".join(terms) if terms else "0"


@dataclass
class ValidationReport:
    antisymmetry: list[dict] = field(default_factory=list)
    jacobi: list[dict] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.antisymmetry and not self.jacobi

    def to_dict(self) -> dict:
        return {"valid": self.valid, "antisymmetry": self.antisymmetry, "jacobi": self.jacobi}


@dataclass(frozen=True)
class Subalgebra:
    parent: LieAlgebra
    basis: tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return rq.in_span(v, self.basis)

    def is_closed(self) -> bool:
        return all(
            self.contains(bracket(self.parent, x, y))
            for i, x in enumerate(self.basis)
            for y in self.basis[i + 1 :]
        )


def subspace(alg: LieAlgebra, vectors: Iterable[Sequence[Fraction]]) -> Subalgebra:
    """Wrap the span of ``vectors`` with its canonical echelon basis."""
    basis = rq.row_space_basis([list(v) for v in vectors])
    return Subalgebra(alg, tuple(tuple(b) for b in basis))


# --------------------------------------------------------------------------
# operations

def bracket(alg: LieAlgebra, x: Sequence, y: Sequence) -> Vector:
    if len(x) != alg.dim or len(y) != alg.dim:
        raise LieAlgebraError(f"dimension mismatch: got {len(x)} and {len(y)}, expected {alg.dim}")
    out = [Fraction(0)] * alg.dim
    for (i, j), v in alg.brackets.items():
        c = x[i] * y[j] - x[j] * y[i]
        if c:
            for k, vk in enumerate(v):
                if vk:
                    out[k] += c * vk
    return tuple(out)


def validate(alg: LieAlgebra, raw_pairs: Mapping[tuple[int, int], Sequence] | None = None) -> ValidationReport:
    """Check antisymmetry and the Jacobi identity on basis triples.

    Antisymmetry is structural for a :class:`LieAlgebra`; ``raw_pairs`` lets a
    caller check an unsymmetrized table (both orders supplied) before it is
    folded into an algebra.
    """
    report = ValidationReport()
    if raw_pairs is not None:
        for (i, j), v in sorted(raw_pairs.items()):
            v = [rq.to_fraction(x) for x in v]
            if i == j:
                if any(v):
                    report.antisymmetry.append({"i": i, "j": j, "issue": "[e_i, e_i] != 0"})
                continue
            w = [rq.to_fraction(x) for x in raw_pairs.get((j, i), [0] * len(v))]
            if i < j and any(a + b for a, b in zip(v, w)):
                report.antisymmetry.append({"i": i, "j": j, "issue": "[e_i, e_j] != -[e_j, e_i]"})
    n = alg.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ei, ej, ek = (alg.basis_element(t) for t in (i, j, k))
                total = [
                    a + b + c
                    for a, b, c in zip(
                        bracket(alg, bracket(alg, ei, ej), ek),
                        bracket(alg, bracket(alg, ej, ek), ei),
                        bracket(alg, bracket(alg, ek, ei), ej),
                    )
                ]
                if any(total):
                    report.jacobi.append(
                        {
                            "triple": [i, j, k],
                            "labels": [alg.basis_labels[t] for t in (i, j, k)],
                            "value": [rq.fraction_str(x) for x in total],
                        }
                    )
    return report


def ad_matrix(alg: LieAlgebra, x: Sequence) -> rq.Matrix:
    """Matrix of ``ad x``; column ``j`` holds ``[x, e_j]``."""
    cols = [bracket(alg, x, alg.basis_element(j)) for j in range(alg.dim)]
    return rq.transpose([list(c) for c in cols])


def killing_form(alg: LieAlgebra) -> rq.Matrix:
    ads = [ad_matrix(alg, alg.basis_element(i)) for i in range(alg.dim)]
    n = alg.dim
    k = rq.zeros(n)
    for i in range(n):
        for j in range(i, n):
            # trace(AB) without forming the product
            t = sum((ads[i][r][s] * ads[j][s][r] for r in range(n) for s in range(n)), Fraction(0))
            k[i][j] = k[j][i] = t
    return k


def is_semisimple(alg: LieAlgebra) -> tuple[bool, Fraction]:
    """Cartan criterion; returns the decision with ``det`` of the Killing form."""
    d = rq.det(killing_form(alg))
    return d != 0, d


def _span_of_brackets(alg: LieAlgebra, a: Sequence[Vector], b: Sequence[Vector]) -> Subalgebra:
    return subspace(alg, [bracket(alg, x, y) for x in a for y in b])


def derived_series(alg: LieAlgebra) -> list[Subalgebra]:
    cur = subspace(alg, [alg.basis_element(i) for i in range(alg.dim)])
    series = [cur]
    while cur.dim:
        nxt = _span_of_brackets(alg, cur.basis, cur.basis)
        if nxt.dim == cur.dim:
            break
        series.append(nxt)
        cur = nxt
    return series


def is_solvable(alg: LieAlgebra) -> bool:
    return derived_series(alg)[-1].dim == 0


def lower_central_series(alg: LieAlgebra) -> list[Subalgebra]:
    whole = subspace(alg, [alg.basis_element(i) for i in range(alg.dim)])
    cur = whole
    series = [cur]
    while cur.dim:
        nxt = _span_of_brackets(alg, whole.basis, cur.basis)
        if nxt.dim == cur.dim:
            break
        series.append(nxt)
        cur = nxt
    return series


def is_nilpotent_algebra(alg: LieAlgebra) -> bool:
    return lower_central_series(alg)[-1].dim == 0


def centralizer(alg: LieAlgebra, s: Sequence) -> Subalgebra:
    basis = rq.kernel(ad_matrix(alg, s), alg.dim)
    return subspace(alg, basis)


def center(alg: LieAlgebra) -> Subalgebra:
    # stack ad(e_i) rows: x is central iff [e_i, x] = 0 for every i
    rows = []
    for i in range(alg.dim):
        rows.extend(ad_matrix(alg, alg.basis_element(i)))
    return subspace(alg, rq.kernel(rows, alg.dim))


# --------------------------------------------------------------------------
# construction helpers and I/O

def from_table(labels: Sequence[str], table: Mapping[tuple[str, str], Mapping[str, object]]) -> LieAlgebra:
    """Build from label-keyed brackets, e.g. ``{("x", "y"): {"z": 1}}``."""
    index = {name: i for i, name in enumerate(labels)}
    n = len(labels)
    brackets: dict[tuple[int, int], list[Fraction]] = {}
    for (a, b), coeffs in table.items():
        i, j = index[a], index[b]
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        if i == j:
            raise LieAlgebraError(f"self-bracket of {a} given")
        v = brackets.setdefault((i, j), [Fraction(0)] * n)
        for name, c in coeffs.items():
            v[index[name]] += sign * rq.to_fraction(c)
    return LieAlgebra(n, tuple(labels), {k: tuple(v) for k, v in brackets.items()})


def from_matrices(labels: Sequence[str], mats: Sequence[rq.Matrix]) -> LieAlgebra:
    """Structure constants of a matrix Lie algebra given by a basis of matrices."""
    n = len(mats)
    flat = [[x for row in m for x in row] for m in mats]
    system = rq.transpose(flat)  # columns are basis matrices
    brackets = {}
    for i in range(n):
        for j in range(i + 1, n):
            comm = rq.matadd(rq.matmul(mats[i], mats[j]), rq.matmul(mats[j], mats[i]), -1)
            target = [x for row in comm for x in row]
            coeffs, _ = rq.solve(system, target)
            brackets[(i, j)] = tuple(coeffs)
    return LieAlgebra(n, tuple(labels), brackets)


def direct_sum(a: LieAlgebra, b: LieAlgebra, suffixes: tuple[str, str] = ("1", "2")) -> LieAlgebra:
    n = a.dim + b.dim
    labels = tuple(f"{x}_{suffixes[0]}" for x in a.basis_labels) + tuple(
        f"{x}_{suffixes[1]}" for x in b.basis_labels
    )
    brackets = {}
    for (i, j), v in a.brackets.items():
        brackets[(i, j)] = tuple(v) + tuple([Fraction(0)] * b.dim)
    for (i, j), v in b.brackets.items():
        brackets[(i + a.dim, j + a.dim)] = tuple([Fraction(0)] * a.dim) + tuple(v)
    return LieAlgebra(n, labels, brackets)


def parse_element(alg: LieAlgebra, text: str) -> Vector:
    return alg.element(part for part in text.split(",") if part.strip())


def algebra_from_json(doc: Mapping) -> LieAlgebra:
    dim = int(doc["dim"])
    labels = tuple(doc.get("basis") or [f"e{i}" for i in range(dim)])
    brackets = {}
    for entry in doc.get("brackets", []):
        i, j = int(entry["i"]), int(entry["j"])
        if not i < j:
            raise LieAlgebraError(f"bracket entries need i < j, got i={i}, j={j}")
        if (i, j) in brackets:
            raise LieAlgebraError(f"duplicate bracket entry ({i}, {j})")
        brackets[(i, j)] = tuple(rq.to_fraction(c) for c in entry["coeffs"])
    return LieAlgebra(dim, labels, brackets)


def algebra_to_json(alg: LieAlgebra) -> dict:
    return {
        "dim": alg.dim,
        "basis": list(alg.basis_labels),
        "brackets": [
            {"i": i, "j": j, "coeffs": [rq.fraction_str(c) for c in v]}
            for (i, j), v in sorted(alg.brackets.items())
        ],
    }


def load_algebra(path: str | Path) -> LieAlgebra:
    with open(path) as fh:
        return algebra_from_json(json.load(fh))
