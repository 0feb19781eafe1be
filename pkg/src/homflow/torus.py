"""Invariant distributions and the cohomological equation for linear toral flows.

Fourier convention: ``e_k(x) = exp(2 pi i k.x)``, so the generator acts by
``L_X e_k = 2 pi i (k.omega) e_k``.  The factor ``2 pi i`` is never
evaluated in exact mode; coefficients carry it as an integer power.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import mpmath
import numpy as np

from . import lattice
from . import rational as rq

Mode = tuple[int, ...]


class TorusError(ValueError):
    pass


# --------------------------------------------------------------------------
# data types

@dataclass(frozen=True)
class TorusFlow:
    """Linear flow with frequency ``omega``; ``exact`` marks rational input."""

    omega: tuple
    exact: bool

    def __post_init__(self):
        if not self.omega:
            raise TorusError("empty frequency vector")
        if all(w == 0 for w in self.omega):
            raise TorusError("frequency vector must be nonzero")

    @property
    def d(self) -> int:
        return len(self.omega)

    @classmethod
    def rational(cls, omega: Iterable) -> "TorusFlow":
        return cls(tuple(rq.to_fraction(w) for w in omega), True)

    @classmethod
    def numeric(cls, omega: Iterable) -> "TorusFlow":
        vals = tuple(w if isinstance(w, mpmath.mpf) else float(w) for w in omega)
        return cls(vals, False)

    def pairing(self, k: Sequence[int]):
        return sum((ki * wi for ki, wi in zip(k, self.omega)), Fraction(0) if self.exact else 0.0)

    def to_dict(self) -> dict:
        return {
            "omega": [rq.fraction_str(w) if self.exact else str(w) for w in self.omega],
            "exact": self.exact,
        }


@dataclass(frozen=True)
class QComplex:
    """Complex number with exact rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __truediv__(self, c) -> "QComplex":
        return QComplex(self.re / c, self.im / c)

    def __mul__(self, c) -> "QComplex":
        return QComplex(self.re * c, self.im * c)

    __rmul__ = __mul__

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def to_json(self) -> dict:
        return {"re": rq.fraction_str(self.re), "im": rq.fraction_str(self.im)}


@dataclass
class FourierFunction:
    """Finitely supported Fourier series ``sum_k (2 pi i)^p c_k e_k``.

    ``twopi_i_power`` is the formal power ``p``; it is 0 for data and -1
    for solutions of the cohomological equation.
    """

    coeffs: dict[Mode, object] = field(default_factory=dict)
    twopi_i_power: int = 0
    real: bool = False

    def __post_init__(self):
        self.coeffs = {tuple(int(v) for v in k): c for k, c in self.coeffs.items() if c}
        if self.real:
            for k, c in self.coeffs.items():
                mk = tuple(-v for v in k)
                other = self.coeffs.get(mk, 0)
                if complex(other) != complex(c).conjugate():
                    raise TorusError(f"reality flag requires f(-k) = conj f(k); fails at {k}")

    @property
    def support(self) -> list[Mode]:
        return sorted(self.coeffs)

    def value(self, k: Mode) -> complex:
        """Numeric coefficient including the ``(2 pi i)^p`` factor."""
        c = complex(self.coeffs.get(tuple(k), 0))
        return c * (2j * math.pi) ** self.twopi_i_power

    def to_json(self) -> list[dict]:
        out = []
        for k in self.support:
            c = self.coeffs[k]
            if isinstance(c, QComplex):
                entry = {"k": list(k), **c.to_json()}
            else:
                c = complex(c)
                entry = {"k": list(k), "re": repr(c.real), "im": repr(c.imag)}
            out.append(entry)
        return out

    @classmethod
    def from_json(cls, entries: Sequence[Mapping], real: bool = False) -> "FourierFunction":
        coeffs = {}
        for e in entries:
            k = tuple(int(v) for v in e["k"])
            coeffs[k] = QComplex(rq.to_fraction(e.get("re", 0)), rq.to_fraction(e.get("im", 0)))
        return cls(coeffs, 0, real)


@dataclass
class ResonanceLattice:
    basis: list[Mode]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def to_dict(self) -> dict:
        return {"basis": [list(b) for b in self.basis], "rank": self.rank}


@dataclass
class InvariantDistributionBasis:
    modes: list[Mode]
    exact: bool
    cutoff: int
    atol: float | None = None
    min_nonresonant: float | None = None
    rounding_bound: float | None = None

    @property
    def count(self) -> int:
        return len(self.modes)

    def to_dict(self) -> dict:
        out = {"basis": [list(k) for k in self.modes], "count": self.count, "cutoff": self.cutoff, "exact": self.exact}
        if not self.exact:
            out.update(
                {"atol": self.atol, "min_nonresonant": self.min_nonresonant, "rounding_bound": self.rounding_bound}
            )
        return out


# --------------------------------------------------------------------------
# resonances and distributions

def _clear_denominators(omega: Sequence[Fraction]) -> list[int]:
    den = 1
    for w in omega:
        den = den * w.denominator // math.gcd(den, w.denominator)
    ints = [int(w * den) for w in omega]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return [v // g for v in ints] if g else ints


def resonance_lattice(omega: Sequence) -> ResonanceLattice:
    """Hermite basis of ``{k in Z^d : k.omega = 0}`` for rational ``omega``."""
    omega = [rq.to_fraction(w) for w in omega]
    if all(w == 0 for w in omega):
        raise TorusError("frequency vector must be nonzero")
    basis = lattice.integer_kernel([_clear_denominators(omega)])
    return ResonanceLattice([tuple(b) for b in basis])


def _box(d: int, cutoff: int) -> np.ndarray:
    axes = [np.arange(-cutoff, cutoff + 1, dtype=np.int64)] * d
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def invariant_distributions(flow: TorusFlow, cutoff: int, atol: float = 1e-9) -> InvariantDistributionBasis:
    """Modes ``k`` with ``|k|_inf <= cutoff`` on which ``L_X`` vanishes.

    Each mode represents the distribution ``f -> f_hat(k)``; ``k = 0`` is the
    invariant measure.
    """
    if cutoff < 0:
        raise TorusError("cutoff must be nonnegative")
    d = flow.d
    if flow.exact:
        ints = _clear_denominators(flow.omega)
        if d == 1:
            return InvariantDistributionBasis([(0,)], True, cutoff)
        big = max(abs(v) for v in ints) * cutoff * d >= 2**62
        a = np.array(ints, dtype=object if big else np.int64)
        rest = _box(d - 1, cutoff).astype(object if big else np.int64)
        modes = []
        # slab by first coordinate keeps memory bounded in higher dimension
        for k0 in range(-cutoff, cutoff + 1):
            vals = k0 * a[0] + rest @ a[1:]
            for h in np.nonzero(vals == 0)[0]:
                modes.append((k0, *(int(v) for v in rest[h])))
        return InvariantDistributionBasis(sorted(modes), True, cutoff)

    omega = np.array([float(w) for w in flow.omega])
    ks = _box(d, cutoff)
    vals = np.abs(ks @ omega)
    # floating error of each dot product, bounded term by term
    bound = float(np.abs(ks).sum(axis=1).max() * np.abs(omega).max() * d * np.finfo(float).eps) if len(ks) else 0.0
    res = vals < atol
    modes = sorted(tuple(int(v) for v in k) for k in ks[res])
    nonzero = np.any(ks != 0, axis=1) & ~res
    min_nr = float(vals[nonzero].min()) if nonzero.any() else None
    return InvariantDistributionBasis(modes, False, cutoff, atol, min_nr, bound)


# --------------------------------------------------------------------------
# cohomological equation

@dataclass
class CohomologySolution:
    u: FourierFunction
    obstructions: list[tuple[Mode, object]]
    exact: bool

    def to_dict(self) -> dict:
        return {
            "u": self.u.to_json(),
            "u_twopi_i_power": self.u.twopi_i_power,
            "obstructions": [
                {"k": list(k), **(v.to_json() if isinstance(v, QComplex) else {"re": repr(complex(v).real), "im": repr(complex(v).imag)})}
                for k, v in self.obstructions
            ],
            "exact": self.exact,
        }


def solve_cohomological(flow: TorusFlow, f: FourierFunction, cutoff: int, atol: float = 1e-12) -> CohomologySolution:
    """Mode-wise solution of ``X u = f``: ``u_hat(k) = f_hat(k) / (2 pi i k.omega)``.

    Resonant modes carrying mass are returned as obstructions; they are the
    pairings of ``f`` with invariant distributions.
    """
    if f.twopi_i_power != 0:
        raise TorusError("right-hand side must be plain Fourier data")
    for k in f.coeffs:
        if len(k) != flow.d:
            raise TorusError(f"mode {k} has wrong dimension for a {flow.d}-torus")
        if max(abs(v) for v in k) > cutoff:
            raise TorusError(f"mode {k} lies outside the cutoff {cutoff}")
    u = {}
    obstructions = []
    for k in f.support:
        c = f.coeffs[k]
        kw = flow.pairing(k)
        resonant = kw == 0 if flow.exact else abs(kw) < atol
        if resonant:
            obstructions.append((k, c))
            continue
        if flow.exact and isinstance(c, QComplex):
            u[k] = c / kw
        else:
            u[k] = complex(c) / float(kw)
    return CohomologySolution(FourierFunction(u, -1), obstructions, flow.exact and all(isinstance(c, QComplex) for c in f.coeffs.values()))


def apply_generator(flow: TorusFlow, u: FourierFunction) -> FourierFunction:
    """``L_X u`` mode by mode; raises the formal ``2 pi i`` power by one."""
    out = {}
    for k, c in u.coeffs.items():
        kw = flow.pairing(k)
        out[k] = c * kw if isinstance(c, QComplex) else complex(c) * float(kw)
    return FourierFunction(out, u.twopi_i_power + 1)


# --------------------------------------------------------------------------
# Diophantine type

def _floor(x) -> int:
    if isinstance(x, mpmath.mpf):
        return int(mpmath.floor(x))
    return math.floor(x)


def _log(x) -> float:
    if isinstance(x, mpmath.mpf):
        return float(mpmath.log(x))
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def continued_fraction(x, terms: int = 64) -> list[int]:
    out = []
    for _ in range(terms):
        a = _floor(x)
        out.append(a)
        frac = x - a
        if frac == 0:
            break
        x = 1 / frac
    return out


def convergents(cf: Sequence[int]) -> list[tuple[int, int]]:
    h0, h1, k0, k1 = 0, 1, 1, 0
    out = []
    for a in cf:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append((h1, k1))
    return out


@dataclass
class DiophantineEstimate:
    C: float | None
    tau: float | None
    witnesses: list[dict]
    resonance: Mode | None = None
    convergent_check: dict | None = None

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "tau": self.tau,
            "witnesses": self.witnesses,
            "resonance": list(self.resonance) if self.resonance else None,
            "convergent_check": self.convergent_check,
        }


def _records(cands: Iterable[tuple[int, object, Mode]]) -> tuple[list[tuple[int, object, Mode]], Mode | None]:
    best = None
    out = []
    for norm, val, k in sorted(cands, key=lambda t: (t[0], t[1])):
        if val == 0:
            return out, k
        if best is None or val < best:
            best = val
            out.append((norm, val, k))
    return out, None


def diophantine_type(omega: Sequence, depth: int) -> DiophantineEstimate:
    """Fit ``|k.omega| >= C / |k|^tau`` over ``0 < |k|_inf <= depth``.

    Each witness is the mode that sets a new running minimum as the box
    grows.  In two dimensions only the best ``k1`` for each ``k2`` can be a
    record, which keeps the scan linear in ``depth`` and lets exact or
    high-precision frequencies through; the records are compared against the
    continued-fraction convergents of the frequency ratio.
    """
    omega = list(omega)
    d = len(omega)
    if d < 2:
        raise TorusError("Diophantine type needs d >= 2")
    if d == 2:
        swap = abs(omega[1]) > abs(omega[0])
        w0, w1 = (omega[1], omega[0]) if swap else (omega[0], omega[1])
        cands = [(1, abs(w0), (1, 0))]
        for k2 in range(1, depth + 1):
            x = -k2 * w1 / w0
            for k1 in (_floor(x), _floor(x) + 1):
                if abs(k1) <= depth:
                    cands.append((max(abs(k1), k2), abs(k1 * w0 + k2 * w1), (k1, k2)))
        recs, res = _records(cands)
        unswap = (lambda k: (k[1], k[0])) if swap else (lambda k: k)
        recs = [(n, v, unswap(k)) for n, v, k in recs]
        res = unswap(res) if res else None
    else:
        w = np.array([float(v) for v in omega])
        ks = _box(d, depth)
        ks = ks[np.any(ks != 0, axis=1)]
        vals = np.abs(ks @ w)
        norms = np.abs(ks).max(axis=1)
        recs, res = _records((int(n), float(v), tuple(int(t) for t in k)) for n, v, k in zip(norms, vals, ks))
    if res is not None:
        return DiophantineEstimate(None, None, _witness_rows(recs), tuple(res))

    rows = _witness_rows(recs)
    fit = [(math.log(n), _log(v)) for n, v, _ in recs if n >= 2]
    tau = C = None
    if len(fit) >= 2:
        xs = np.array([p[0] for p in fit])
        ys = np.array([p[1] for p in fit])
        slope, _ = np.polyfit(xs, ys, 1)
        tau = float(-slope)
        C = float(min(math.exp(y + tau * x) for x, y in fit))

    check = None
    if d == 2:
        w0, w1 = omega
        ratio = abs(w1 / w0) if abs(w0) >= abs(w1) else abs(w0 / w1)
        dens = {q for _, q in convergents(continued_fraction(ratio, 80)) if q <= depth}
        # the denominator is the entry multiplying the smaller frequency
        small = 1 if abs(w0) >= abs(w1) else 0
        rec_q = {abs(k[small]) for n, _, k in recs if n >= 2}
        check = {
            "convergent_denominators": sorted(dens),
            "record_denominators": sorted(rec_q),
            "records_are_convergents": rec_q <= dens,
        }
    return DiophantineEstimate(C, tau, rows, None, check)


def _witness_rows(recs) -> list[dict]:
    rows = []
    for n, v, k in recs:
        fv = float(v)
        rows.append(
            {
                "k": list(k),
                "norm": n,
                "value": fv if fv > 0 else mpmath.nstr(v, 8),
                "log10_value": _log(v) / math.log(10),
                "local_exponent": (-_log(v) / math.log(n)) if n >= 2 else None,
            }
        )
    return rows


# --------------------------------------------------------------------------
# Liouville instability exhibit

def liouville_truncations(n_max: int = 4) -> list[Fraction]:
    """Partial sums of ``sum_j 10^(-j!)``; exact rationals."""
    out = []
    s = Fraction(0)
    for j in range(1, n_max + 1):
        s += Fraction(1, 10 ** math.factorial(j))
        out.append(s)
    return out


def golden_truncations(n_max: int = 4) -> list[Fraction]:
    """Decimal truncations of the golden ratio to ``j!`` digits, matching the Liouville schedule."""
    with mpmath.workdps(200):
        phi = (1 + mpmath.sqrt(5)) / 2
        out = []
        for j in range(1, n_max + 1):
            digits = math.factorial(j)
            out.append(Fraction(int(mpmath.floor(phi * 10**digits)), 10**digits))
    return out


def geometric_weights(k: Mode) -> Fraction:
    """``2^(-|k|_1)``."""
    return Fraction(1, 2 ** sum(abs(v) for v in k))


def liouville_blowup_demo(
    omega_sequence: Sequence[Sequence],
    f: Callable[[Mode], Fraction] = geometric_weights,
    cutoff: int = 64,
) -> list[dict]:
    """Largest solution coefficient ``max_k |u_hat(k)|`` for each frequency.

    ``f`` gives real Fourier coefficients; every mode of the box
    ``|k|_inf <= cutoff`` is solved exactly and resonant modes are skipped
    (they are obstructions, not solution coefficients).
    """
    table = []
    prev = None
    for idx, omega in enumerate(omega_sequence):
        flow = TorusFlow.rational(omega)
        ints = _clear_denominators(flow.omega)
        den = Fraction(ints[0]) / flow.omega[0] if flow.omega[0] else Fraction(ints[1]) / flow.omega[1]
        best = (0.0, None, None)
        n_res = 0
        for k in itertools.product(range(-cutoff, cutoff + 1), repeat=flow.d):
            kw_int = sum(a * b for a, b in zip(ints, k))
            if kw_int == 0:
                n_res += 1
                continue
            fk = f(k)
            if not fk:
                continue
            kw = Fraction(kw_int) / den
            mag = float(abs(fk) / abs(kw)) / (2 * math.pi)
            if mag > best[0]:
                best = (mag, k, kw)
        row = {
            "index": idx,
            "omega": [rq.fraction_str(w) for w in flow.omega],
            "max_abs_u": best[0],
            "argmax": list(best[1]) if best[1] else None,
            "divisor_at_argmax": float(best[2]) if best[2] is not None else None,
            "resonant_modes_skipped": n_res,
            "growth_factor": (best[0] / prev) if prev else None,
        }
        prev = best[0]
        table.append(row)
    return table


# --------------------------------------------------------------------------
# pullback along a toral epimorphism

def pullback_distribution(p: Sequence[Sequence[int]], dist: Sequence[int], omega: Sequence | None = None) -> Mode:
    """Pull a factor mode back along ``P: T^n -> T^m``: ``k' = P^T dist``.

    With ``omega`` given (rational), also checks that ``dist`` is resonant for
    the factor frequency ``P omega``.
    """
    p = [[int(v) for v in row] for row in p]
    m = len(p)
    n = len(p[0]) if p else 0
    if len(dist) != m:
        raise TorusError(f"distribution mode has length {len(dist)}, factor torus has dimension {m}")
    if not lattice.is_unimodular_surjection(p):
        raise TorusError("P is not surjective over Z (nontrivial cokernel)")
    if omega is not None:
        om = [rq.to_fraction(w) for w in omega]
        factor = [sum((Fraction(p[i][j]) * om[j] for j in range(n)), Fraction(0)) for i in range(m)]
        if sum((di * fi for di, fi in zip(dist, factor)), Fraction(0)) != 0:
            raise TorusError("mode is not resonant for the factor frequency")
    return tuple(sum(p[i][j] * int(dist[i]) for i in range(m)) for j in range(n))
