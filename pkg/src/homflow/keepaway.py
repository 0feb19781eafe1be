"""Keep-away construction for hyperbolic toral automorphisms.

The partially hyperbolic system is a hyperbolic ``A in GL(d, Z)`` acting on
``T^d``, either as the map itself or through its suspension flow with unit
roof.  The expanding foliation is the linear foliation along a real
eigenvector ``v`` with ``|lambda| > 1``; it is expanded by exactly
``|lambda|`` per iterate, so the Euclidean metric is already adapted and
only time is rescaled: one rescaled time unit is ``t_unit = ln 4 / ln|lambda|``
iterates, after which leaves have grown by a factor 4.

Target boxes ``V_{delta,r}(p)`` sit in the time-zero section, so a leaf
disc can only meet them at whole iterates and every hitting time is a
multiple of ``1 / t_unit``.  Orbits are carried in covering coordinates
at a working precision chosen from the time horizon, because the leaf
direction amplifies rounding by ``|lambda|`` per iterate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree

from . import rational as rq
from .classify import halfplane_root_counts

LN4 = math.log(4.0)


class KeepAwayError(RuntimeError):
    """Construction failed; ``details`` carries diagnostics."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class SystemBuildError(ValueError):
    """``A`` is not a hyperbolic automorphism with a real expanding leaf."""


class GeometryError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class ConstantSearchError(PreconditionError):
    """No admissible ``(x0, r, delta)`` above the radius floor."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class Mode(str, enum.Enum):
    DISCRETE = "DiscreteMap"
    SUSPENSION = "Suspension"


# --------------------------------------------------------------------------
# the system

def _cayley_poly(chi: rq.Poly) -> rq.Poly:
    """``(1 - z)^d chi((1 + z) / (1 - z))``: unit circle -> imaginary axis."""
    d = len(chi) - 1
    out: rq.Poly = []
    for k, c in enumerate(chi):
        if c:
            term = [Fraction(c)]
            for _ in range(k):
                term = rq.pmul(term, [Fraction(1), Fraction(1)])
            for _ in range(d - k):
                term = rq.pmul(term, [Fraction(1), Fraction(-1)])
            out = rq.padd(out, term)
    return out


def unit_circle_roots(a: Sequence[Sequence[int]]) -> int:
    """Exact number of eigenvalues of ``a`` on the unit circle, with multiplicity."""
    chi = rq.charpoly(rq.as_matrix(a))
    at_minus_one = rq.peval(chi, Fraction(-1))
    q = _cayley_poly(chi)
    n0, _, _ = halfplane_root_counts(q)
    # x = -1 escapes to z = infinity and shows up as a degree drop
    return n0 + (len(chi) - 1 - rq.pdeg(q) if at_minus_one == 0 else 0)


@dataclass(frozen=True)
class ToralHyperbolicSystem:
    A: tuple[tuple[int, ...], ...]
    mode: Mode
    lam: float  # signed eigenvalue along the leaf direction
    leaf_direction: np.ndarray
    unstable_basis: np.ndarray
    stable_basis: np.ndarray
    t_unit: float  # iterates per rescaled time unit
    norm_A: float

    @property
    def d(self) -> int:
        return len(self.A)

    @property
    def expansion(self) -> float:
        return abs(self.lam)

    @property
    def injectivity_bound(self) -> float:
        return 1.0 / (4.0 * max(self.norm_A, 1.0))

    @property
    def iterates_per_unit(self) -> int:
        """Whole iterates inside one rescaled time unit."""
        return int(math.floor(self.t_unit + 1e-12))

    def iterates(self, t: float) -> int:
        return int(math.floor(t * self.t_unit + 1e-9))

    def to_dict(self) -> dict:
        return {
            "A": [list(r) for r in self.A],
            "mode": self.mode.value,
            "lambda": self.lam,
            "expansion": self.expansion,
            "leaf_direction": self.leaf_direction.tolist(),
            "unstable_basis": self.unstable_basis.T.tolist(),
            "stable_basis": self.stable_basis.T.tolist(),
            "t_unit": self.t_unit,
            "norm_A": self.norm_A,
            "injectivity_bound": self.injectivity_bound,
        }


def build_system(a: Sequence[Sequence[int]], mode: Mode | str = Mode.DISCRETE) -> ToralHyperbolicSystem:
    mode = Mode(mode)
    a = [[int(v) for v in row] for row in a]
    d = len(a)
    if d < 2 or any(len(row) != d for row in a):
        raise SystemBuildError("A must be a square integer matrix of size at least 2")
    det = rq.det(rq.as_matrix(a))
    if abs(det) != 1:
        raise SystemBuildError(f"|det A| must be 1, got {det}")
    n_circle = unit_circle_roots(a)
    if n_circle:
        raise SystemBuildError(f"A is not hyperbolic: {n_circle} eigenvalue(s) on the unit circle")

    m = np.array(a, dtype=float)
    w, vecs = np.linalg.eig(m)
    real = [i for i in range(d) if abs(w[i].imag) <= 1e-9 * max(1.0, abs(w[i])) and abs(w[i]) > 1]
    if not real:
        raise SystemBuildError("A has no real expanding eigenvalue to carry a one-dimensional leaf")
    i = max(real, key=lambda j: abs(w[j]))
    lam = float(w[i].real)
    v = np.real(vecs[:, i])
    v = v / np.linalg.norm(v)
    j = int(np.argmax(np.abs(v)))
    if v[j] < 0:
        v = -v

    _, zu, su = scipy.linalg.schur(m, output="real", sort=lambda re, im: re * re + im * im > 1)
    _, zs, ss = scipy.linalg.schur(m, output="real", sort=lambda re, im: re * re + im * im < 1)
    return ToralHyperbolicSystem(
        A=tuple(tuple(r) for r in a),
        mode=mode,
        lam=lam,
        leaf_direction=v,
        unstable_basis=zu[:, :su],
        stable_basis=zs[:, :ss],
        t_unit=LN4 / math.log(abs(lam)),
        norm_A=float(np.linalg.norm(m, 2)),
    )


def leaf_expansion(system: ToralHyperbolicSystem, t: float) -> float:
    """Factor by which leaf lengths grow over rescaled time ``t``."""
    if system.mode is Mode.SUSPENSION:
        n = t * system.t_unit
    else:
        n = system.iterates(t)
    return system.expansion**n


# --------------------------------------------------------------------------
# precision and covering-space arithmetic

def working_context(system: ToralHyperbolicSystem, horizon: float, precision: str = "extended"):
    """An independent mpmath context sized for ``horizon`` rescaled time units."""
    ctx = mpmath.MPContext()
    if precision == "double":
        ctx.prec = 53
    elif precision == "extended":
        iterates = horizon * system.t_unit + 64
        ctx.prec = max(128, int(math.ceil(iterates * math.log2(system.expansion))) + 96)
    else:
        raise ValueError(f"unknown precision mode {precision!r}")
    return ctx


def leaf_direction_mp(system: ToralHyperbolicSystem, ctx) -> list:
    """Eigenvector along the leaf at the context's precision."""
    d = system.d
    chi = rq.charpoly(rq.as_matrix(system.A))
    lam = ctx.mpf(system.lam)
    for _ in range(200):
        f = sum(ctx.mpf(c.numerator) / c.denominator * lam**k for k, c in enumerate(chi))
        df = sum(k * ctx.mpf(c.numerator) / c.denominator * lam ** (k - 1) for k, c in enumerate(chi) if k)
        step = f / df
        lam -= step
        if abs(step) < ctx.mpf(2) ** (-ctx.prec + 8):
            break
    j = int(np.argmax(np.abs(system.leaf_direction)))
    others = [k for k in range(d) if k != j]
    # drop the row with the least leverage on the others
    rows = list(range(d))
    best = None
    for drop in rows:
        keep = [r for r in rows if r != drop]
        sub = np.array([[system.A[r][k] - (system.lam if r == k else 0) for k in others] for r in keep])
        cond = abs(np.linalg.det(sub)) if sub.size else 1.0
        if best is None or cond > best[0]:
            best = (cond, keep)
    keep = best[1]
    if others:
        mat = ctx.matrix([[ctx.mpf(system.A[r][k]) - (lam if r == k else 0) for k in others] for r in keep])
        rhs = ctx.matrix([-(ctx.mpf(system.A[r][j]) - (lam if r == j else 0)) for r in keep])
        sol = ctx.lu_solve(mat, rhs)
    v = [ctx.mpf(0)] * d
    v[j] = ctx.mpf(1)
    for idx, k in enumerate(others):
        v[k] = sol[idx]
    nrm = ctx.sqrt(sum(x * x for x in v))
    return [x / nrm for x in v]


def _mp(ctx, v):
    if isinstance(v, Fraction):
        return ctx.mpf(v.numerator) / v.denominator
    return ctx.mpf(v)


def _wrap_mp(ctx, x):
    return [xi - ctx.floor(xi) for xi in x]


def _step_mp(ctx, a, x):
    return [sum((a[i][j] * x[j] for j in range(len(x))), ctx.mpf(0)) for i in range(len(x))]


def orbit_mp(system: ToralHyperbolicSystem, ctx, x, n: int) -> list[list]:
    """``[x, A x, ..., A^n x]`` reduced mod 1 at every step."""
    out = [_wrap_mp(ctx, [_mp(ctx, v) for v in x])]
    for _ in range(n):
        out.append(_wrap_mp(ctx, _step_mp(ctx, system.A, out[-1])))
    return out


def centered(w: np.ndarray) -> np.ndarray:
    """Representative of ``w mod Z^d`` in ``[-1/2, 1/2)``."""
    return w - np.floor(w + 0.5)


def torus_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.linalg.norm(centered(np.asarray(x) - np.asarray(y)), axis=-1)


def _to_float(x) -> np.ndarray:
    return np.array([float(v) for v in x])


def _mp_str(ctx, x, digits: int | None = None) -> str:
    if digits is None:
        digits = max(17, int(ctx.prec * 0.30103))
    return ctx.nstr(x, digits, strip_zeros=False, min_fixed=-10**9, max_fixed=10**9)


# --------------------------------------------------------------------------
# leaf discs, transversal discs and flow boxes

def _perp_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the hyperplane orthogonal to ``v``."""
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(len(v))]))
    return q[:, 1 : len(v)]


def _check_radius(system: ToralHyperbolicSystem, *radii: float) -> None:
    for rho in radii:
        if rho < 0:
            raise GeometryError("radii must be nonnegative")
        if rho > system.injectivity_bound + 1e-15:
            raise GeometryError(
                f"radius {rho:g} exceeds the embedding bound {system.injectivity_bound:g} = 1/(4 max(|A|, 1))"
            )


@dataclass(frozen=True)
class LeafDisc:
    """``F_rho(x) = x + [-rho, rho] v  (mod Z^d)``."""

    center: np.ndarray
    direction: np.ndarray
    radius: float

    def coordinates(self, y) -> tuple[float, float]:
        w = centered(np.asarray(y, dtype=float) - self.center)
        alpha = float(w @ self.direction)
        return alpha, float(np.linalg.norm(w - alpha * self.direction))

    def contains(self, y, tol: float = 1e-12) -> bool:
        alpha, off = self.coordinates(y)
        return off <= tol and abs(alpha) <= self.radius + tol

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            (self.center - self.radius * self.direction) % 1.0,
            (self.center + self.radius * self.direction) % 1.0,
        )

    def sample(self, spacing: float) -> np.ndarray:
        n = max(2, int(math.ceil(2 * self.radius / spacing)) + 1)
        u = np.linspace(-self.radius, self.radius, n)
        return self.center + u[:, None] * self.direction


@dataclass(frozen=True)
class TransversalDisc:
    """``E_delta(x)``: the ball of radius ``delta`` in ``x + v^perp``."""

    center: np.ndarray
    direction: np.ndarray
    radius: float

    def contains(self, y, tol: float = 1e-12) -> bool:
        w = centered(np.asarray(y, dtype=float) - self.center)
        alpha = float(w @ self.direction)
        return abs(alpha) <= tol and float(np.linalg.norm(w - alpha * self.direction)) <= self.radius + tol


@dataclass(frozen=True)
class VNeighborhood:
    """``V_{delta,rho}(x)``: union of leaf discs ``F_rho(z)`` over ``z in E_delta(x)``."""

    center: np.ndarray
    direction: np.ndarray
    delta: float
    rho: float

    def coordinates(self, y) -> tuple[float, float]:
        """Leaf coordinate and transversal offset of ``y`` relative to the center."""
        w = centered(np.asarray(y, dtype=float) - self.center)
        alpha = float(w @ self.direction)
        return alpha, float(np.linalg.norm(w - alpha * self.direction))

    def contains(self, y, tol: float = 0.0) -> bool:
        alpha, off = self.coordinates(y)
        return off <= self.delta + tol and abs(alpha) <= self.rho + tol

    def meets_leaf_disc(self, x, r: float) -> bool:
        """Exact segment-versus-box test for ``F_r(x)``."""
        alpha, off = self.coordinates(x)
        return off <= self.delta and abs(alpha) <= self.rho + r

    def sample(self, spacing: float, leaf_range: tuple[float, float] | None = None) -> np.ndarray:
        """Grid points; ``leaf_range`` restricts ``|u|`` to an annulus ``[lo, hi]``."""
        d = len(self.center)
        perp = _perp_basis(self.direction)
        n_e = max(2, int(math.ceil(2 * self.delta / spacing)) + 1) if self.delta > 0 else 1
        axis = np.linspace(-self.delta, self.delta, n_e) if self.delta > 0 else np.zeros(1)
        grids = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
        e = np.stack([g.ravel() for g in grids], axis=1)
        e = e[np.linalg.norm(e, axis=1) <= self.delta + 1e-15]
        if leaf_range is None:
            n_u = max(2, int(math.ceil(2 * self.rho / spacing)) + 1)
            u = np.linspace(-self.rho, self.rho, n_u)
        else:
            lo, hi = leaf_range
            n_u = max(2, int(math.ceil((hi - lo) / spacing)) + 1)
            side = np.linspace(lo, hi, n_u)
            u = np.concatenate([-side[::-1], side])
        pts = self.center + (e @ perp.T)[:, None, :] + u[None, :, None] * self.direction
        return pts.reshape(-1, d)


def leaf_disc(system: ToralHyperbolicSystem, x, rho: float) -> LeafDisc:
    _check_radius(system, rho)
    return LeafDisc(np.asarray(x, dtype=float) % 1.0, system.leaf_direction, rho)


def transversal_disc(system: ToralHyperbolicSystem, x, delta: float) -> TransversalDisc:
    _check_radius(system, delta)
    return TransversalDisc(np.asarray(x, dtype=float) % 1.0, system.leaf_direction, delta)


def v_neighborhood(system: ToralHyperbolicSystem, x, delta: float, rho: float) -> VNeighborhood:
    _check_radius(system, delta, rho)
    return VNeighborhood(np.asarray(x, dtype=float) % 1.0, system.leaf_direction, delta, rho)


# --------------------------------------------------------------------------
# constants

@dataclass(frozen=True)
class Window:
    """Open ball ``W`` in the torus."""

    center: np.ndarray
    radius: float

    @classmethod
    def parse(cls, text: str) -> "Window":
        vals = [float(v) for v in text.split(",")]
        return cls(np.array(vals[:-1]), vals[-1])


@dataclass
class Constants:
    x0: np.ndarray
    r: float
    delta: float
    margin: float
    spacing: float
    checks: list[dict] = field(default_factory=list)
    attempts: int = 0

    def to_dict(self) -> dict:
        return {
            "x0": self.x0.tolist(),
            "r": self.r,
            "delta": self.delta,
            "margin": self.margin,
            "grid_spacing": self.spacing,
            "attempts": self.attempts,
            "checks": self.checks,
        }


def _matpow_float(system: ToralHyperbolicSystem, k: int) -> np.ndarray:
    return np.linalg.matrix_power(np.array(system.A, dtype=float), k) if k >= 0 else np.linalg.matrix_power(
        np.linalg.inv(np.array(system.A, dtype=float)), -k
    )


def check_distinct_orbits(system: ToralHyperbolicSystem, targets: Sequence, t_check: float = 10.0, tol: float = 1e-9) -> None:
    """Reject target pairs whose orbit segments over ``[0, t_check]`` collide."""
    if len(targets) < 2:
        return
    n = max(1, int(math.ceil(t_check * system.t_unit)))
    ctx = mpmath.MPContext()
    ctx.prec = 64 + int(n * math.log2(system.expansion)) + 16
    orbits = [np.array([_to_float(x) for x in orbit_mp(system, ctx, p, n)]) for p in targets]
    for i in range(len(targets)):
        for j in range(i + 1, len(targets)):
            pj = np.asarray(targets[j], dtype=float)
            pi = np.asarray(targets[i], dtype=float)
            if torus_distance(orbits[i], pj).min() <= tol or torus_distance(orbits[j], pi).min() <= tol:
                raise PreconditionError(f"targets {i} and {j} lie on the same orbit")


def _cloud_gap(a: np.ndarray, b: np.ndarray) -> float:
    ta = cKDTree(a % 1.0, boxsize=1.0)
    dist, _ = ta.query(b % 1.0, k=1)
    return float(dist.min())


def _verify_conditions(
    system: ToralHyperbolicSystem, targets: Sequence, window: Window, x0: np.ndarray, r: float, delta: float
) -> tuple[bool, float, float, list[dict]]:
    v = system.leaf_direction
    d = system.d
    spacing = min(r, delta) / 8.0
    k1 = max(system.iterates_per_unit, 0)
    powers = {k: _matpow_float(system, k) for k in range(0, k1 + 1)}
    lip = max(max(np.linalg.norm(p, 2) for p in powers.values()), 1.0)
    required = 10.0 * spacing * lip
    cover = 0.5 * spacing * math.sqrt(d)
    checks: list[dict] = []
    margin = math.inf

    def record(name: str, gap: float, lip_a: float, lip_b: float) -> bool:
        nonlocal margin
        m = gap - cover * (lip_a + lip_b)
        ok = gap >= required and m > 0
        margin = min(margin, m)
        checks.append({"condition": name, "sampled_gap": gap, "required_gap": required, "certified_margin": m, "ok": ok})
        return ok

    ok = True
    # leaf disc of x0 inside W
    slack = window.radius - float(np.linalg.norm(centered(x0 - window.center))) - r
    checks.append({"condition": "F_r(x0) in W", "slack": slack, "ok": slack > 0})
    ok &= slack > 0
    if not ok:
        return False, -math.inf, spacing, checks

    boxes4 = [VNeighborhood(np.asarray(p, float), v, delta, 4 * r) for p in targets]
    box4_pts = [b.sample(spacing) for b in boxes4]
    # (i) the annulus V_{d,4r} \ V_{d,2r} never flows back into V_{d,r} within unit time
    for i, p in enumerate(targets):
        inner = VNeighborhood(np.asarray(p, float), v, delta, r).sample(spacing)
        ann = boxes4[i].sample(spacing, leaf_range=(2 * r, 4 * r))
        for k in range(1, k1 + 1):
            img = ann @ powers[k].T
            ok &= record(f"annulus of target {i} misses its box after {k} iterate(s)", _cloud_gap(img, inner), np.linalg.norm(powers[k], 2), 1.0)
            if not ok:
                return False, margin, spacing, checks
    # flow boxes of distinct targets are disjoint, and miss the leaf discs along x0's orbit
    imgs = [{k: pts @ powers[k].T for k in powers} for pts in box4_pts]
    for i in range(len(targets)):
        for j in range(i + 1, len(targets)):
            for a in powers:
                for b in powers:
                    gap = _cloud_gap(imgs[i][a], imgs[j][b])
                    ok &= record(
                        f"boxes of targets {i},{j} disjoint at iterates {a},{b}",
                        gap,
                        np.linalg.norm(powers[a], 2),
                        np.linalg.norm(powers[b], 2),
                    )
                    if not ok:
                        return False, margin, spacing, checks
    x_orbit = [x0 % 1.0]
    for _ in range(k1):
        x_orbit.append((powers[1] @ x_orbit[-1]) % 1.0)
    for i in range(len(targets)):
        for b, xb in enumerate(x_orbit):
            seg = LeafDisc(xb, v, r).sample(spacing)
            for a in powers:
                gap = _cloud_gap(imgs[i][a], seg)
                ok &= record(f"box of target {i} at iterate {a} misses F_r(A^{b} x0)", gap, np.linalg.norm(powers[a], 2), 1.0)
                if not ok:
                    return False, margin, spacing, checks
    return ok, margin, spacing, checks


def choose_constants(
    system: ToralHyperbolicSystem,
    targets: Sequence,
    window: Window,
    r_floor: float = 1e-6,
    t_check: float = 10.0,
) -> Constants:
    """Find ``x0 in W`` and radii ``r, delta`` satisfying the keep-away conditions.

    Starts at the largest admissible radius and halves ``(r, delta)`` until
    every condition is certified on a sampling grid.
    """
    targets = [np.asarray(p, dtype=float) % 1.0 for p in targets]
    check_distinct_orbits(system, targets, t_check)
    r = min(system.injectivity_bound / 4.0, window.radius * (1 - 1e-9))
    attempts = 0
    last: list[dict] = []
    while r >= r_floor:
        delta = r / 2.0
        for x0 in _candidate_points(window, r):
            attempts += 1
            ok, margin, spacing, checks = _verify_conditions(system, targets, window, x0, r, delta)
            last = checks
            if ok:
                return Constants(x0 % 1.0, r, delta, margin, spacing, checks, attempts)
        r /= 2.0
    raise ConstantSearchError(
        f"no admissible constants above r = {r_floor:g}: targets too close or window too small",
        {"attempts": attempts, "last_checks": last[-3:]},
    )


def _candidate_points(window: Window, r: float) -> list[np.ndarray]:
    pts = [np.asarray(window.center, float)]
    room = window.radius - r
    if room > 0:
        d = len(window.center)
        for scale in (0.5, 0.9):
            for axis in range(d):
                for sgn in (1, -1):
                    e = np.zeros(d)
                    e[axis] = sgn * scale * room
                    pts.append(window.center + e)
    return pts


# --------------------------------------------------------------------------
# the inductive construction

@dataclass
class Hit:
    iterates: int
    tau: float
    target: int
    x_hat: list  # mp point


def first_hit_time(
    system: ToralHyperbolicSystem,
    x,
    r: float,
    delta: float,
    targets: Sequence,
    t_cap: float,
    ctx=None,
) -> Hit | None:
    """Earliest whole iterate ``k >= 1`` at which ``F_r(A^k x)`` meets a target box.

    Returns ``None`` (no hit before ``t_cap`` rescaled units) for an infinite
    hitting time.  The segment-versus-box test is exact in covering
    coordinates.
    """
    if not len(targets):
        return None
    ctx = ctx or working_context(system, t_cap)
    v = system.leaf_direction
    tg = np.array([np.asarray(p, dtype=float) for p in targets]) % 1.0
    k_cap = system.iterates(t_cap)
    y = _wrap_mp(ctx, [_mp(ctx, c) for c in x])
    for k in range(1, k_cap + 1):
        y = _wrap_mp(ctx, _step_mp(ctx, system.A, y))
        w = centered(_to_float(y) - tg)
        alpha = w @ v
        off = np.linalg.norm(w - alpha[:, None] * v, axis=1)
        hit = np.nonzero((off <= delta) & (np.abs(alpha) <= 2 * r))[0]
        if hit.size:
            return Hit(k, k / system.t_unit, int(hit[0]), y)
    return None


@dataclass
class Stage:
    n: int
    x: list  # mp point x_n
    tau: float | None = None
    iterates: int | None = None
    target: int | None = None
    x_hat: list | None = None
    z: list | None = None
    alpha: object = None
    sigma: object = None


@dataclass
class KeepAwayTrace:
    system: ToralHyperbolicSystem
    x0: list
    r: float
    delta: float
    stages: list[Stage]
    d_centers: list  # leaf coordinate of the midpoint of D_n relative to x0 (mp)
    d_halflengths: list  # half-length of D_n (mp)
    total_iterates: list[int]  # K_n, whole iterates before stage n
    q: list | None = None
    epsilon: float = math.inf
    terminated_by: str = ""
    ctx: object = None
    validation: dict = field(default_factory=dict)

    @property
    def times(self) -> list[float]:
        return [k / self.system.t_unit for k in self.total_iterates]

    def nesting_report(self) -> dict:
        """``D_{n+1}`` inside ``D_n`` and the factor-4 length bound, checked in working precision."""
        ctx = self.ctx
        nested = []
        lengths = []
        for n in range(len(self.d_centers)):
            length = 2 * self.d_halflengths[n]
            bound = ctx.mpf(2 * self.r) * ctx.mpf(4) ** (-n)
            lengths.append(bool(length <= bound * (1 + ctx.mpf(2) ** (-40))))
            if n + 1 < len(self.d_centers):
                c0, h0 = self.d_centers[n], self.d_halflengths[n]
                c1, h1 = self.d_centers[n + 1], self.d_halflengths[n + 1]
                slack = h0 - (abs(c1 - c0) + h1)
                nested.append(bool(slack >= -h0 * ctx.mpf(2) ** (-40)))
        return {
            "nested": all(nested),
            "length_bound": all(lengths),
            "nested_per_stage": nested,
            "length_per_stage": lengths,
            "log10_lengths": [float(ctx.log10(2 * h)) for h in self.d_halflengths],
        }

    def to_dict(self) -> dict:
        ctx = self.ctx
        s = lambda x: _mp_str(ctx, x, 30)  # noqa: E731
        pt = lambda p: [s(c) for c in p] if p is not None else None  # noqa: E731
        return {
            "system": self.system.to_dict(),
            "x0": pt(self.x0),
            "r": self.r,
            "delta": self.delta,
            "epsilon": self.epsilon if math.isfinite(self.epsilon) else "inf",
            "terminated_by": self.terminated_by,
            "precision_bits": ctx.prec,
            "q": [_mp_str(ctx, c) for c in self.q] if self.q is not None else None,
            "stages": [
                {
                    "n": st.n,
                    "x": pt(st.x),
                    "tau": st.tau,
                    "iterates": st.iterates,
                    "T_n": self.times[st.n],
                    "target": st.target,
                    "x_hat": pt(st.x_hat),
                    "z": pt(st.z),
                    "alpha": s(st.alpha) if st.alpha is not None else None,
                    "sigma": s(st.sigma) if st.sigma is not None else None,
                }
                for st in self.stages
            ],
            "D": [
                {"center": s(c), "log10_length": float(ctx.log10(2 * h))}
                for c, h in zip(self.d_centers, self.d_halflengths)
            ],
            "nesting": self.nesting_report(),
            "validation": self.validation,
        }


def keepaway_step(system: ToralHyperbolicSystem, stage: Stage, hit: Hit, targets: Sequence, r: float, delta: float, ctx, v_mp) -> Stage:
    """Move from the hit point ``x_hat`` to ``x_{n+1}``, ``3r`` along the leaf from ``z``.

    ``z`` is the unique point of ``F_{2r}(x_hat)`` on the transversal disc
    through the target; ``x_{n+1}`` lies on the ray from ``z`` through
    ``x_hat`` (positive leaf orientation when they coincide).
    """
    p = [ctx.mpf(float(c)) for c in np.asarray(targets[hit.target], dtype=float) % 1.0]
    x_hat = hit.x_hat
    shift = np.floor(_to_float(x_hat) - _to_float(p) + 0.5)
    w = [xh - pc - int(sh) for xh, pc, sh in zip(x_hat, p, shift)]
    alpha = sum((wi * vi for wi, vi in zip(w, v_mp)), ctx.mpf(0))
    perp = [wi - alpha * vi for wi, vi in zip(w, v_mp)]
    perp_norm = float(ctx.sqrt(sum(c * c for c in perp)))
    if perp_norm > delta * (1 + 1e-12) or abs(alpha) > 2 * r * (1 + 1e-12):
        raise KeepAwayError("leaf disc F_2r(x_hat) misses the transversal disc", {"alpha": float(alpha), "offset": perp_norm})
    z = [xh - alpha * vi for xh, vi in zip(x_hat, v_mp)]
    sgn = 1 if alpha >= 0 else -1
    sigma = sgn * ctx.mpf(3 * r) - alpha
    x_next = _wrap_mp(ctx, [xh + sigma * vi for xh, vi in zip(x_hat, v_mp)])

    # endpoint checks: F_r(x_{n+1}) in F_4r(x_hat) and in V_{d,4r}(p) minus V_{d,2r}(p)
    tol = 1e-12 * r
    lead = float(alpha + sigma)  # leaf coordinate of x_{n+1} seen from p
    checks = {
        "in F_4r(x_hat)": abs(float(sigma)) + r <= 4 * r + tol,
        "in V_{d,4r}(p)": perp_norm <= delta and abs(lead) + r <= 4 * r + tol,
        "outside V_{d,2r}(p)": abs(lead) - r >= 2 * r - tol,
    }
    if not all(checks.values()):
        raise KeepAwayError("inclusion F_r(x_{n+1}) in F_4r(x_hat) and the annulus failed", checks)
    stage.tau = hit.tau
    stage.iterates = hit.iterates
    stage.target = hit.target
    stage.x_hat = x_hat
    stage.z = z
    stage.alpha = alpha
    stage.sigma = sigma
    return Stage(stage.n + 1, x_next)


@dataclass
class KeepAwayParams:
    r: float | None = None
    delta: float | None = None
    x0: Sequence[float] | None = None
    h: float = 1e-2
    t_max: float = 1e3
    max_stages: int = 20
    precision: str = "extended"


@dataclass
class KeepAwayResult:
    q: np.ndarray
    epsilon: float
    trace: KeepAwayTrace
    constants: Constants | None = None

    def to_dict(self) -> dict:
        out = {"q": self.q.tolist(), "epsilon": self.epsilon if math.isfinite(self.epsilon) else "inf"}
        out["trace"] = self.trace.to_dict()
        if self.constants is not None:
            out["constants"] = self.constants.to_dict()
        return out


def run_keepaway(
    system: ToralHyperbolicSystem,
    targets: Sequence,
    window: Window,
    params: KeepAwayParams | None = None,
) -> KeepAwayResult:
    """Point ``q`` in ``W`` whose forward orbit keeps ``delta/2`` away from every target."""
    params = params or KeepAwayParams()
    targets = [np.asarray(p, dtype=float) % 1.0 for p in targets]
    ctx = working_context(system, params.t_max, params.precision)
    v_mp = leaf_direction_mp(system, ctx)
    lam = _refined_lambda(system, ctx, v_mp)

    constants = None
    if params.r is None or params.delta is None or params.x0 is None:
        if targets:
            constants = choose_constants(system, targets, window)
            r, delta, x0f = constants.r, constants.delta, constants.x0
        else:
            r = min(system.injectivity_bound / 4.0, window.radius * (1 - 1e-9))
            delta, x0f = r / 2.0, np.asarray(window.center, float)
    else:
        r, delta, x0f = params.r, params.delta, np.asarray(params.x0, float)
    _check_radius(system, 4 * r, delta)

    x0 = _wrap_mp(ctx, [ctx.mpf(float(c)) for c in x0f])
    trace = KeepAwayTrace(system, x0, r, delta, [Stage(0, x0)], [ctx.mpf(0)], [ctx.mpf(r)], [0], ctx=ctx)
    if not targets:
        trace.q = x0
        trace.terminated_by = "no targets"
        trace.validation = {"ok": True, "min_distance": "inf", "samples": 0}
        return KeepAwayResult(_to_float(x0), math.inf, trace, constants)

    while True:
        stage = trace.stages[-1]
        elapsed = trace.times[-1]
        if stage.n >= params.max_stages:
            trace.terminated_by = "max_stages"
            break
        hit = first_hit_time(system, stage.x, r, delta, targets, params.t_max - elapsed, ctx)
        if hit is None:
            trace.terminated_by = "tau=inf"
            break
        nxt = keepaway_step(system, stage, hit, targets, r, delta, ctx, v_mp)
        k_total = trace.total_iterates[-1] + hit.iterates
        trace.total_iterates.append(k_total)
        # D_{n+1} = phi^{-T_{n+1}} F_r(x_{n+1}), in x0's leaf coordinate
        scale = lam ** (-k_total)
        trace.d_centers.append(trace.d_centers[-1] + stage.sigma * scale)
        trace.d_halflengths.append(ctx.mpf(r) * abs(scale))
        trace.stages.append(nxt)

    c = trace.d_centers[-1]
    trace.q = _wrap_mp(ctx, [x + c * vi for x, vi in zip(x0, v_mp)])
    trace.epsilon = delta / 2.0
    trace.validation = validate_orbit(system, trace.q, targets, r, delta, params.t_max, params.h, ctx)
    if not trace.validation["ok"]:
        raise KeepAwayError(
            f"orbit of q enters a target neighborhood at t = {trace.validation['first_violation']:g}",
            {"trace": trace, "validation": trace.validation},
        )
    return KeepAwayResult(_to_float(trace.q), trace.epsilon, trace, constants)


def _refined_lambda(system: ToralHyperbolicSystem, ctx, v_mp):
    # Rayleigh quotient on the high-precision eigenvector
    av = _step_mp(ctx, system.A, v_mp)
    return sum((a * b for a, b in zip(av, v_mp)), ctx.mpf(0))


def orbit_samples(system: ToralHyperbolicSystem, q, t_max: float, h: float, ctx=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Times, torus points and section heights of the orbit of ``q`` at step ``h``.

    Heights are zero for the map; for the suspension flow the point sits at
    fractional height ``frac(t * t_unit)`` above ``A^floor(t * t_unit) q``.
    """
    ctx = ctx or working_context(system, t_max)
    n_it = system.iterates(t_max) + 1
    pts = np.array([_to_float(p) for p in orbit_mp(system, ctx, q, n_it)])
    n_samples = int(math.floor(t_max / h + 1e-9)) + 1
    times = np.arange(n_samples) * h
    raw = times * system.t_unit
    idx = np.floor(raw + 1e-9).astype(int)
    heights = raw - idx if system.mode is Mode.SUSPENSION else np.zeros_like(raw)
    heights[heights < 1e-9] = 0.0
    return times, pts[idx], heights


def target_distances(system: ToralHyperbolicSystem, pts: np.ndarray, heights: np.ndarray, targets: Sequence) -> np.ndarray:
    """Distance from each sampled state to the nearest target (targets at height 0).

    In the suspension a state ``(x, s)`` is compared with the target both on
    its own sheet and, through ``(x, s) ~ (A x, s - 1)``, on the next one.
    """
    a = np.array(system.A, dtype=float)
    out = np.full(len(pts), np.inf)
    for p in targets:
        p = np.asarray(p, float) % 1.0
        dist = torus_distance(pts, p)
        if system.mode is Mode.SUSPENSION:
            below = np.sqrt(heights**2 + dist**2)
            above = np.sqrt((1 - heights) ** 2 + torus_distance((pts @ a.T) % 1.0, p) ** 2)
            dist = np.where(heights > 0, np.minimum(below, above), dist)
        out = np.minimum(out, dist)
    return out


def validate_orbit(system: ToralHyperbolicSystem, q, targets: Sequence, r: float, delta: float, t_max: float, h: float, ctx) -> dict:
    """Sample the orbit of ``q`` and check it avoids every ``V_{delta,r}(p_i)`` and keeps ``delta/2`` away."""
    eps = delta / 2.0
    times, pts, heights = orbit_samples(system, q, t_max, h, ctx)
    dist = target_distances(system, pts, heights, targets)
    in_box = np.zeros(len(pts), dtype=bool)
    v = system.leaf_direction
    for p in targets:
        w = centered(pts - np.asarray(p, float))
        alpha = w @ v
        off = np.linalg.norm(w - alpha[:, None] * v, axis=1)
        in_box |= (heights == 0) & (off <= delta) & (np.abs(alpha) <= r)
    bad = np.nonzero(in_box | (dist < eps))[0]
    return {
        "ok": bool(bad.size == 0),
        "epsilon": eps,
        "min_distance": float(dist.min()),
        "samples": int(len(times)),
        "t_max": t_max,
        "h": h,
        "first_violation": float(times[bad[0]]) if bad.size else None,
    }
