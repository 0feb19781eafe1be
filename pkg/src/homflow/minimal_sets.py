"""Minimal-set proxies from omega-limit sets, and the inductive catalog.

A long orbit segment is scanned for near-returns ``A^p x ~ x``.  Each
near-return is closed exactly: ``(A^p - I) y = m`` for the integer vector
``m`` nearest to ``(A^p - I) x`` has the rational solution ``y``, a genuine
periodic point shadowing the segment.  Its orbit is the candidate minimal
set, with coordinates known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import keepaway as ka
from . import lattice
from . import rational as rq


@dataclass
class MinimalSetApprox:
    points: np.ndarray
    residual: float
    eta: float
    exact_points: list[tuple[Fraction, ...]] | None = None
    period: int | None = None
    defect: float | None = None
    shadowing_distance: float | None = None

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "exact_points": [[rq.fraction_str(c) for c in p] for p in self.exact_points] if self.exact_points else None,
            "period": self.period,
            "invariance_residual": self.residual,
            "eta": self.eta,
            "closing_defect": self.defect,
            "shadowing_distance": self.shadowing_distance,
        }


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between finite subsets of the torus."""
    a = np.atleast_2d(a) % 1.0
    b = np.atleast_2d(b) % 1.0
    da, _ = cKDTree(b, boxsize=1.0).query(a)
    db, _ = cKDTree(a, boxsize=1.0).query(b)
    return float(max(da.max(), db.max()))


def set_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest distance between a point of ``a`` and a point of ``b``."""
    da, _ = cKDTree(np.atleast_2d(b) % 1.0, boxsize=1.0).query(np.atleast_2d(a) % 1.0)
    return float(da.min())


def invariance_residual(system: ka.ToralHyperbolicSystem, cloud: np.ndarray) -> float:
    # one rescaled time unit of the map is A^floor(t_unit); the cloud lives in the section
    k = max(system.iterates_per_unit, 1)
    img = cloud % 1.0
    a = np.array(system.A, dtype=float)
    for _ in range(k):
        img = (img @ a.T) % 1.0
    return hausdorff(cloud, img)


def _exact_orbit(a, y: tuple[Fraction, ...]) -> list[tuple[Fraction, ...]]:
    am = rq.as_matrix(a)
    orbit = [y]
    while True:
        nxt = tuple(v - math.floor(v) for v in rq.matvec(am, list(orbit[-1])))
        if nxt == y:
            return orbit
        orbit.append(nxt)


def close_orbit(system: ka.ToralHyperbolicSystem, x: np.ndarray, p: int) -> tuple[tuple[Fraction, ...], float]:
    """Exact periodic point of period dividing ``p`` nearest the near-return at ``x``."""
    d = system.d
    ap = rq.matpow(rq.as_matrix(system.A), p)
    m = [[ap[i][j] - (1 if i == j else 0) for j in range(d)] for i in range(d)]
    mf = np.array([[float(v) for v in row] for row in m])
    target = np.rint(mf @ x)
    y = rq.matvec(rq.inverse(m), [Fraction(int(v)) for v in target])
    y = tuple(v - math.floor(v) for v in y)
    dist = float(ka.torus_distance(np.array([float(v) for v in y]), x))
    return y, dist


def omega_limit_minimal(
    system: ka.ToralHyperbolicSystem,
    q,
    eta: float = 1e-3,
    t_obs: float = 200.0,
    p_max: int = 7,
    closing_radius: float = 0.05,
    avoid: Sequence[MinimalSetApprox] = (),
    separation: float = 1e-2,
    precision: str = "extended",
) -> MinimalSetApprox:
    """Approximate a minimal subset of the omega-limit set of ``q``.

    Candidates are ranked by return defect and closed exactly; the first
    whose orbit stays ``separation`` away from every set in ``avoid`` wins.
    Without any admissible near-return the sampled tail itself is returned
    together with its (typically larger) invariance residual.
    """
    ctx = ka.working_context(system, t_obs, precision)
    n = system.iterates(t_obs)
    start = n // 2
    orbit = ka.orbit_mp(system, ctx, q, n + p_max)
    xs = np.array([ka._to_float(x) for x in orbit])
    candidates = []
    for p in range(1, p_max + 1):
        seg = xs[start : n + 1]
        ret = xs[start + p : n + 1 + p]
        defect = ka.torus_distance(ret, seg)
        for i in np.argsort(defect)[:8]:
            if defect[i] <= closing_radius:
                candidates.append((float(defect[i]), p, int(start + i)))
    candidates.sort()
    seen: set[tuple[Fraction, ...]] = set()
    for defect, p, i in candidates:
        y, dist = close_orbit(system, xs[i], p)
        if y in seen:
            continue
        exact = sorted(_exact_orbit(system.A, y))
        seen.update(exact)
        cloud = np.array([[float(c) for c in pt] for pt in exact])
        if any(set_distance(cloud, other.points) < separation for other in avoid):
            continue
        return MinimalSetApprox(
            points=cloud,
            residual=invariance_residual(system, cloud),
            eta=eta,
            exact_points=exact,
            period=len(exact),
            defect=defect,
            shadowing_distance=dist,
        )
    tail = xs[start : n + 1]
    return MinimalSetApprox(points=tail, residual=invariance_residual(system, tail), eta=eta)


@dataclass
class CatalogParams:
    eta: float = 1e-3
    separation: float = 1e-2
    window_radius: float = 0.05
    t_keepaway: float = 200.0
    max_stages: int = 20
    budget: int = 60
    seed: int = 0
    precision: str = "extended"


@dataclass
class MinimalSetCatalog:
    sets: list[MinimalSetApprox]
    separations: list[list[float]]
    target: int
    complete: bool
    attempts: int
    failures: list[str] = field(default_factory=list)
    params: CatalogParams | None = None

    def to_dict(self) -> dict:
        return {
            "count": len(self.sets),
            "target": self.target,
            "complete": self.complete,
            "partial": not self.complete,
            "attempts": self.attempts,
            "separation_threshold": self.params.separation if self.params else None,
            "eta": self.params.eta if self.params else None,
            "hausdorff_separations": self.separations,
            "min_separation": min((v for i, row in enumerate(self.separations) for v in row[i + 1 :]), default=None),
            "sets": [s.to_dict() for s in self.sets],
            "failures": self.failures,
        }


def _origin_set(system: ka.ToralHyperbolicSystem, eta: float) -> MinimalSetApprox:
    zero = tuple(Fraction(0) for _ in range(system.d))
    pts = np.zeros((1, system.d))
    return MinimalSetApprox(pts, invariance_residual(system, pts), eta, [zero], 1, 0.0, 0.0)


def enumerate_minimal_sets(system: ka.ToralHyperbolicSystem, k: int, params: CatalogParams | None = None) -> MinimalSetCatalog:
    """Grow a catalog of pairwise separated minimal sets, starting from the fixed point 0.

    Each round runs the keep-away construction against one representative
    of every set found so far and extracts a new set from the resulting
    orbit.  Windows are drawn from a generator seeded by ``params.seed``,
    so the catalog is deterministic.
    """
    if k < 1:
        raise ValueError("count must be at least 1")
    params = params or CatalogParams()
    rng = np.random.default_rng(params.seed)
    sets = [_origin_set(system, params.eta)]
    failures: list[str] = []
    attempts = 0
    while len(sets) < k and attempts < params.budget:
        attempts += 1
        center = rng.random(system.d)
        window = ka.Window(center, params.window_radius)
        targets = [s.points[0] for s in sets]
        try:
            res = ka.run_keepaway(
                system,
                targets,
                window,
                ka.KeepAwayParams(t_max=params.t_keepaway, max_stages=params.max_stages, precision=params.precision),
            )
        except (ka.KeepAwayError, ka.PreconditionError, ka.GeometryError) as exc:
            failures.append(f"attempt {attempts}: {exc}")
            continue
        new = omega_limit_minimal(
            system,
            res.trace.q,
            params.eta,
            params.t_keepaway,
            avoid=sets,
            separation=params.separation,
            precision=params.precision,
        )
        if new.exact_points is None or new.residual > 2 * params.eta:
            failures.append(f"attempt {attempts}: no closed orbit within tolerance")
            continue
        if any(hausdorff(new.points, s.points) < params.separation for s in sets):
            failures.append(f"attempt {attempts}: duplicate set")
            continue
        sets.append(new)
    seps = [[hausdorff(a.points, b.points) if a is not b else 0.0 for b in sets] for a in sets]
    return MinimalSetCatalog(sets, seps, k, len(sets) >= k, attempts, failures, params)


def periodic_orbit_oracle(a: Sequence[Sequence[int]], period: int) -> set[tuple[Fraction, ...]]:
    """Exact points of minimal period ``period`` from the integer lattice of ``A^p - I``."""
    pts = set(lattice.periodic_points(a, period))
    for q in range(1, period):
        if period % q == 0:
            pts -= set(lattice.periodic_points(a, q))
    return pts


def check_against_oracle(a: Sequence[Sequence[int]], s: MinimalSetApprox, max_denominator: int = 50) -> dict:
    """Compare an extracted periodic orbit with the exact enumeration."""
    if s.exact_points is None or s.period is None:
        return {"checked": False}
    oracle = periodic_orbit_oracle(a, s.period)
    denominators = [c.denominator for p in s.exact_points for c in p]
    return {
        "checked": True,
        "period": s.period,
        "in_oracle": all(p in oracle for p in s.exact_points),
        "max_denominator": max(denominators),
        "denominator_ok": max(denominators) <= max_denominator,
    }
