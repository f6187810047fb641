"""Redundancy removal by ray tracing, with exact escalation.

The float pass works on the binary64 mirror of a polyhedron.  Rays shot from
an interior point toward every constraint settle most rows at once: the
first hyperplane a ray crosses bounds the polyhedron.  Rows left open are
decided by an LP that searches for an irredundancy witness.

:func:`minimize_exact` re-checks every float verdict in rational arithmetic,
so its answer is exact; :func:`farkas_minimize` is the slow reference that
uses nothing but Farkas certificates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import FloatPolyhedron, Polyhedron, Q, float_to_rational_point
from .errors import NoInterior
from .lp import (FEASIBILITY_THRESHOLD, FarkasCertificate, LpStatus, entailment,
                 float_simplex, maximize_exact, maximize_float)
from .linalg import ZERO

_TINY = 1e-12


@dataclass
class MinimizationResult:
    #: indices of the rows kept, ascending
    irredundant: tuple
    #: row index -> point violating that row only
    witnesses: dict = field(default_factory=dict)
    #: rows the float pass could not settle; dropped from the float answer
    uncertain: frozenset = frozenset()
    #: row index -> point on the row's hyperplane reached by a ray (float pass)
    facet_points: dict = field(default_factory=dict)
    #: row index -> Farkas certificate against the rows still present (exact pass)
    certificates: dict = field(default_factory=dict)
    interior: object = None
    exact: bool = False

    def apply(self, poly: Polyhedron) -> Polyhedron:
        return poly.subset(self.irredundant)


def _rows_as_le(p: FloatPolyhedron, rows):
    """``a.x + b >= 0`` rows rewritten as ``-a.x <= b`` for the LP helpers."""
    rows = list(rows)
    return -p.A[rows], p.b[rows]


def interior_point(p: FloatPolyhedron, *, tol: float = FEASIBILITY_THRESHOLD) -> np.ndarray:
    """Point maximizing the smallest normalized slack (capped at 1)."""
    d = p.dimension
    if len(p) == 0:
        return np.zeros(d)
    n = p.normalized()
    G = np.hstack([-n.A, np.ones((len(p), 1))])
    G = np.vstack([G, np.eye(d + 1)[-1:]])
    h = np.concatenate([n.b, [1.0]])
    if _is_cone(p):
        # a cone is as thin at scale 1 as anywhere: measure it in the unit box
        box = np.hstack([np.vstack([np.eye(d), -np.eye(d)]), np.zeros((2 * d, 1))])
        G = np.vstack([G, box])
        h = np.concatenate([h, np.ones(2 * d)])
    c = np.zeros(d + 1)
    c[-1] = 1.0
    status, z, value = maximize_float(c, G, h)
    if status is not LpStatus.OPTIMAL or value <= tol:
        raise NoInterior("polyhedron has no interior point in binary64")
    x = z[:d]
    if np.min(p.normalized().slacks(x)) <= tol:
        raise NoInterior("float interior point failed its own slack test")
    return x


def exact_interior_point(poly: Polyhedron, *, float_solver=float_simplex) -> tuple:
    """Rational point satisfying every row strictly.

    The float Chebyshev center is tried first (coarsely rounded, then as is);
    an exact LP decides when both fail.
    """
    if poly.unsatisfiable:
        raise NoInterior("unsatisfiable polyhedron")
    d = poly.dimension
    if len(poly) == 0:
        return tuple(ZERO for _ in range(d))
    try:
        xf = interior_point(poly.float_mirror)
    except NoInterior:
        xf = None
    if xf is not None:
        for cand in (_round_nicely(xf), float_to_rational_point(xf)):
            if poly.contains(cand, strict=True):
                return cand
    # exact: maximize s with a.x + b >= s, s <= 1
    G = [[-a for a in r.coeffs] + [Q(1)] for r in poly.rows] + [[ZERO] * d + [Q(1)]]
    h = [r.constant for r in poly.rows] + [Q(1)]
    status, z, value = maximize_exact([ZERO] * d + [Q(1)], G, h, float_solver=float_solver)
    if status is not LpStatus.OPTIMAL or value <= 0:
        raise NoInterior("polyhedron has an empty interior")
    return tuple(z[:d])


def _round_nicely(x) -> tuple:
    """Small-denominator rational near ``x`` (keeps downstream numbers short)."""
    return tuple(Q(Fraction(float(v)).limit_denominator(64)) for v in x)


def _is_cone(p: FloatPolyhedron) -> bool:
    return bool(len(p)) and not np.any(p.b)


def _witness_search(p: FloatPolyhedron, i: int, others, *, tol: float, method: str):
    """(point, value of row i at point) or (None, None) when no point exists."""
    d = p.dimension
    others = [j for j in others if j != i]
    ai, bi = p.A[i], p.b[i]
    if method == "shift":
        # row i at most -1, maximize the smallest slack of the others (capped)
        G_o, h_o = _rows_as_le(p, others)
        G = np.vstack([np.hstack([G_o, np.ones((len(others), 1))]),
                       np.concatenate([ai, [0.0]])[None, :],
                       np.eye(d + 1)[-1:]])
        h = np.concatenate([h_o, [-bi - 1.0], [1.0]])
        c = np.zeros(d + 1)
        c[-1] = 1.0
        status, z, s = maximize_float(c, G, h, tol=tol)
        if status is not LpStatus.OPTIMAL or s < -_TINY:
            return None, None
        x = z[:d]
        return x, float(ai @ x + bi)
    G_o, h_o = _rows_as_le(p, others)
    G = np.vstack([G_o, ai[None, :]])
    h = np.concatenate([h_o, [-bi]])
    status, x, value = maximize_float(-ai, G, h, tol=tol)
    if status is LpStatus.UNBOUNDED:
        G = np.vstack([G, -ai[None, :]])
        h = np.concatenate([h, [bi + 1.0]])
        status, x, value = maximize_float(-ai, G, h, tol=tol)
    if status is not LpStatus.OPTIMAL:
        return None, None
    return x, float(ai @ x + bi)


def witness_point(p: FloatPolyhedron, i: int, *, others=None, method: str = "auto",
                  tol: float = FEASIBILITY_THRESHOLD):
    """Float point violating row ``i`` by more than ``tol`` and satisfying the others.

    ``method`` is ``"optimize"`` (push as far past row ``i`` as the others
    allow), ``"shift"`` (cones only: move row ``i`` inward by one unit and
    look for a feasible point) or ``"auto"``.  Returns ``None`` when no such
    point is found, i.e. the row is presumed redundant.
    """
    if not 0 <= i < len(p):
        raise IndexError(i)
    if others is None:
        others = range(len(p))
    if method == "auto":
        method = "shift" if _is_cone(p) else "optimize"
    x, value = _witness_search(p, i, others, tol=tol, method=method)
    if x is None or value > -tol:
        return None
    return x


def ray_trace_minimize(p: FloatPolyhedron, *, interior=None,
                       tol: float = FEASIBILITY_THRESHOLD,
                       witness_lps: bool = True) -> MinimizationResult:
    """Float minimization: first-hit rays, then witness LPs for the rest.

    With ``witness_lps=False`` only the ray pass runs and rows it did not
    reach are reported as uncertain.
    """
    n = len(p)
    if n == 0:
        return MinimizationResult((), interior=interior)
    q = interior_point(p, tol=tol) if interior is None else np.asarray(interior, float)
    P = p.normalized()
    s = P.slacks(q)
    if np.min(s) <= 0:
        raise NoInterior("supplied point is not interior")
    witnesses, facets = {}, {}
    irredundant = set()
    # rates[j, i]: speed at which row j's slack falls along the ray toward row i
    rates = P.A @ P.A.T
    with np.errstate(divide="ignore", invalid="ignore"):
        hits = np.where(rates > _TINY, s[:, None] / rates, np.inf)
    for i in range(n):
        col = hits[:, i]
        order = np.argsort(col, kind="stable")
        j = int(order[0])
        t1 = col[j]
        t2 = col[order[1]] if n > 1 else np.inf
        if not np.isfinite(t1) or t2 - t1 <= tol * max(1.0, t1):
            continue
        tw = (t1 + t2) / 2 if np.isfinite(t2) else t1 + max(1.0, t1)
        ray = -P.A[i]
        w = q + tw * ray
        sw = P.slacks(w)
        if sw[j] >= -tol or np.any(np.delete(sw, j) < -_TINY):
            continue
        if j not in irredundant:
            irredundant.add(j)
            witnesses[j] = w
            facets[j] = q + t1 * ray
    redundant, uncertain = set(), set()
    method = "shift" if _is_cone(p) else "optimize"
    for i in range(n):
        if i in irredundant:
            continue
        if not witness_lps:
            uncertain.add(i)
            continue
        others = [j for j in range(n) if j != i and j not in redundant]
        x, value = _witness_search(p, i, others, tol=tol, method=method)
        if x is not None and value <= -tol:
            irredundant.add(i)
            witnesses[i] = x
        elif x is not None and value < -_TINY:
            uncertain.add(i)
        else:
            redundant.add(i)
    return MinimizationResult(tuple(sorted(irredundant)), witnesses, frozenset(uncertain),
                              facets, interior=q)


def _ray_witness(poly: Polyhedron, i: int, ray, interior) -> tuple:
    """Turn a homogeneous Farkas ray into an affine point violating row ``i``."""
    *zx, z0 = ray
    if z0 > 0:
        pt = tuple(v / z0 for v in zx)
        if poly.rows[i].evaluate(pt) < 0:
            return pt
    r = poly.rows[i]
    rate = sum((a * v for a, v in zip(r.coeffs, zx)), ZERO)
    if rate >= 0:
        return None
    tau = r.evaluate(interior) / -rate + 1
    return tuple(qv + tau * v for qv, v in zip(interior, zx))


def _exact_witness_ok(poly: Polyhedron, i: int, pt) -> bool:
    for j, r in enumerate(poly.rows):
        v = r.evaluate(pt)
        if (j == i and v >= 0) or (j != i and v < 0):
            return False
    return True


def _record(certificates, i, rows, cert, n):
    full = [ZERO] * n
    for j, m in zip(rows, cert.multipliers):
        full[j] = m
    certificates[i] = FarkasCertificate(tuple(full), cert.slack)


def _first_hit(poly: Polyhedron, base, interior, pt):
    """Walk from the interior point toward ``pt``; ``(row, witness)`` if one row is hit first.

    ``base`` holds the row values at the interior point.  A unique first row
    is a facet: points just past it violate that row alone.
    """
    hits = []
    for j, r in enumerate(poly.rows):
        v = r.evaluate(pt)
        if v < 0:
            hits.append((base[j] / (base[j] - v), j))
    if not hits:
        return None
    hits.sort()
    t1, j = hits[0]
    if len(hits) > 1 and hits[1][0] == t1:
        return None
    t = (t1 + hits[1][0]) / 2 if len(hits) > 1 else Q(1)
    w = tuple(q + t * (p - q) for q, p in zip(interior, pt))
    return j, w


def _settle_fully(poly, i, present, irredundant, witnesses, certificates, interior,
                  float_solver):
    others = sorted(present - {i})
    ent = entailment(poly.rows[i], [poly.rows[j] for j in others], float_solver=float_solver)
    if ent.entailed:
        present.discard(i)
        _record(certificates, i, others, ent.certificate, len(poly))
        return
    irredundant.add(i)
    pt = _ray_witness(poly, i, ent.ray, interior)
    if pt is not None:
        witnesses[i] = pt


def minimize_exact(poly: Polyhedron, *, interior=None, float_solver=float_simplex,
                   trust_float: bool = True) -> MinimizationResult:
    """Exact minimization, using the float pass only as a fast guide.

    Float witnesses are kept when they survive a rational check.  Every other
    row is tested for entailment by the facets known so far; when it is not
    entailed, the exact segment from the interior point to a violating point
    names a new facet.  Ties fall back to a Farkas test against every row
    still present, so the answer never depends on binary64 rounding.
    Raises ``NoInterior`` if the polyhedron has an empty interior.
    """
    n = len(poly)
    if interior is None:
        interior = exact_interior_point(poly, float_solver=float_solver)
    if n == 0:
        return MinimizationResult((), interior=interior, exact=True)
    witnesses, facets = {}, {}
    irredundant = set()
    if trust_float:
        try:
            # witness LPs have one row per constraint; the Farkas tests
            # below have one per coordinate, so leave the rest to them
            fl = ray_trace_minimize(poly.float_mirror,
                                    interior=np.array([float(v) for v in interior]),
                                    witness_lps=False)
        except NoInterior:
            fl = None
        if fl is not None:
            for i, w in fl.witnesses.items():
                pt = float_to_rational_point(w)
                if _exact_witness_ok(poly, i, pt):
                    irredundant.add(i)
                    witnesses[i] = pt
                    if i in fl.facet_points:
                        facets[i] = fl.facet_points[i]
    present = set(range(n))
    certificates = {}
    base = [r.evaluate(interior) for r in poly.rows]
    for i in range(n):
        if i in irredundant:
            continue
        while True:
            # test against the known facets first; usually they suffice
            known = sorted(irredundant)
            ent = entailment(poly.rows[i], [poly.rows[j] for j in known],
                             float_solver=float_solver)
            if ent.entailed:
                _record(certificates, i, known, ent.certificate, n)
                present.discard(i)
                break
            pt = _ray_witness(poly, i, ent.ray, interior)
            found = _first_hit(poly, base, interior, pt) if pt is not None else None
            if found is None:
                _settle_fully(poly, i, present, irredundant, witnesses, certificates,
                              interior, float_solver)
                break
            j, w = found
            irredundant.add(j)
            witnesses[j] = w
            if j == i:
                break
    return MinimizationResult(tuple(sorted(irredundant)), witnesses, frozenset(), facets,
                              certificates, interior=interior, exact=True)


def farkas_minimize(poly: Polyhedron, *, float_solver=float_simplex) -> MinimizationResult:
    """Reference minimizer: drop each row entailed by the rows still present."""
    n = len(poly)
    present = set(range(n))
    certificates = {}
    for i in range(n):
        others = sorted(present - {i})
        ent = entailment(poly.rows[i], [poly.rows[j] for j in others],
                         float_solver=float_solver)
        if ent.entailed:
            present.discard(i)
            full = [ZERO] * n
            for j, m in zip(others, ent.certificate.multipliers):
                full[j] = m
            certificates[i] = FarkasCertificate(tuple(full), ent.certificate.slack)
    return MinimizationResult(tuple(sorted(present)), certificates=certificates, exact=True)


def minimize(poly: Polyhedron, **kwargs) -> Polyhedron:
    """Minimized copy of ``poly`` (exact)."""
    if poly.unsatisfiable:
        return poly
    try:
        res = minimize_exact(poly, **kwargs)
    except NoInterior:
        res = farkas_minimize(poly)
    return res.apply(poly)
