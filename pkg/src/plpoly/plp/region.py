"""Regions of the parametric LP and the geometry used to stitch them together.

Every region is a polyhedral cone with its apex at the normalization point,
so regions are stored over directions ``y = x - apex``: each frontier is a
primitive integer normal ``g`` with the region on the side ``g.y >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..core import Constraint, Polyhedron, Q, certified_signs, dyadic, primitive
from ..linalg import ONE, ZERO
from ..lp import LpStatus, float_simplex, maximize_exact, maximize_float


@dataclass(frozen=True)
class OptimalFunction:
    """Affine function ``coeffs.x + constant`` over the parameters."""

    coeffs: tuple
    constant: object

    def __call__(self, x):
        return sum((a * Q(v) for a, v in zip(self.coeffs, x)), self.constant)

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs)

    def as_constraint(self) -> Constraint:
        return Constraint(self.coeffs, self.constant)


@dataclass
class Region:
    """One optimal basis together with the cone of directions where it is optimal."""

    id: int
    basis: object
    #: minimized frontier normals, primitive integer tuples
    normals: tuple
    #: for every frontier, the nonbasic columns whose reduced cost it bounds
    columns: tuple
    optimum: OptimalFunction
    #: exact direction strictly inside the cone
    interior: tuple
    #: basic variable values, exact
    values: tuple = ()
    group: int = -1
    #: per frontier, a float direction just beyond it (task seeds)
    witnesses: tuple = ()
    #: per frontier, a float direction near the facet (optional hint)
    facet_hints: dict = field(default_factory=dict)
    apex: tuple = ()

    @property
    def dimension(self) -> int:
        return len(self.interior)

    @cached_property
    def keys(self) -> tuple:
        return tuple(tuple(int(v) for v in g) for g in self.normals)

    @cached_property
    def float_normals(self) -> np.ndarray:
        """Rows scaled to unit max-norm before rounding (see ``certified_signs``)."""
        d = self.dimension
        out = np.zeros((len(self.normals), d))
        for k, g in enumerate(self.normals):
            big = max(abs(v) for v in g)
            out[k] = [float(v / big) for v in g]
        return out

    def cone(self) -> Polyhedron:
        """The region over directions."""
        return Polyhedron(self.dimension, [Constraint(g, ZERO) for g in self.normals])

    def constraints(self) -> Polyhedron:
        """The region over parameters, ``g.(x - apex) >= 0``."""
        rows = []
        for g in self.normals:
            rows.append(Constraint(g, -sum((a * p for a, p in zip(g, self.apex)), ZERO)))
        return Polyhedron(self.dimension, rows)

    def contains(self, y, *, strict: bool = False) -> bool:
        y = [Q(v) for v in y]
        for g in self.normals:
            v = sum((a * b for a, b in zip(g, y)), ZERO)
            if v < 0 or (strict and v == 0):
                return False
        return True

    def frontier_of_column(self, col: int):
        for k, cols in enumerate(self.columns):
            if col in cols:
                return k
        return None


@dataclass
class Task:
    """A direction to examine, possibly seeded from a region's frontier."""

    direction: np.ndarray
    from_region: int | None = None
    from_frontier: int | None = None
    depth: int = 0

    def point(self, apex) -> np.ndarray:
        return np.array([float(a) for a in apex]) + self.direction


def key_of(g) -> tuple:
    return tuple(int(v) for v in primitive(g))


def opposite(key: tuple) -> tuple:
    return tuple(-v for v in key)


def normalize_direction(y) -> np.ndarray | None:
    """Scale to unit max-norm and round to a dyadic grid (exact in both worlds)."""
    y = np.asarray([float(v) for v in y])
    big = np.max(np.abs(y)) if y.size else 0.0
    if not np.isfinite(big) or big == 0.0:
        return None
    out = dyadic(y / big)
    return out if np.any(out) else None


def extract_region(reduced_objective: np.ndarray, nonbasic, n_vars: int):
    """Raw region rows and the optimal function from a reduced objective matrix.

    Returns ``(rows, optimum)`` where ``rows`` maps each nonbasic column with a
    nonzero parametric part to its normal over the parameters.
    """
    d = reduced_objective.shape[0] - 1
    rows = {}
    for j in nonbasic:
        if j >= n_vars:
            continue
        g = tuple(reduced_objective[:d, j])
        if any(g):
            rows[j] = g
    coeffs = tuple(-v for v in reduced_objective[:d, -1])
    return rows, OptimalFunction(coeffs, -reduced_objective[d, -1])


def group_frontiers(rows: dict):
    """Collapse columns sharing a normal direction: ``{key: [columns]}`` in column order."""
    out = {}
    for j in sorted(rows):
        out.setdefault(key_of(rows[j]), []).append(j)
    return out


def check_covered(regions, y, *, strict: bool = True):
    """Id of the first region whose cone holds direction ``y`` (strictly by default)."""
    y = np.asarray(y, dtype=float)
    yq = None
    for r in regions:
        if not len(r.normals):
            return r.id
        vals, sure = certified_signs(r.float_normals, y)
        if np.any(sure & (vals < 0)):
            continue
        if np.all(sure):
            if not strict or np.all(vals > 0):
                return r.id
            continue
        if yq is None:
            yq = [Q(float(v)) for v in y]
        if r.contains(yq, strict=strict):
            return r.id
    return None


class CoverIndex:
    """All region rows stacked into one matrix for a vectorized cover test."""

    def __init__(self):
        self._regions = []
        self._dirty = True
        self._G = None
        self._owner = None

    def add(self, region: Region):
        self._regions.append(region)
        self._dirty = True

    def __len__(self):
        return len(self._regions)

    def _rebuild(self):
        blocks = [r.float_normals for r in self._regions if len(r.normals)]
        owners = [np.full(len(r.normals), i) for i, r in enumerate(self._regions)
                  if len(r.normals)]
        d = self._regions[0].dimension if self._regions else 0
        self._G = np.vstack(blocks) if blocks else np.zeros((0, d))
        self._owner = np.concatenate(owners) if owners else np.zeros(0, dtype=int)
        self._dirty = False

    def find(self, y, *, strict: bool = True):
        if not self._regions:
            return None
        if self._dirty:
            self._rebuild()
        y = np.asarray(y, dtype=float)
        nreg = len(self._regions)
        vals, sure = certified_signs(self._G, y)
        bad = np.bincount(self._owner[sure & (vals < 0)], minlength=nreg) > 0
        yq = None
        for i in np.nonzero(~bad)[0]:
            r = self._regions[i]
            mask = self._owner == i
            v, s = vals[mask], sure[mask]
            if np.all(s):
                if not strict or np.all(v > 0):
                    return r.id
                continue
            if yq is None:
                yq = [Q(float(t)) for t in y]
            if r.contains(yq, strict=strict):
                return r.id
        return None


def add_extra_point(r1: Region, r2: Region) -> np.ndarray | None:
    """Direction halfway between the interior directions of two regions."""
    u1 = normalize_direction(r1.interior)
    u2 = normalize_direction(r2.interior)
    if u1 is None or u2 is None:
        return None
    return normalize_direction((u1 + u2) / 2)


def _dot(g, y):
    return sum((a * b for a, b in zip(g, y)), ZERO)


def facet_point(region: Region, k: int, *, float_solver=float_simplex):
    """Exact direction in the relative interior of frontier ``k``, or ``None``."""
    g = region.normals[k]
    others = [h for i, h in enumerate(region.normals) if i != k]
    hint = region.facet_hints.get(k)
    if hint is not None:
        f = [Q(float(v)) for v in hint]
        gg = _dot(g, g)
        t = _dot(g, f) / gg
        c = [fv - t * gv for fv, gv in zip(f, g)]
        if all(_dot(h, c) > 0 for h in others):
            return tuple(c)
    return _relint_lp(g, others, [], float_solver=float_solver)


def _relint_lp(g, rows_a, rows_b, *, float_solver=float_simplex):
    """Maximize the smallest slack over ``rows_a + rows_b`` on the hyperplane ``g.y = 0``."""
    d = len(g)
    rows = list(rows_a) + list(rows_b)
    G, h = [], []
    for r in rows:
        G.append([-a for a in r] + [ONE])
        h.append(ZERO)
    for i in range(d):
        e = [ZERO] * (d + 1)
        e[i] = ONE
        G.append(e)
        h.append(ONE)
        e = [ZERO] * (d + 1)
        e[i] = -ONE
        G.append(e)
        h.append(ONE)
    e = [ZERO] * (d + 1)
    e[d] = ONE
    G.append(e)
    h.append(ONE)
    c = [ZERO] * d + [ONE]
    E = [list(g) + [ZERO]]
    # a clear float margin only needs its point confirmed exactly
    fs, fz, fv = maximize_float([float(v) for v in c],
                                [[float(v) for v in row] for row in G],
                                [float(v) for v in h], [[float(v) for v in E[0]]], [0.0])
    if fs is LpStatus.OPTIMAL and fv > 1e-9:
        y = [Q(float(v)) for v in fz[:d]]
        t = _dot(g, y) / _dot(g, g)
        y = [a - t * b for a, b in zip(y, g)]
        if all(_dot(r, y) > 0 for r in rows):
            return tuple(y)
    status, z, value = maximize_exact(c, G, h, E, [ZERO], float_solver=float_solver)
    if status is not LpStatus.OPTIMAL or value <= 0:
        return None
    return tuple(z[:d])


def facets_overlap(r1: Region, k1: int, r2: Region, k2: int, *, c1=None,
                   float_solver=float_simplex) -> bool:
    """Whether two opposite frontiers share a piece of positive measure."""
    if r1.keys[k1] != opposite(r2.keys[k2]):
        return False
    others1 = [h for i, h in enumerate(r1.normals) if i != k1]
    others2 = [h for i, h in enumerate(r2.normals) if i != k2]
    if c1 is not None and all(_dot(h, c1) > 0 for h in others2):
        return True
    return _relint_lp(r1.normals[k1], others1, others2, float_solver=float_solver) is not None
