"""Worklist solver for the parametric LP, plus projection and hull front ends."""
from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..checkers import (AdjacencyTable, SweepReport, adjacency_sweep, flat_region_check,
                        verify_feasible_basis)
from ..core import Constraint, Polyhedron, Q
from ..degeneracy import explore_degeneracy
from ..errors import ConsistencyError, NoInterior
from ..linalg import ZERO, qmatmul
from ..lp import FEASIBILITY_THRESHOLD, BasisPartition, LpStatus, float_simplex, solve_exact
from ..minimize import interior_point, minimize, minimize_exact
from .problem import PlpProblem, construct_hull, construct_projection
from .region import (CoverIndex, Region, Task, add_extra_point, extract_region, facet_point,
                     facets_overlap, group_frontiers, normalize_direction, opposite)

log = logging.getLogger(__name__)

_FLAT = -1
_DISCARDED = -2


@dataclass
class PlpConfig:
    n_initial: int = 1
    seed: int = 0
    tol: float = FEASIBILITY_THRESHOLD
    #: float LP solver; swapped for a fault injector in tests
    float_solver: Callable = float_simplex
    #: how many generations of extra points a failed adjacency may spawn
    extra_point_depth: int = 2
    sweep: bool = True
    max_tasks: int = 200_000


@dataclass
class PlpStats:
    tasks: int = 0
    covered: int = 0
    float_solves: int = 0
    exact_solves: int = 0
    rejected_bases: int = 0
    flat_regions: int = 0
    discarded_bases: int = 0
    extra_points: int = 0
    degenerate_optima: int = 0
    sweep: SweepReport | None = None


def _reduce(plp: PlpProblem, basic, reduced_rows) -> np.ndarray:
    """Objective in nonbasic terms, from the row-reduced constraint matrix."""
    return plp.objective_matrix - qmatmul(plp.objective_matrix[:, list(basic)], reduced_rows)


def build_region(plp: PlpProblem, basis: BasisPartition, check, *, region_id: int = 0,
                 group: int = -1, float_solver=float_simplex, stats: PlpStats | None = None):
    """Region of a verified feasible basis, minimized exactly; ``None`` if flat."""
    reduced = _reduce(plp, basis.basic, check.reduced)
    rows, optimum = extract_region(reduced, basis.nonbasic, plp.n_vars)
    if optimum(plp.apex) != 1:
        raise ConsistencyError("optimal function is not normalized at the apex")
    d = plp.n_params
    groups = group_frontiers(rows)
    keys = list(groups)
    cone = Polyhedron(d, [Constraint(k, ZERO) for k in keys])
    if not keys:
        return Region(region_id, basis, (), (), optimum, tuple(ZERO for _ in range(d)),
                      tuple(check.values), group, (), {}, plp.apex)
    try:
        interior_point(cone.float_mirror)
        res = minimize_exact(cone, float_solver=float_solver)
    except NoInterior:
        fc = flat_region_check(cone, float_solver=float_solver)
        if fc.flat:
            if stats is not None:
                stats.flat_regions += 1
            return None
        kept = [keys.index(tuple(int(v) for v in r.coeffs)) for r in fc.minimized.rows]
        sub = cone.subset(kept)
        res = minimize_exact(sub, float_solver=float_solver, trust_float=False)
        res.irredundant = tuple(kept[i] for i in res.irredundant)
        res.witnesses = {kept[i]: w for i, w in res.witnesses.items()}
        res.facet_points = {}
    normals, columns, witnesses, hints = [], [], [], {}
    for new_k, k in enumerate(res.irredundant):
        normals.append(tuple(Q(v) for v in keys[k]))
        columns.append(tuple(groups[keys[k]]))
        w = res.witnesses.get(k)
        witnesses.append(normalize_direction(w) if w is not None else None)
        if k in res.facet_points:
            hints[new_k] = res.facet_points[k]
    return Region(region_id, basis, tuple(normals), tuple(columns), optimum,
                  tuple(res.interior), tuple(check.values), group, tuple(witnesses), hints,
                  plp.apex)


def standalone_builder(plp: PlpProblem):
    """Region builder with its own id counter, for use outside a solver."""
    counter = iter(range(1 << 30))

    def build(basis):
        chk = verify_feasible_basis(plp.constraint_matrix, basis.basic)
        if not chk:
            return None
        return build_region(plp, basis, chk, region_id=next(counter))
    return build


class PlpSolver:
    """Explores parameter space region by region until every frontier is accounted for."""

    def __init__(self, plp: PlpProblem, config: PlpConfig | None = None):
        self.plp = plp
        self.config = config or PlpConfig()
        self.regions: list[Region] = []
        self.table = AdjacencyTable()
        self.stats = PlpStats()
        self.by_basis: dict = {}
        self.groups: dict = {}
        self._by_key: dict = {}
        self._cover = CoverIndex()
        self.worklist: deque = deque()
        self.rng = random.Random(self.config.seed)

    # --- tasks ---------------------------------------------------------

    def initial_tasks(self) -> list:
        d = self.plp.n_params
        apex = np.array([float(a) for a in self.plp.apex])
        points = [np.ones(d)]
        for _ in range(self.config.n_initial):
            points.append(np.array([self.rng.randint(-50, 50) for _ in range(d)], dtype=float))
        tasks = []
        for x in points:
            y = normalize_direction(x - apex)
            if y is None:
                y = normalize_direction(np.ones(d))
            tasks.append(Task(y))
        return tasks

    def run(self) -> "PlpSolver":
        if self.plp.n_params == 0:
            return self
        self.worklist.extend(self.initial_tasks())
        while self.worklist and self.stats.tasks < self.config.max_tasks:
            self.process(self.worklist.popleft())
        if self.config.sweep:
            self.stats.sweep = adjacency_sweep(self)
        return self

    def process(self, task: Task):
        self.stats.tasks += 1
        if task.from_region is not None and self.table.flag(task.from_region, task.from_frontier):
            return
        rid = self._cover.find(task.direction)
        if rid is None:
            rid = self.discover(task.direction)
            if rid is None:
                return
        else:
            self.stats.covered += 1
        if task.from_region is None or rid == task.from_region:
            return
        if self.cross_frontier(rid, task.from_region, task.from_frontier):
            return
        if task.depth < self.config.extra_point_depth:
            y = add_extra_point(self.regions[rid], self.regions[task.from_region])
            if y is not None:
                self.stats.extra_points += 1
                self.worklist.append(Task(y, task.from_region, task.from_frontier,
                                          task.depth + 1))

    # --- discovering regions ---------------------------------------------

    def discover(self, y) -> int | None:
        """Id of a region containing direction ``y``, creating regions as needed."""
        self.stats.float_solves += 1
        try:
            res = self.config.float_solver(self.plp.lp_float(y))
        except Exception as exc:  # the float side is never trusted
            log.debug("float solver failed: %s", exc)
            res = None
        if res is not None and res.status is LpStatus.OPTIMAL and res.basis is not None:
            basic = res.basis.basic
            if len(basic) == self.plp.n_rows and all(0 <= j < self.plp.n_vars for j in basic):
                chk = verify_feasible_basis(self.plp.constraint_matrix, basic)
                if chk:
                    rid = self._adopt(BasisPartition.from_basic(basic, self.plp.n_vars), chk, y)
                    if rid is not None:
                        return rid
                else:
                    self.stats.rejected_bases += 1
            else:
                self.stats.rejected_bases += 1
        return self.discover_exact([Q(float(v)) for v in y])

    def discover_exact(self, y) -> int | None:
        self.stats.exact_solves += 1
        res = solve_exact(self.plp.lp_exact(y), float_solver=self.config.float_solver)
        if res.status is not LpStatus.OPTIMAL:
            raise ConsistencyError(f"parametric LP is {res.status.value} at a parameter point")
        chk = verify_feasible_basis(self.plp.constraint_matrix, res.basis.basic)
        if not chk:
            raise ConsistencyError("exact optimal basis failed verification")
        return self._adopt(res.basis, chk, y)

    def _adopt(self, basis: BasisPartition, chk, y) -> int | None:
        key = basis.key
        known = self.by_basis.get(key)
        if known is not None and known >= 0:
            if self.regions[known].contains(y):
                return known
            return self._locate(self.regions[known].optimum, y)
        if known is not None:
            return None if known == _FLAT else self._locate_from_basis(basis, chk, y)
        reduced = _reduce(self.plp, basis.basic, chk.reduced)
        _, optimum = extract_region(reduced, basis.nonbasic, self.plp.n_vars)
        if optimum in self.groups:
            self.by_basis[key] = _DISCARDED
            self.stats.discarded_bases += 1
            return self._locate(optimum, y)
        zero = [j for j, v in zip(basis.basic, chk.values) if v == 0]
        group = len(self.groups)
        if zero:
            self.stats.degenerate_optima += 1
        # even without degeneracy another vertex may share this optimum
        result = explore_degeneracy(self.plp, basis, zero, build=self._builder(group))
        for ra, ka, rb, kb in result.links:
            self.try_link(ra.id, ka, rb.id, kb)
        members = result.regions
        if not members:
            self.by_basis[key] = _FLAT
            return None
        return self._locate(optimum, y)

    def _locate_from_basis(self, basis, chk, y):
        reduced = _reduce(self.plp, basis.basic, chk.reduced)
        _, optimum = extract_region(reduced, basis.nonbasic, self.plp.n_vars)
        return self._locate(optimum, y)

    def _locate(self, optimum, y) -> int | None:
        members = self.groups.get(optimum, [])
        for strict in (True, False):
            for rid in members:
                if self.regions[rid].contains(y, strict=strict):
                    return rid
        return None

    def _builder(self, group: int):
        def build(basis: BasisPartition):
            key = basis.key
            known = self.by_basis.get(key)
            if known is not None:
                return self.regions[known] if known >= 0 else None
            chk = verify_feasible_basis(self.plp.constraint_matrix, basis.basic)
            if not chk:
                return None
            region = build_region(self.plp, basis, chk, region_id=len(self.regions),
                                  group=group, float_solver=self.config.float_solver,
                                  stats=self.stats)
            if region is None:
                self.by_basis[key] = _FLAT
                return None
            # a second basis describing the very same cone is an alias
            for rid in self.groups.get(region.optimum, []):
                if set(self.regions[rid].keys) == set(region.keys):
                    self.by_basis[key] = rid
                    return self.regions[rid]
            self._insert(region)
            return region
        return build

    def _insert(self, region: Region):
        rid = region.id
        self.regions.append(region)
        self.by_basis[region.basis.key] = rid
        self.groups.setdefault(region.optimum, []).append(rid)
        self.table.register(rid, len(region.normals))
        for k, key in enumerate(region.keys):
            self._by_key.setdefault(key, []).append((rid, k))
        self._cover.add(region)
        for k, w in enumerate(region.witnesses):
            if w is not None:
                self.worklist.append(Task(w, rid, k))

    # --- adjacency -------------------------------------------------------

    def try_link(self, ra: int, ka: int, rb: int, kb: int) -> bool:
        r1, r2 = self.regions[ra], self.regions[rb]
        if (rb, kb) in self.table.neighbours(ra, ka):
            return True
        if not facets_overlap(r1, ka, r2, kb, float_solver=self.config.float_solver):
            return False
        self.table.link((ra, ka), (rb, kb))
        return True

    def cross_frontier(self, r_curr: int, r_from: int, k_from: int) -> bool:
        """Record adjacency if ``r_curr`` has the frontier facing ``k_from``."""
        want = opposite(self.regions[r_from].keys[k_from])
        for rid, k in self._by_key.get(want, []):
            if rid == r_curr and self.try_link(r_from, k_from, rid, k):
                return True
        return False

    def resolve_frontier(self, rid: int, k: int) -> list:
        """Find (computing if necessary) a neighbour across frontier ``k`` of ``rid``."""
        region = self.regions[rid]
        c = facet_point(region, k, float_solver=self.config.float_solver)
        if c is None:
            raise LookupError(f"frontier {k} of region {rid} has no relative interior")
        want = opposite(region.keys[k])
        for rb, kb in list(self._by_key.get(want, [])):
            if facets_overlap(region, k, self.regions[rb], kb, c1=c,
                              float_solver=self.config.float_solver):
                self.table.link((rid, k), (rb, kb))
                return []
        before = len(self.regions)
        g = region.normals[k]
        if self._pivot_across(region, k, c):
            for rb, kb in list(self._by_key.get(want, [])):
                if facets_overlap(region, k, self.regions[rb], kb, c1=c,
                                  float_solver=self.config.float_solver):
                    self.table.link((rid, k), (rb, kb))
                    return list(range(before, len(self.regions)))
        others = [h for i, h in enumerate(region.normals) if i != k]
        rng = random.Random(rid * 7919 + k)
        for attempt in range(6):
            if attempt:
                # the previous facet point may sit on a lower-dimensional
                # feature of the far side; move it randomly within the facet
                c = _jiggle(c, g, others, rng)
            eta = Q(1) / (8 * max(abs(v) for v in g))
            for _ in range(6):
                y = tuple(ci - eta * gi for ci, gi in zip(c, g))
                rb = next((r.id for r in self.regions if r.contains(y, strict=True)), None)
                if rb is None:
                    rb = self.discover_exact(y)
                if rb is not None and rb != rid:
                    for rb2, kb in list(self._by_key.get(want, [])):
                        if facets_overlap(region, k, self.regions[rb2], kb, c1=c,
                                          float_solver=self.config.float_solver):
                            self.table.link((rid, k), (rb2, kb))
                            return list(range(before, len(self.regions)))
                eta /= 8
        raise LookupError(f"no neighbour found across frontier {k} of region {rid}")

    def _pivot_across(self, region: Region, k: int, c) -> bool:
        """Adopt the bases one exact pivot away through frontier ``k``'s columns."""
        M = self.plp.constraint_matrix
        basic = list(region.basis.basic)
        chk = verify_feasible_basis(M, basic)
        if not chk:
            return False
        g = region.normals[k]
        y = tuple(ci - gi / (8 * max(abs(v) for v in g)) for ci, gi in zip(c, g))
        moved = False
        for j in region.columns[k]:
            ratios = [(chk.values[i] / chk.reduced[i, j], basic[i], i)
                      for i in range(len(basic)) if chk.reduced[i, j] > 0]
            if not ratios:
                continue
            nb = list(basic)
            nb[min(ratios)[2]] = j
            nchk = verify_feasible_basis(M, nb)
            if nchk:
                self._adopt(BasisPartition.from_basic(nb, self.plp.n_vars), nchk, y)
                moved = True
        return moved

    # --- results ---------------------------------------------------------

    def optimal_functions(self) -> list:
        return list(self.groups)

    def polyhedron(self) -> Polyhedron:
        d = self.plp.n_params
        rows = [f.as_constraint() for f in self.groups if not f.is_constant]
        poly = Polyhedron(d, rows)
        if len(poly) == 0:
            return poly
        return minimize(poly, float_solver=self.config.float_solver).normalized()


def _jiggle(c, g, others, rng):
    """Random exact point of the facet ``g.y = 0`` near ``c``, still off the other rows."""
    d = len(c)
    gg = sum((v * v for v in g), ZERO)
    scale = max(abs(v) for v in c) or Q(1)
    step = scale / 4
    for _ in range(60):
        u = [Q(rng.randint(-1000, 1000)) / 1000 for _ in range(d)]
        t = sum((a * b for a, b in zip(u, g)), ZERO) / gg
        u = [a - t * b for a, b in zip(u, g)]
        cand = tuple(ci + step * ui for ci, ui in zip(c, u))
        if all(sum((a * b for a, b in zip(h, cand)), ZERO) > 0 for h in others):
            return cand
        step /= 2
    return c


@dataclass
class PlpSolution:
    polyhedron: Polyhedron
    regions: list
    solver: PlpSolver | None = None
    plp: PlpProblem | None = None

    @property
    def stats(self):
        return self.solver.stats if self.solver else PlpStats()


def solve(plp: PlpProblem, n_initial: int = 1, config: PlpConfig | None = None):
    """Regions and output polyhedron of a parametric LP."""
    config = config or PlpConfig(n_initial=n_initial)
    solver = PlpSolver(plp, config).run()
    return solver.regions, solver.polyhedron()


def project(poly: Polyhedron, eliminate, config: PlpConfig | None = None) -> PlpSolution:
    """Projection of ``poly`` onto the coordinates not in ``eliminate`` (0-based).

    The result lives in the space of the kept coordinates, in their original
    order.
    """
    eliminate = sorted(set(int(e) for e in eliminate))
    plp = construct_projection(poly, eliminate)
    if plp.n_params == 0:
        return PlpSolution(Polyhedron(0, []), [], None, plp)
    solver = PlpSolver(plp, config).run()
    return PlpSolution(solver.polyhedron(), solver.regions, solver, plp)


def convex_hull(p1: Polyhedron, p2: Polyhedron, config: PlpConfig | None = None) -> PlpSolution:
    """Closed convex hull of two polyhedra, one of which needs an interior point."""
    try:
        plp = construct_hull(p1, p2)
    except NoInterior:
        plp = construct_hull(p2, p1)
    solver = PlpSolver(plp, config).run()
    return PlpSolution(solver.polyhedron(), solver.regions, solver, plp)
