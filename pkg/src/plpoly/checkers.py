"""Exact checks that make the float-guided solver trustworthy.

Nothing the binary64 simplex says is taken at face value: bases are
re-derived and checked in rational arithmetic, regions that look flat in
binary64 get a second opinion, witness points are re-evaluated exactly and a
final sweep crosses every frontier that never found its neighbour.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import FloatPolyhedron, Polyhedron, Q, Constraint
from .errors import NoInterior
from .lp import (FEASIBILITY_THRESHOLD, BasisPartition, LpProblem, LpResult, LpStatus,
                 float_simplex, maximize_exact)
from .linalg import ZERO, reconstruct_objective, row_echelon
from .minimize import exact_interior_point, farkas_minimize, interior_point


class AdjacencyTable:
    """Symmetric record of which frontiers have found a neighbour.

    A frontier may border several regions on its far side, so every entry
    holds a set of ``(region id, frontier index)`` pairs; the frontier's flag
    is true once the set is nonempty.
    """

    def __init__(self):
        self._entries = {}

    def register(self, region_id: int, n_frontiers: int):
        for k in range(n_frontiers):
            self._entries.setdefault((region_id, k), set())

    def link(self, a: tuple, b: tuple):
        self._entries.setdefault(a, set()).add(b)
        self._entries.setdefault(b, set()).add(a)

    def flag(self, region_id: int, frontier: int) -> bool:
        return bool(self._entries.get((region_id, frontier)))

    def neighbours(self, region_id: int, frontier: int) -> list:
        return sorted(self._entries.get((region_id, frontier), ()))

    def missing(self) -> list:
        return sorted(k for k, v in self._entries.items() if not v)

    def is_symmetric(self) -> bool:
        return all(k in self._entries.get(o, ()) for k, v in self._entries.items() for o in v)

    def __len__(self):
        return len(self._entries)

    def items(self):
        return self._entries.items()


class BasisVerdict(enum.Enum):
    VERIFIED = "verified"
    INFEASIBLE = "infeasible"
    NOT_A_BASIS = "not-a-basis"


@dataclass
class BasisCheck:
    verdict: BasisVerdict
    #: basic values in the order of ``basic`` (exact), when verified
    values: tuple = ()
    #: ``M`` row-reduced on the basic columns, rows in the order of ``basic`` (exact), when verified
    reduced: np.ndarray | None = None

    def __bool__(self):
        return self.verdict is BasisVerdict.VERIFIED


def verify_feasible_basis(M: np.ndarray, basic: Sequence[int]) -> BasisCheck:
    """Row-reduce ``M`` (constraints, right-hand side last) on the basic columns; check signs."""
    basic = list(basic)
    if any(not 0 <= j < M.shape[1] - 1 for j in basic):
        raise IndexError("basic column out of range")
    if len(set(basic)) != len(basic):
        return BasisCheck(BasisVerdict.NOT_A_BASIS)
    ech = row_echelon(M, basic)
    if ech.missing:
        return BasisCheck(BasisVerdict.NOT_A_BASIS)
    R = ech.matrix
    r = len(basic)
    for i in range(r, R.shape[0]):
        if any(R[i, :-1]) or R[i, -1] != 0:
            # a leftover row: either dependent with a nonzero right-hand side
            # or not reduced by the chosen columns; neither is a feasible basis
            return BasisCheck(BasisVerdict.INFEASIBLE if not any(R[i, :-1])
                              else BasisVerdict.NOT_A_BASIS)
    values = tuple(R[i, -1] for i in range(r))
    if any(v < 0 for v in values):
        return BasisCheck(BasisVerdict.INFEASIBLE, values)
    return BasisCheck(BasisVerdict.VERIFIED, values, R[:r])


class FlatVerdict(enum.Enum):
    FLAT = "flat"
    NON_FLAT = "non-flat"


@dataclass
class FlatCheck:
    verdict: FlatVerdict
    minimized: Polyhedron | None = None
    interior: tuple | None = None

    @property
    def flat(self) -> bool:
        return self.verdict is FlatVerdict.FLAT


def flat_region_check(region: Polyhedron, *, delta=1, float_solver=float_simplex) -> FlatCheck:
    """Decide exactly whether a region that looked flat in binary64 really is.

    Every row is tightened by ``delta``; an empty result means the region has
    no interior.  Otherwise the region is minimized with Farkas certificates.
    """
    delta = Q(delta)
    shifted = Polyhedron(region.dimension,
                         [Constraint(r.coeffs, r.constant - delta) for r in region.rows])
    d = region.dimension
    G = [[-a for a in r.coeffs] for r in shifted.rows]
    h = [r.constant for r in shifted.rows]
    if shifted.unsatisfiable:
        return FlatCheck(FlatVerdict.FLAT)
    status, z, _ = maximize_exact([ZERO] * d, G, h, float_solver=float_solver)
    if status is LpStatus.INFEASIBLE:
        return FlatCheck(FlatVerdict.FLAT)
    res = farkas_minimize(region, float_solver=float_solver)
    return FlatCheck(FlatVerdict.NON_FLAT, res.apply(region), tuple(z))


def float_judges_flat(p: FloatPolyhedron, tol: float = FEASIBILITY_THRESHOLD) -> bool:
    try:
        interior_point(p, tol=tol)
    except NoInterior:
        return True
    return False


def verify_witness(p: Polyhedron, i: int, w, *, tol: float = FEASIBILITY_THRESHOLD) -> bool:
    """Exact check that ``w`` violates row ``i`` by at least ``tol`` and no other row."""
    wq = [Q(float(v)) if isinstance(v, (float, np.floating)) else Q(v) for v in w]
    for j, r in enumerate(p.rows):
        v = r.evaluate(wq)
        if j == i:
            if v > -Q(tol):
                return False
        elif v < 0:
            return False
    return True


@dataclass
class SweepReport:
    recovered: list = field(default_factory=list)
    rounds: int = 0
    crossings: int = 0
    unresolved: list = field(default_factory=list)


def adjacency_sweep(solver, *, max_rounds: int = 1000) -> SweepReport:
    """Cross every frontier whose neighbour is unknown until none is left.

    ``solver`` must offer ``table`` (an :class:`AdjacencyTable`), ``regions``
    and ``resolve_frontier(region_id, frontier) -> list of new region ids``;
    the latter raises ``LookupError`` when the neighbour cannot be found.
    """
    report = SweepReport()
    stuck = set()
    while report.rounds < max_rounds:
        todo = [key for key in solver.table.missing() if key not in stuck]
        if not todo:
            break
        report.rounds += 1
        found = len(report.recovered)
        for rid, k in todo:
            if solver.table.flag(rid, k):
                continue
            report.crossings += 1
            try:
                report.recovered.extend(solver.resolve_frontier(rid, k))
            except LookupError:
                stuck.add((rid, k))
        if len(report.recovered) > found:
            # new regions may be the missing neighbours of stuck frontiers
            stuck.clear()
    report.unresolved = sorted(stuck)
    return report


class FaultInjector:
    """Float solver wrapper that corrupts a fraction of its answers.

    ``mode`` is ``"wrong-basis"`` (replace the basis by a random column set),
    ``"premature"`` (stop phase two after a few pivots) or ``"mixed"``.
    """

    def __init__(self, rate: float = 0.3, mode: str = "mixed", seed: int = 0):
        self.rate = rate
        self.mode = mode
        self.rng = random.Random(seed)
        self.injected = 0
        self.calls = 0

    def __call__(self, problem: LpProblem) -> LpResult:
        self.calls += 1
        if self.rng.random() >= self.rate:
            return float_simplex(problem)
        self.injected += 1
        mode = self.mode
        if mode == "mixed":
            mode = self.rng.choice(["wrong-basis", "premature"])
        if mode == "premature":
            return float_simplex(problem, stop_after=self.rng.randint(0, 2))
        m, n = problem.shape
        basic = self.rng.sample(range(n), min(m, n))
        return LpResult(LpStatus.OPTIMAL, BasisPartition.from_basic(basic, n))


def audit(solver) -> list:
    """Recompute every region from scratch in rationals; list the discrepancies."""
    from .plp.region import extract_region, group_frontiers  # plp imports this module

    plp = solver.plp
    problems = []
    for r in solver.regions:
        basic = list(r.basis.basic)
        chk = verify_feasible_basis(plp.constraint_matrix, basic)
        if not chk:
            problems.append(f"region {r.id}: basis {chk.verdict.value}")
            continue
        if tuple(chk.values) != tuple(r.values):
            problems.append(f"region {r.id}: basic values differ")
        reduced = reconstruct_objective(plp.constraint_matrix, plp.objective_matrix, basic)
        rows, opt = extract_region(reduced, r.basis.nonbasic, plp.n_vars)
        if opt != r.optimum:
            problems.append(f"region {r.id}: optimal function differs")
        if opt(plp.apex) != 1:
            problems.append(f"region {r.id}: optimum is {opt(plp.apex)} at the apex")
        groups = group_frontiers(rows)
        if not set(r.keys) <= set(groups):
            problems.append(f"region {r.id}: frontier not among reduced-cost rows")
        lam = [ZERO] * plp.n_vars
        for j, v in zip(basic, chk.values):
            lam[j] = v
        if any(v < 0 for v in lam):
            problems.append(f"region {r.id}: negative multiplier")
        full = Polyhedron(r.dimension, [Constraint(g, ZERO) for g in rows.values()])
        try:
            exact_interior_point(full)
        except NoInterior:
            problems.append(f"region {r.id}: empty interior")
    if not solver.table.is_symmetric():
        problems.append("adjacency table is not symmetric")
    for key in solver.table.missing():
        problems.append(f"frontier {key} has no neighbour")
    return problems
