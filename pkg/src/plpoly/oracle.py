"""Independent reference computations and the random instance generator.

The projection oracle is plain Fourier-Motzkin elimination with certified
redundancy removal; it shares no geometry with the parametric engine.  Its
LPs may be guided by the float simplex, but every answer they return carries
an exactly verified certificate.
"""
from __future__ import annotations

import itertools
import random
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .checkers import verify_feasible_basis
from .core import Constraint, Polyhedron, Q, primitive
from .errors import NoInterior, OracleLimit
from .linalg import ONE, ZERO, qzeros
from .lp import BasisPartition, LpProblem, LpStatus, entailment, maximize_exact, solve_exact
from .minimize import exact_interior_point, minimize
from .plp.region import extract_region, group_frontiers
from .plp.solver import _reduce, project

#: Intermediate row cap for Fourier-Motzkin elimination.
FM_ROW_LIMIT = 20_000


def fourier_motzkin(p: Polyhedron, eliminate, *, order=None,
                    max_rows: int = FM_ROW_LIMIT) -> Polyhedron:
    """Exact projection onto the coordinates outside ``eliminate`` (0-based).

    Variables are eliminated one at a time, cheapest pairing first unless
    ``order`` is given, and the intermediate system is minimized after each
    step; every kept row has an exact witness point and every dropped row an
    exact Farkas certificate.  The result lives in the kept coordinates, in
    their original order.
    """
    eliminate = sorted(set(int(e) for e in eliminate))
    if any(not 0 <= e < p.dimension for e in eliminate):
        raise IndexError("eliminated index out of range")
    if order is not None and sorted(order) != eliminate:
        raise ValueError("order must be a permutation of the eliminated indices")
    rows = list(p.normalized().rows)
    unsat = p.unsatisfiable
    todo = list(order) if order is not None else list(eliminate)
    # an interior point of the input stays interior to every projection step
    try:
        inner = exact_interior_point(p) if not unsat else None
    except NoInterior:
        inner = None
    while todo:
        if order is None:
            todo.sort(key=lambda v: (sum(r.coeffs[v] > 0 for r in rows)
                                     * sum(r.coeffs[v] < 0 for r in rows), v))
        e = todo.pop(0)
        pos = [r for r in rows if r.coeffs[e] > 0]
        neg = [r for r in rows if r.coeffs[e] < 0]
        out = [r for r in rows if r.coeffs[e] == 0]
        if len(out) + len(pos) * len(neg) > max_rows:
            raise OracleLimit(f"elimination of x{e + 1} would produce "
                              f"{len(out) + len(pos) * len(neg)} rows")
        for a, b in itertools.product(pos, neg):
            ca, cb = a.coeffs[e], -b.coeffs[e]
            out.append(Constraint([cb * u + ca * v for u, v in zip(a.coeffs, b.coeffs)],
                                  cb * a.constant + ca * b.constant))
        step = Polyhedron(p.dimension, out, unsatisfiable=unsat).normalized()
        if step.unsatisfiable:
            unsat = True
            rows = []
            break
        rows = list(minimize(step, interior=inner).rows if inner is not None
                    else minimize(step).rows)
    kept = [j for j in range(p.dimension) if j not in set(eliminate)]
    proj = [Constraint([r.coeffs[j] for j in kept], r.constant) for r in rows]
    return Polyhedron(len(kept), proj, unsatisfiable=unsat)


@dataclass
class EqualityVerdict:
    equal: bool
    #: point of one polyhedron outside the other, when not equal
    witness: tuple | None = None
    #: ``"a"`` if the witness lies in ``a`` but not ``b``, ``"b"`` otherwise
    inside: str | None = None
    #: the row the witness violates
    violated: Constraint | None = None

    def __bool__(self):
        return self.equal


def _is_empty(p: Polyhedron) -> bool:
    if p.unsatisfiable:
        return True
    G = [[-a for a in r.coeffs] for r in p.rows]
    h = [r.constant for r in p.rows]
    status, _, _ = maximize_exact([ZERO] * p.dimension, G, h)
    return status is LpStatus.INFEASIBLE


def _separating_point(holder: Polyhedron, row: Constraint):
    """Exact point of ``holder`` violating ``row``."""
    d = holder.dimension
    G = [[-a for a in r.coeffs] for r in holder.rows] + [list(row.coeffs)]
    h = [r.constant for r in holder.rows] + [-row.constant - 1]
    status, z, _ = maximize_exact([ZERO] * d, G, h)
    if status is LpStatus.OPTIMAL:
        return z
    # the violation is smaller than one unit: maximize it instead
    status, z, val = maximize_exact([-a for a in row.coeffs], G[:-1], h[:-1])
    return z if status is LpStatus.OPTIMAL else None


def poly_equal(a: Polyhedron, b: Polyhedron) -> EqualityVerdict:
    """Geometric equality by mutual Farkas entailment of every row."""
    if a.dimension != b.dimension:
        raise ValueError("polyhedra live in different dimensions")
    ea, eb = _is_empty(a), _is_empty(b)
    if ea or eb:
        if ea and eb:
            return EqualityVerdict(True)
        holder, side = (b, "b") if ea else (a, "a")
        z = _separating_point(holder, Constraint([ZERO] * a.dimension, -ONE))
        return EqualityVerdict(False, z, side)
    for holder, other, side in ((b, a, "b"), (a, b, "a")):
        for row in other.rows:
            ent = entailment(row, holder.rows)
            if not ent.entailed:
                return EqualityVerdict(False, _separating_point(holder, row), side, row)
    return EqualityVerdict(True)


def contains(outer: Polyhedron, inner: Polyhedron) -> bool:
    """Exact ``inner`` subset of ``outer`` (``inner`` assumed nonempty)."""
    return all(entailment(r, inner.rows).entailed
               for r in outer.rows)


# --- random instances --------------------------------------------------------

@dataclass(frozen=True)
class GeneratorParams:
    constraints: int
    variables: int
    projection_ratio: float
    density: float
    seed: int = 0

    def __post_init__(self):
        if self.constraints < 1 or self.variables < 1:
            raise ValueError("need at least one constraint and one variable")
        if not 0 < self.projection_ratio <= 1:
            raise ValueError("projection ratio must be in (0, 1]")
        if not 0 <= self.density < 1:
            raise ValueError("density must be in [0, 1)")

    @property
    def n_eliminated(self) -> int:
        k = int(round(self.projection_ratio * self.variables))
        return min(self.variables, max(1, k))

    @property
    def eliminated(self) -> tuple:
        """The last ``n_eliminated`` coordinates (0-based)."""
        return tuple(range(self.variables - self.n_eliminated, self.variables))


COEFF_RANGE = 50


def generate(params: GeneratorParams) -> Polyhedron:
    """Random polyhedron with a known interior point.

    Each coefficient is zero with probability ``density`` and otherwise a
    uniform nonzero integer in [-50, 50]; constants are chosen so a random
    integer point satisfies every row with slack between 1 and 50.
    """
    rng = random.Random(params.seed)
    nonzero = [v for v in range(-COEFF_RANGE, COEFF_RANGE + 1) if v]
    z = [rng.randint(-5, 5) for _ in range(params.variables)]
    rows = []
    for _ in range(params.constraints):
        while True:
            a = [0 if rng.random() < params.density else rng.choice(nonzero)
                 for _ in range(params.variables)]
            if any(a):
                break
        b = -sum(ai * zi for ai, zi in zip(a, z)) + rng.randint(1, COEFF_RANGE)
        rows.append(Constraint(a, b))
    return Polyhedron(params.variables, rows)


# --- region geometry checks ----------------------------------------------------

def interiors_disjoint(rows_a, rows_b) -> bool:
    """Whether two cones ``{g.y >= 0}`` have disjoint interiors (exact).

    By Gordan's alternative the joint strict system has no solution iff some
    nonzero nonnegative combination of all the normals vanishes.
    """
    rows = [list(g) for g in rows_a] + [list(g) for g in rows_b]
    if not rows:
        return False
    # opposite normals (up to scale) separate the cones outright
    keys_a = {primitive(g) for g in rows_a}
    if any(tuple(-v for v in primitive(g)) in keys_a for g in rows_b):
        return True
    d = len(rows[0])
    A = qzeros(d + 1, len(rows))
    for i, g in enumerate(rows):
        for k in range(d):
            A[k, i] = Q(g[k])
        A[d, i] = ONE
    b = np.array([ZERO] * d + [ONE], dtype=object)
    res = solve_exact(LpProblem(A, b, np.array([ZERO] * len(rows), dtype=object)))
    return res.status is LpStatus.OPTIMAL


def _full_dimensional(rows, d) -> bool:
    if not rows:
        return True
    try:
        exact_interior_point(Polyhedron(d, [Constraint(g, ZERO) for g in rows]))
        return True
    except NoInterior:
        return False


def cone_covered(cone, pieces, d: int | None = None) -> bool:
    """Exact test that the cone ``{g.y >= 0 for g in cone}`` lies in the union of ``pieces``.

    Works by splitting the cone along the rows of a piece that meets its
    interior and recursing on the leftovers; lower-dimensional leftovers are
    ignored (the union of closed cones is closed).
    """
    cone = [tuple(Q(v) for v in g) for g in cone]
    pieces = [[tuple(Q(v) for v in g) for g in p] for p in pieces]
    if d is None:
        d = len(cone[0]) if cone else len(pieces[0][0])
    return _cover(cone, pieces, d)


def _cover(cone, pieces, d) -> bool:
    if not _full_dimensional(cone, d):
        return True
    poly = Polyhedron(d, [Constraint(g, ZERO) for g in cone])
    for idx, piece in enumerate(pieces):
        if not _full_dimensional(cone + piece, d):
            continue
        if all(entailment(Constraint(g, ZERO), poly.rows).entailed
               for g in piece):
            return True
        rest = pieces[:idx] + pieces[idx + 1:]
        prefix = []
        for g in piece:
            flipped = tuple(-v for v in g)
            if not _cover(cone + prefix + [flipped], rest, d):
                return False
            prefix.append(g)
        return True
    return False


def enumerate_optimal_bases(plp, optimum) -> list:
    """Every feasible basis whose optimal function is ``optimum`` and whose region is full.

    Exhaustive over column subsets; meant for instances with few variables.
    Returns ``(basic columns, region normals)`` pairs.
    """

    out = []
    n, m = plp.n_vars, plp.n_rows
    for basic in itertools.combinations(range(n), m):
        chk = verify_feasible_basis(plp.constraint_matrix, basic)
        if not chk:
            continue
        part = BasisPartition.from_basic(basic, n)
        rows, opt = extract_region(_reduce(plp, basic, chk.reduced), part.nonbasic, n)
        if opt != optimum:
            continue
        normals = list(group_frontiers(rows))
        if _full_dimensional(normals, plp.n_params):
            out.append((basic, normals))
    return out


# --- benchmarking ----------------------------------------------------------------

@dataclass
class BenchRecord:
    seed: int
    seconds: list
    regions: int
    faces: int
    oracle: str = "skipped"


@dataclass
class BenchReport:
    params: GeneratorParams
    records: list = field(default_factory=list)

    @property
    def mean_seconds(self) -> float:
        return statistics.fmean(statistics.fmean(r.seconds) for r in self.records)

    def lines(self) -> list:
        p = self.params
        out = [f"config cn={p.constraints} vn={p.variables} pr={p.projection_ratio:g} "
               f"d={p.density:g} instances={len(self.records)} "
               f"mean_seconds={self.mean_seconds:.6f}"]
        for r in self.records:
            out.append(f"instance seed={r.seed} mean_seconds={statistics.fmean(r.seconds):.6f} "
                       f"regions={r.regions} faces={r.faces} oracle={r.oracle}")
        return out


def bench(params: GeneratorParams, *, instances: int = 10, repeats: int = 5,
          oracle: bool = False, config=None) -> BenchReport:
    """Time the projection engine on ``instances`` random polyhedra."""

    report = BenchReport(params)
    for i in range(instances):
        inst = GeneratorParams(params.constraints, params.variables, params.projection_ratio,
                               params.density, params.seed + i)
        poly = generate(inst)
        times = []
        sol = None
        for _ in range(repeats):
            t0 = time.perf_counter()
            sol = project(poly, inst.eliminated, config)
            times.append(time.perf_counter() - t0)
        verdict = "skipped"
        if oracle:
            try:
                ref = fourier_motzkin(poly, inst.eliminated)
                verdict = "equal" if poly_equal(sol.polyhedron, ref) else "DIFFERENT"
            except OracleLimit:
                verdict = "oracle-limit"
        report.records.append(BenchRecord(inst.seed, times, len(sol.regions),
                                          len(sol.polyhedron), verdict))
    return report
