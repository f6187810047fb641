import dataclasses
import random
from itertools import combinations

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from plpoly.checkers import (AdjacencyTable, BasisVerdict, FaultInjector, adjacency_sweep,
                             audit, flat_region_check, float_judges_flat,
                             verify_feasible_basis, verify_witness)
from plpoly.core import Constraint, Polyhedron, Q
from plpoly.linalg import qmatrix
from plpoly.lp import LpStatus, rational_simplex
from plpoly.minimize import farkas_minimize
from plpoly.oracle import GeneratorParams, generate
from plpoly.plp import PlpConfig, PlpSolver, construct_projection


def _clean_instance(four_rows):
    return construct_projection(four_rows, [1])


def test_basis_from_exact_solve_is_verified(four_rows):
    plp = _clean_instance(four_rows)
    res = rational_simplex(plp.lp_exact([Q(1)]))
    assert res.status is LpStatus.OPTIMAL
    chk = verify_feasible_basis(plp.constraint_matrix, res.basis.basic)
    assert chk.verdict is BasisVerdict.VERIFIED
    assert all(v >= 0 for v in chk.values)


def test_slightly_negative_basic_value_is_infeasible():
    M = qmatrix([[1, 0, 1, 1], [0, 1, 1, Q(-1) / 10**9]])
    chk = verify_feasible_basis(M, [0, 1])
    assert chk.verdict is BasisVerdict.INFEASIBLE
    assert chk.values[1] == Q(-1) / 10**9


def test_dependent_columns_are_not_a_basis():
    M = qmatrix([[1, 1, 0, 2], [2, 2, 1, 4]])
    assert verify_feasible_basis(M, [0, 1]).verdict is BasisVerdict.NOT_A_BASIS
    assert verify_feasible_basis(M, [0, 0]).verdict is BasisVerdict.NOT_A_BASIS


def test_inconsistent_zero_row_is_infeasible():
    M = qmatrix([[1, 0, 1], [2, 0, 3]])
    assert verify_feasible_basis(M, [0]).verdict is BasisVerdict.INFEASIBLE


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**40))
def test_basis_check_matches_sympy_solution(seed):
    rng = random.Random(seed)
    m, n = rng.randint(1, 3), rng.randint(2, 5)
    M = [[rng.randint(-3, 3) for _ in range(n + 1)] for _ in range(m)]
    for basic in combinations(range(n), m):
        B = sympy.Matrix([[M[i][j] for j in basic] for i in range(m)])
        chk = verify_feasible_basis(qmatrix(M), basic)
        if B.det() == 0:
            assert chk.verdict is not BasisVerdict.VERIFIED
            continue
        x = B.LUsolve(sympy.Matrix([M[i][n] for i in range(m)]))
        feasible = all(v >= 0 for v in x)
        assert bool(chk) == feasible
        if feasible:
            assert [Q(f"{v.p}/{v.q}") for v in x] == list(chk.values)


def test_near_ten_cone_is_flat_in_floats_only():
    cone = Polyhedron(2, [Constraint([Q("100000001/10000000"), -1], 0),
                          Constraint([-10, 1], 0)])
    assert float_judges_flat(cone.float_mirror)
    chk = flat_region_check(cone)
    assert not chk.flat
    assert len(chk.minimized) == 2
    assert cone.contains(chk.interior, strict=True)


def test_zero_width_slab_is_flat():
    slab = Polyhedron.from_matrix([[-1, 0], [1, 0]], [0, 0])
    assert flat_region_check(slab).flat


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**40))
def test_full_cones_are_not_flat(seed):
    rng = random.Random(seed)
    d = rng.randint(2, 4)
    center = [rng.randint(-5, 5) for _ in range(d)]
    center[0] = 7
    rows = []
    for _ in range(rng.randint(1, 6)):
        g = [rng.randint(-4, 4) for _ in range(d)]
        if sum(a * b for a, b in zip(g, center)) <= 0:
            g = [-a for a in g]
        if any(g) and sum(a * b for a, b in zip(g, center)) > 0:
            rows.append(Constraint(g, 0))
    if not rows:
        return
    cone = Polyhedron(d, rows)
    chk = flat_region_check(cone)
    assert not chk.flat
    ref = farkas_minimize(cone).apply(cone)
    assert set(chk.minimized.rows) == set(ref.rows)


def test_wedge_vertex_confirmed(wedge):
    assert verify_witness(wedge, 2, (3.5, 3.5))


def test_point_on_hyperplane_rejected(wedge):
    assert not verify_witness(wedge, 2, (Q(2), Q("3/2")))


def test_tiny_margin_rejected(wedge):
    w = (Q(2), Q("3/2") + Q(1) / (2 * 10**9))
    assert wedge[2].nonstrict().evaluate(w) == Q(-1) / 10**9
    assert not verify_witness(wedge, 2, w)


def test_table_is_symmetric():
    t = AdjacencyTable()
    t.register(0, 2)
    t.register(1, 1)
    t.link((0, 1), (1, 0))
    assert t.flag(1, 0) and t.flag(0, 1) and not t.flag(0, 0)
    assert t.missing() == [(0, 0)]
    assert t.is_symmetric()


def test_complete_table_needs_no_recovery(square):
    plp = construct_projection(square, [1])
    solver = PlpSolver(plp).run()
    assert not solver.table.missing()
    report = adjacency_sweep(solver)
    assert report.recovered == [] and report.crossings == 0


def _without_optimum(solver, victim):
    """A fresh solver holding every region but those of one optimum, with no adjacency."""
    out = PlpSolver(solver.plp, solver.config)
    for r in solver.regions:
        if r.optimum == victim:
            continue
        out._insert(dataclasses.replace(r, id=len(out.regions)))
        group = list(out.groups).index(r.optimum)
        out.regions[-1].group = group
    out.worklist.clear()
    return out


def test_sweep_recovers_a_deleted_region():
    poly = generate(GeneratorParams(9, 4, 0.5, 0.0, seed=21))
    solver = PlpSolver(construct_projection(poly, [2, 3])).run()
    optima = [f for f in solver.groups if not f.is_constant]
    assert len(optima) >= 3
    victim = optima[1]
    damaged = _without_optimum(solver, victim)
    assert victim not in damaged.groups
    report = adjacency_sweep(damaged)
    assert report.recovered
    assert victim in damaged.groups
    assert not damaged.table.missing()


def test_truncated_worklist_still_finds_every_face():
    # a box in 3-D projected along x3: four output faces, four regions
    box = Polyhedron.from_matrix([[1, 0, 1], [-1, 0, 1], [0, 1, 1], [0, -1, 1], [0, 0, -1]],
                                 [2, 2, 2, 2, 1])
    plp = construct_projection(box, [2])
    solver = PlpSolver(plp, PlpConfig(max_tasks=1)).run()
    assert solver.stats.sweep.recovered
    faces = [f for f in solver.groups if not f.is_constant]
    assert len(faces) == 4
    assert not solver.table.missing()
    assert audit(solver) == []


def test_audit_of_a_normal_run_is_clean(four_rows):
    solver = PlpSolver(construct_projection(four_rows, [1])).run()
    assert audit(solver) == []


def test_audit_flags_a_tampered_optimum(four_rows):
    solver = PlpSolver(construct_projection(four_rows, [1])).run()
    r = solver.regions[0]
    solver.regions[0] = dataclasses.replace(
        r, optimum=dataclasses.replace(r.optimum, constant=r.optimum.constant + 1))
    assert any("optimal function differs" in p for p in audit(solver))


def test_sweep_stops_on_unreachable_frontier():
    class Stub:
        table = AdjacencyTable()
        regions = []

        def resolve_frontier(self, rid, k):
            raise LookupError

    Stub.table.register(0, 1)
    report = adjacency_sweep(Stub())
    assert report.unresolved == [(0, 0)]


@pytest.mark.parametrize("mode", ["wrong-basis", "premature"])
def test_fault_injector_counts(mode, square):
    fi = FaultInjector(rate=1.0, mode=mode, seed=1)
    plp = construct_projection(square, [1])
    solver = PlpSolver(plp, PlpConfig(float_solver=fi)).run()
    assert fi.injected == fi.calls > 0
    assert audit(solver) == []
