import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plpoly.core import Polyhedron, Q, primitive
from plpoly.errors import DimensionMismatch, EmptyPolyhedron, NoInterior
from plpoly.linalg import ZERO, reconstruct_objective
from plpoly.oracle import GeneratorParams, contains, fourier_motzkin, generate, poly_equal
from plpoly.plp import (PlpConfig, PlpSolver, add_extra_point, check_covered, construct_hull,
                        construct_projection, convex_hull, extract_region, project, solve)
from plpoly.plp.region import Region


def _rows(poly):
    return {(r.coeffs, r.constant) for r in poly.normalized().rows}


def test_projection_layout(four_rows):
    plp = construct_projection(four_rows, [1])
    p = plp.normalization_point
    assert four_rows.contains(p, strict=True)
    n = len(four_rows)
    assert plp.constraint_matrix.shape == (2, n + 2)
    # normalization row: slacks at p, then lambda0, then right-hand side 1
    rows = four_rows.normalized().rows
    assert list(plp.constraint_matrix[0, :n]) == [r.evaluate(p) for r in rows]
    assert plp.constraint_matrix[0, n] == 1 and plp.constraint_matrix[0, -1] == 1
    assert list(plp.constraint_matrix[1, :n]) == [r.coeffs[1] for r in rows]
    assert plp.objective_matrix.shape == (2, n + 2)
    assert list(plp.objective_matrix[1, :n + 1]) == [r.constant for r in rows] + [1]
    assert plp.apex == (p[0],)


def test_square_projection_is_the_interval(square):
    sol = project(square, [1])
    assert _rows(sol.polyhedron) == {((1,), 0), ((-1,), 1)}
    assert poly_equal(sol.polyhedron, fourier_motzkin(square, [1]))


def test_four_rows_projection_matches_hand_elimination(four_rows):
    # pairing rows 1,2 and 1,3 gives 3 x1 >= 4 and 3 x1 <= 14; the other pairs are weaker
    sol = project(four_rows, [1])
    assert _rows(sol.polyhedron) == {((3,), -4), ((-3,), 14)}
    assert len(sol.regions) >= len(sol.polyhedron)


def test_eliminating_everything_leaves_no_parameters(square):
    sol = project(square, [0, 1])
    assert sol.polyhedron.dimension == 0 and len(sol.polyhedron) == 0
    assert not sol.polyhedron.unsatisfiable


def test_unused_variable_projects_to_the_rest():
    p = Polyhedron.from_matrix([[1, 0, 0], [0, 1, 0], [-1, -1, 0], [-2, -1, 0]], [0, 0, 4, 9])
    sol = project(p, [2])
    assert _rows(sol.polyhedron) == {((1, 0), 0), ((0, 1), 0), ((-1, -1), 4)}


def test_empty_input_rejected():
    p = Polyhedron.from_matrix([[1], [-1]], [-2, 1])
    with pytest.raises(EmptyPolyhedron):
        construct_projection(p, [0])


def test_flat_input_rejected():
    p = Polyhedron.from_matrix([[1, 0], [-1, 0], [0, 1]], [0, 0, 0])
    with pytest.raises(NoInterior):
        construct_projection(p, [1])


def test_bad_elimination_index(square):
    with pytest.raises(DimensionMismatch):
        construct_projection(square, [2])
    with pytest.raises(ValueError):
        construct_projection(square, [])


def test_hull_of_two_intervals():
    a = Polyhedron.from_matrix([[1], [-1]], [0, 1])
    b = Polyhedron.from_matrix([[1], [-1]], [-2, 3])
    assert _rows(convex_hull(a, b).polyhedron) == {((1,), 0), ((-1,), 3)}


def test_hull_with_itself(four_rows):
    h = convex_hull(four_rows, four_rows).polyhedron
    assert poly_equal(h, four_rows)


def test_hull_of_box_neighbourhoods_contains_both():
    def box(cx, cy):
        return Polyhedron.from_matrix([[1, 0], [-1, 0], [0, 1], [0, -1]],
                                      [1 - cx, 1 + cx, 1 - cy, 1 + cy])
    a, b = box(0, 0), box(5, 3)
    h = convex_hull(a, b).polyhedron
    assert contains(h, a) and contains(h, b)
    assert len(h) == 6


def test_hull_dimension_mismatch(square):
    with pytest.raises(DimensionMismatch):
        construct_hull(square, Polyhedron.from_matrix([[1]], [0]))


def test_hull_with_flat_second_input_swaps_roles(square):
    seg = Polyhedron.from_matrix([[1, 0], [-1, 0], [0, 1], [0, -1]], [-3, 3, 0, 1])
    h = convex_hull(seg, square).polyhedron
    assert contains(h, square) and contains(h, seg)


def test_extract_region_whole_space():
    # every nonbasic column has no parametric part: the region is everything
    reduced = np.array([[0, 0, 0, 0], [0, 2, 0, -1]], dtype=object)
    rows, opt = extract_region(reduced, (1, 2), 3)
    assert rows == {}
    assert opt.coeffs == (0,) and opt.constant == 1


def test_region_rows_and_optimum_from_reduced_costs(four_rows):
    plp = construct_projection(four_rows, [1])
    solver = PlpSolver(plp).run()
    for r in solver.regions:
        reduced = reconstruct_objective(plp.constraint_matrix, plp.objective_matrix, r.basis.basic)
        rows, opt = extract_region(reduced, r.basis.nonbasic, plp.n_vars)
        assert opt == r.optimum
        assert opt(plp.apex) == 1


def test_boundary_face_appears_as_frontier():
    # in one dimension each region is the half-line where its own face is violated
    sq = Polyhedron.from_matrix([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]], [0, 1, 0, 1, 1])
    sol = project(sq, [1])
    assert len(sol.regions) == 2
    for r in sol.regions:
        assert primitive([-c for c in r.optimum.coeffs]) == primitive(r.normals[0])


def test_check_covered(four_rows):
    plp = construct_projection(four_rows, [1])
    solver = PlpSolver(plp).run()
    regs = solver.regions
    for r in regs:
        assert check_covered(regs, [float(v) for v in r.interior]) == r.id
    # the apex lies on every frontier: covered only when closures count
    apex_dir = [0.0] * plp.n_params
    assert check_covered(regs, apex_dir) is None
    assert check_covered(regs, apex_dir, strict=False) == regs[0].id
    assert check_covered([], [1.0]) is None


def _cone(rid, normals, interior):
    normals = tuple(tuple(Q(v) for v in g) for g in normals)
    return Region(rid, None, normals, ((1,),) * len(normals), None,
                  tuple(Q(v) for v in interior))


def test_extra_point_lands_in_a_gap():
    # angles 0..30 and 60..90 degrees leave a gap around 45
    a = _cone(0, [(0, 1), (1, -2)], (3, 1))
    b = _cone(1, [(1, 0), (-2, 1)], (1, 3))
    y = add_extra_point(a, b)
    assert tuple(y) == (1.0, 1.0)
    assert check_covered([a, b], y) is None
    assert check_covered([a, b], y, strict=False) is None


def test_extra_point_between_touching_regions_is_absorbed():
    # angles 0..45 and 45..90 degrees share a facet
    a = _cone(0, [(0, 1), (1, -1)], (3, 1))
    b = _cone(1, [(1, 0), (-1, 1)], (1, 2))
    y = add_extra_point(a, b)
    assert check_covered([a, b], y) == 0


def test_extra_point_of_opposite_regions_is_none():
    a = _cone(0, [(1,)], (1,))
    b = _cone(1, [(-1,)], (-1,))
    assert add_extra_point(a, b) is None


def _lambda_combination(plp, region):
    lam = [ZERO] * plp.n_vars
    for j, v in zip(region.basis.basic, region.values):
        lam[j] = v
    return lam


def _check_soundness(poly, eliminate, sol):
    plp = sol.plp
    rows = plp.sources
    kept = [j for j in range(poly.dimension) if j not in eliminate]
    for r in sol.regions:
        lam = _lambda_combination(plp, r)
        assert all(v >= 0 for v in lam)
        coeffs = [sum((lam[i] * row.coeffs[j] for i, row in enumerate(rows)), ZERO)
                  for j in range(poly.dimension)]
        const = sum((lam[i] * row.constant for i, row in enumerate(rows)), ZERO) + lam[len(rows)]
        assert all(coeffs[e] == 0 for e in eliminate)
        assert tuple(coeffs[j] for j in kept) == r.optimum.coeffs
        assert const == r.optimum.constant


def _random_instance(seed):
    rng = random.Random(seed)
    g = GeneratorParams(rng.randint(4, 10), rng.randint(2, 5), rng.choice([0.25, 0.5, 0.75]),
                        rng.choice([0.0, 0.25, 0.5]), seed=rng.randrange(1 << 30))
    return generate(g), g.eliminated


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**40))
def test_engine_invariants_on_random_instances(seed):
    poly, elim = _random_instance(seed)
    sol = project(poly, elim)
    _check_soundness(poly, elim, sol)
    for r in sol.regions:
        assert r.optimum(sol.plp.apex) == 1
    if sol.solver is not None:
        assert not sol.solver.table.missing()
        assert sol.solver.table.is_symmetric()
    assert poly_equal(sol.polyhedron, fourier_motzkin(poly, elim))


def test_same_seed_same_answer():
    poly = generate(GeneratorParams(10, 4, 0.5, 0.25, seed=5))
    a = project(poly, [2, 3], PlpConfig(seed=9, n_initial=3))
    b = project(poly, [2, 3], PlpConfig(seed=9, n_initial=3))
    assert a.polyhedron == b.polyhedron
    assert [r.basis for r in a.regions] == [r.basis for r in b.regions]


def test_more_initial_points_same_polyhedron():
    poly = generate(GeneratorParams(10, 4, 0.5, 0.0, seed=6))
    a = project(poly, [3]).polyhedron
    b = project(poly, [3], PlpConfig(n_initial=5, seed=2)).polyhedron
    assert poly_equal(a, b)


def test_solve_returns_regions_and_polyhedron(square):
    regions, poly = solve(construct_projection(square, [1]))
    assert regions and _rows(poly) == {((1,), 0), ((-1,), 1)}


def test_hull_invariants_hold():
    rng = random.Random(4)
    for _ in range(3):
        a = generate(GeneratorParams(4, 2, 1.0, 0.0, seed=rng.randrange(1000)))
        b = generate(GeneratorParams(5, 2, 1.0, 0.0, seed=rng.randrange(1000)))
        h = convex_hull(a, b)
        for r in h.regions:
            assert r.optimum(h.plp.apex) == 1
        assert not h.solver.table.missing()
