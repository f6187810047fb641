import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from plpoly.checkers import verify_feasible_basis
from plpoly.core import Q
from plpoly.errors import SingularBasis
from plpoly.linalg import (independent_rows, qidentity, qmatmul, qmatrix, rank,
                           reconstruct_objective, row_echelon, solve_columns, to_float_matrix)
from plpoly.plp import construct_projection


def test_identity_is_already_reduced():
    ech = row_echelon(qidentity(2), [0, 1])
    assert (ech.matrix == qidentity(2)).all()
    assert ech.missing == []


def test_rank_one_reports_missing_pivot():
    ech = row_echelon(qmatrix([[1, 2], [2, 4]]), [0, 1])
    assert ech.matrix.tolist() == [[1, 2], [0, 0]]
    assert ech.missing == [1]


def test_transform_reproduces_echelon_form():
    rng = random.Random(3)
    m = qmatrix([[rng.randint(-9, 9) for _ in range(7)] for _ in range(5)])
    ech = row_echelon(m, [6, 0, 3, 1, 2, 4, 5])
    assert (qmatmul(ech.transform, m) == ech.matrix).all()
    assert len(ech.pivots) == 5


def test_echelon_matches_sympy_rref():
    rng = random.Random(11)
    rows = [[rng.randint(-5, 5) for _ in range(6)] for _ in range(4)]
    rows[3] = [a + b for a, b in zip(rows[0], rows[1])]
    ours = row_echelon(qmatrix(rows))
    ref, pivots = sympy.Matrix(rows).rref()
    assert [c for _, c in ours.pivots] == list(pivots)
    for i in range(len(pivots)):
        assert [Fraction(int(v.p), int(v.q)) for v in ref.row(i)] == list(ours.matrix[i])


def test_zero_rows_sink():
    ech = row_echelon(qmatrix([[0, 0], [1, 1], [0, 0]]), [0])
    assert ech.matrix.tolist() == [[1, 1], [0, 0], [0, 0]]


def test_rank_and_independent_rows():
    m = qmatrix([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    assert rank(m) == 2
    assert independent_rows(m) == [0, 2]


def test_solve_identity():
    rhs = qmatrix([[1, 2], [3, 4]])
    assert (solve_columns(qidentity(2), rhs) == rhs).all()


def test_solve_diagonal_inverse():
    X = solve_columns(qmatrix([[2, 0], [0, 4]]), qidentity(2))
    assert X.tolist() == [[Q("1/2"), 0], [0, Q("1/4")]]


def test_solve_singular_raises():
    with pytest.raises(SingularBasis):
        solve_columns(qmatrix([[1, 2], [2, 4]]), qidentity(2))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_solve_random_six_by_six(seed):
    rng = random.Random(seed)
    B = qmatrix([[rng.randint(-20, 20) for _ in range(6)] for _ in range(6)])
    if rank(B) < 6:
        return
    rhs = qmatrix([[rng.randint(-20, 20) for _ in range(3)] for _ in range(6)])
    assert (qmatmul(B, solve_columns(B, rhs)) == rhs).all()


def test_reconstruct_unchanged_when_basic_part_is_zero():
    M = qmatrix([[1, 1, 1]])
    O = qmatrix([[0, 5, 0], [0, -2, 0]])
    assert (reconstruct_objective(M, O, [0]) == O).all()


def test_reconstruct_one_row_hand_pivot():
    M = qmatrix([[1, 1, 1]])
    O = qmatrix([[3, 1, 0], [2, 0, 0]])
    reduced = reconstruct_objective(M, O, [0])
    # substituting lambda0 = 1 - lambda1
    assert reduced.tolist() == [[0, -2, -3], [0, -2, -2]]


def _tableau_objective(M, O, basic):
    """Objective rows after Gauss-Jordan pivoting a Fraction tableau on ``basic``."""
    T = [[Fraction(int(v.numerator), int(v.denominator)) for v in row] for row in M.tolist()]
    Z = [[Fraction(int(v.numerator), int(v.denominator)) for v in row] for row in O.tolist()]
    for r, c in enumerate(basic):
        p = next(i for i in range(r, len(T)) if T[i][c] != 0)
        T[r], T[p] = T[p], T[r]
        piv = T[r][c]
        T[r] = [v / piv for v in T[r]]
        for i in range(len(T)):
            if i != r and T[i][c]:
                f = T[i][c]
                T[i] = [a - f * b for a, b in zip(T[i], T[r])]
        for row in Z:
            f = row[c]
            if f:
                row[:] = [a - f * b for a, b in zip(row, T[r])]
    return Z


def test_reconstruct_matches_tableau_pivoting(four_rows):
    plp = construct_projection(four_rows, [1])
    checked = 0
    for basic in combinations(range(plp.n_vars), plp.n_rows):
        if not verify_feasible_basis(plp.constraint_matrix, basic):
            continue
        A, C = plp.constraint_matrix, plp.objective_matrix
        reduced = reconstruct_objective(A, C, basic)
        assert reduced.tolist() == _tableau_objective(A, C, basic)
        assert all(reduced[k, j] == 0 for j in basic for k in range(reduced.shape[0]))
        checked += 1
    assert checked >= 2


def test_reconstruct_needs_square_basis():
    with pytest.raises(SingularBasis):
        reconstruct_objective(qmatrix([[1, 1, 1]]), qmatrix([[1, 1, 0]]), [0, 1])


def test_float_mirror_of_empty_matrix():
    assert to_float_matrix(np.empty((0, 3), dtype=object)).shape == (0, 3)
