import numpy as np
import pytest
from gengap.errors import InvalidModulusError, ShapeMismatchError
from gengap.exactla import (
    EchelonSpan,
    FpMatrix,
    IntegerSolver,
    as_int_matrix,
    hermite_normal_form,
    int_matmul,
    integer_kernel,
    invariant_factors_to_exponent,
    inverse_mod_p,
    left_kernel,
    minimal_multiple,
    rational_rank,
    rref,
    smith_normal_form,
    solve_mod_p,
)
from hypothesis import given, settings
from hypothesis import strategies as st


def test_fp_matrix_rejects_composite_modulus():
    with pytest.raises(InvalidModulusError):
        FpMatrix(4, np.eye(2, dtype=np.int64))
    with pytest.raises(ValueError):
        FpMatrix.from_rows([[1, 2]], 9)


def test_rref_rank_and_kernel():
    m = FpMatrix.from_rows([[1, 2, 3], [2, 4, 6], [0, 1, 1]], 5)
    result = rref(m)
    assert result.rank == 2
    assert result.pivots == (0, 1)
    assert result.kernel.rows == 1
    assert not ((m.entries @ result.kernel.entries.T) % 5).any()


def test_left_kernel_annihilates_from_the_left():
    m = FpMatrix.from_rows([[1, 1], [2, 2], [0, 1]], 3)
    kernel = left_kernel(m)
    assert kernel.rows == 1
    assert not ((kernel.entries @ m.entries) % 3).any()


def test_solve_mod_p():
    a = FpMatrix.from_rows([[1, 0], [0, 1], [1, 1]], 3)
    x = solve_mod_p(a, [2, 1])
    assert x is not None
    assert list((x @ a.entries) % 3) == [2, 1]
    assert solve_mod_p(FpMatrix.from_rows([[1, 1]], 7), [1, 0]) is None
    with pytest.raises(ShapeMismatchError):
        solve_mod_p(a, [1, 2, 3])


def test_echelon_span_grows_only_with_new_vectors():
    span = EchelonSpan(3, 5)
    assert span.add(np.array([1, 2, 0]))
    assert not span.add(np.array([2, 4, 0]))
    assert span.add(np.array([0, 0, 3]))
    assert span.dim == 2
    assert span.contains(np.array([1, 2, 4]))
    assert not span.contains(np.array([0, 1, 0]))
    assert span.matrix().rows == 2


def test_inverse_mod_p():
    m = FpMatrix.from_rows([[1, 1], [0, 1]], 5)
    assert m @ inverse_mod_p(m) == FpMatrix.identity(2, 5)
    with pytest.raises(ShapeMismatchError):
        inverse_mod_p(FpMatrix.from_rows([[1, 2], [2, 4]], 5))


def test_smith_normal_form():
    a = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    smith = smith_normal_form(a)
    assert smith.invariant_factors == (2, 6, 12)
    assert (int_matmul(int_matmul(smith.U, as_int_matrix(a)), smith.V) == smith.D).all()
    assert smith.rank == 3


def test_hermite_form_and_integer_kernel():
    assert integer_kernel([[1, 2], [2, 4]]).tolist() == [[2, -1]]
    assert hermite_normal_form([[2, 4], [3, 6]]).tolist() == [[1, 2]]
    assert rational_rank([[1, 2], [2, 4], [0, 1]]) == 2


def test_integer_solver():
    solver = IntegerSolver([[2, 0], [0, 3]])
    assert solver.solve([4, 9]) == [2, 3]
    assert solver.solve([1, 0]) is None
    with pytest.raises(ShapeMismatchError):
        solver.solve([1])


def test_minimal_multiple():
    assert minimal_multiple([[2, 0], [0, 3]], [1, 1]) == 6
    assert minimal_multiple([[1, 0]], [0, 1]) == 0
    assert minimal_multiple([[1, 0], [0, 1]], [5, 7]) == 1


def test_exponent_from_invariant_factors():
    assert invariant_factors_to_exponent([2, 6]) == 6
    assert invariant_factors_to_exponent([4, 6]) == 12
    assert invariant_factors_to_exponent([3, 0]) == 0
    assert invariant_factors_to_exponent([]) == 1


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_solutions_of_consistent_systems(data):
    p = data.draw(st.sampled_from([2, 3, 5, 7]))
    rows = data.draw(st.integers(1, 4))
    cols = data.draw(st.integers(1, 4))
    entries = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=cols, max_size=cols), min_size=rows, max_size=rows))
    y = data.draw(st.lists(st.integers(0, p - 1), min_size=rows, max_size=rows))
    a = FpMatrix.from_rows(entries, p)
    b = (np.array(y, dtype=np.int64) @ a.entries) % p
    x = solve_mod_p(a, b)
    assert x is not None
    assert list((x @ a.entries) % p) == list(b)
    assert rref(a).rank == rref(FpMatrix(p, a.entries.T)).rank


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_smith_form_is_an_equivalence(rows):
    smith = smith_normal_form(rows)
    assert (int_matmul(int_matmul(smith.U, as_int_matrix(rows)), smith.V) == smith.D).all()
    factors = [d for d in smith.invariant_factors if d]
    assert all(b % a == 0 for a, b in zip(factors, factors[1:]))
    assert smith.rank == rational_rank(rows)
