import itertools

import numpy as np
import pytest

from src.modring import (
    AffineSolutionSet,
    DimensionMismatch,
    ExactScaledRoot,
    Infeasible,
    ModMatrix,
    ModulusError,
    ModVector,
    diagonalize_quadratic,
    evaluate_quadratic,
    solve_affine_system,
    validate_modulus,
)


@pytest.mark.parametrize("modulus", [2, 3, 4, 5, 7, 11])
def test_validate_modulus_accepts_primes_and_four(modulus):
    assert validate_modulus(modulus) == modulus


@pytest.mark.parametrize("modulus", [0, 1, 6, 8, 9, 15])
def test_validate_modulus_rejects(modulus):
    with pytest.raises(ModulusError):
        validate_modulus(modulus)


def test_mod_vector_reduces_and_compares():
    v = ModVector(3, [4, -1, 3])
    assert v.tolist() == [1, 2, 0]
    assert v == ModVector(3, [1, 2, 0])
    assert v.dot(ModVector(3, [1, 1, 1])) == 0
    with pytest.raises(DimensionMismatch):
        v.dot(ModVector(3, [1]))


def test_solve_single_equation():
    result = solve_affine_system(ModMatrix(3, [[1, 1]]), ModVector(3, [1]), 3)
    assert isinstance(result, AffineSolutionSet)
    assert result.free_dim == 1
    assert result.offset.tolist() == [1, 0]
    assert result.basis.entries.tolist() == [[2], [1]]


def test_solve_infeasible():
    result = solve_affine_system(ModMatrix(2, [[1], [1]]), ModVector(2, [0, 1]), 2)
    assert isinstance(result, Infeasible)
    assert result.rank == 1


def test_solve_without_rows_is_everything():
    result = solve_affine_system(ModMatrix(5, np.zeros((0, 3))), ModVector(5, []), 5)
    assert result.free_dim == 3
    assert result.offset.tolist() == [0, 0, 0]


def test_solve_unique_solution():
    A = ModMatrix(5, [[1, 2], [3, 4]])
    result = solve_affine_system(A, ModVector(5, [1, 1]), 5)
    assert result.free_dim == 0
    assert A.apply(result.point([])).tolist() == [1, 1]


def test_solve_rejects_bad_inputs():
    with pytest.raises(DimensionMismatch):
        solve_affine_system(ModMatrix(3, [[1, 2]]), ModVector(3, [1, 2]), 3)
    with pytest.raises(ModulusError):
        solve_affine_system(ModMatrix(4, [[1]]), ModVector(4, [1]), 4)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_solution_set_matches_enumeration(q):
    rng = np.random.default_rng(q)
    for _ in range(20):
        rows, cols = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        A = ModMatrix(q, rng.integers(0, q, (rows, cols)))
        b = ModVector(q, rng.integers(0, q, rows))
        expected = {
            w for w in itertools.product(range(q), repeat=cols)
            if np.array_equal(A.apply(w), b.entries)
        }
        result = solve_affine_system(A, b, q)
        if isinstance(result, Infeasible):
            assert not expected
            continue
        found = {
            tuple(int(v) for v in result.point(y))
            for y in itertools.product(range(q), repeat=result.free_dim)
        }
        assert found == expected
        assert len(expected) == q**result.free_dim


@pytest.mark.parametrize("q", [3, 5, 7])
def test_diagonalization_preserves_values(q):
    rng = np.random.default_rng(10 + q)
    for _ in range(30):
        dim = int(rng.integers(1, 4))
        upper = np.triu(rng.integers(0, q, (dim, dim)))
        Q = ModMatrix(q, upper + np.triu(upper, 1).T)
        linear = ModVector(q, rng.integers(0, q, dim))
        constant = int(rng.integers(0, q))
        form = diagonalize_quadratic(Q, linear, constant, q)
        inverse = solve_affine_system(form.change_of_vars, ModVector.zeros(dim, q), q)
        assert inverse.free_dim == 0
        for y in itertools.product(range(q), repeat=dim):
            x = form.change_of_vars.apply(y)
            assert form.evaluate(y) == evaluate_quadratic(Q, linear, constant, x, q)


def test_diagonalization_of_pure_cross_term():
    form = diagonalize_quadratic(ModMatrix(3, [[0, 1], [1, 0]]), ModVector.zeros(2, 3), 0, 3)
    assert all(a != 0 for a in form.diagonal_coeffs.tolist())


def test_diagonalization_rejects_binary_and_asymmetric():
    with pytest.raises(ModulusError):
        diagonalize_quadratic(ModMatrix(2, [[1]]), ModVector(2, [0]), 0, 2)
    with pytest.raises(DimensionMismatch):
        diagonalize_quadratic(ModMatrix(3, [[1, 1], [0, 1]]), ModVector(3, [0, 0]), 0, 3)


def test_exact_scaled_root_arithmetic():
    sqrt2_omega = ExactScaledRoot(2, half_power=1, phase_exp=1)
    assert sqrt2_omega.to_complex() == pytest.approx(1 + 1j)
    product = sqrt2_omega * sqrt2_omega.conjugate()
    assert (product.half_power, product.phase_exp) == (2, 0)
    assert (sqrt2_omega * ExactScaledRoot.zero(2)).is_zero
    assert ExactScaledRoot(3, half_power=0, phase_exp=13).phase_exp == 1
    assert ExactScaledRoot(5, half_power=-2).magnitude() == pytest.approx(0.2)
    assert ExactScaledRoot.zero(3) == ExactScaledRoot(3, is_zero=True, half_power=4, phase_exp=5)
