"""
Exact linear and quadratic algebra over Z_m, for m a prime q or m = 4 (the binary phase
ring). Provides residue vectors and matrices, affine solution spaces of linear systems over
GF(q), congruence diagonalization of quadratic forms over odd prime fields, and the exact
value type used for Gauss sums and traces.

Functions:
    - validate_modulus(modulus: int) -> int
    - solve_affine_system(A: ModMatrix, b: ModVector, q: int)
      -> AffineSolutionSet | Infeasible
    - diagonalize_quadratic(Q: ModMatrix, linear: ModVector, constant: int, q: int)
      -> DiagonalizedForm
    - evaluate_quadratic(Q, linear, constant, x, modulus) -> int
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import galois
import numpy as np

from src import get_logger

logger = get_logger(__name__)

PHASE_RING: int = 4


class ModulusError(ValueError):
    """Raised for moduli outside {primes} ∪ {4}, or unsupported by an algorithm."""


class DimensionMismatch(ValueError):
    """Raised when matrix and vector shapes are inconsistent."""


def validate_modulus(modulus: int) -> int:
    """
    Check that a modulus is a prime or the binary phase ring 4.

    Raises:
        ModulusError: for composite moduli other than 4, and for moduli below 2.
    """
    modulus = int(modulus)
    if modulus == PHASE_RING or (modulus >= 2 and galois.is_prime(modulus)):
        return modulus
    raise ModulusError(f"Unsupported modulus {modulus}: expected a prime or 4.")


def _require_prime(q: int) -> int:
    q = validate_modulus(q)
    if q == PHASE_RING:
        raise ModulusError("Linear systems are solved over prime fields only.")
    return q


def _frozen(entries: np.ndarray) -> np.ndarray:
    entries.setflags(write=False)
    return entries


@dataclass(frozen=True, eq=False)
class ModVector:
    """A vector of residues in [0, modulus)."""

    modulus: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        modulus = validate_modulus(self.modulus)
        entries = np.asarray(self.entries, dtype=np.int64).reshape(-1) % modulus
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "entries", _frozen(entries))

    @classmethod
    def zeros(cls, size: int, modulus: int) -> ModVector:
        return cls(modulus, np.zeros(size, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.entries.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModVector):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.modulus, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"ModVector({self.entries.tolist()} mod {self.modulus})"

    def dot(self, other: ModVector) -> int:
        if len(self) != len(other):
            raise DimensionMismatch(f"Vector widths differ: {len(self)} != {len(other)}")
        return int(self.entries @ other.entries) % self.modulus

    def tolist(self) -> list[int]:
        return [int(v) for v in self.entries]


@dataclass(frozen=True, eq=False)
class ModMatrix:
    """A matrix of residues in [0, modulus) with explicit (rows, cols) shape."""

    modulus: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        modulus = validate_modulus(self.modulus)
        entries = np.asarray(self.entries, dtype=np.int64)
        if entries.ndim != 2:
            raise DimensionMismatch(f"ModMatrix expects a 2D array, got shape {entries.shape}")
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "entries", _frozen(entries % modulus))

    @classmethod
    def identity(cls, size: int, modulus: int) -> ModMatrix:
        return cls(modulus, np.eye(size, dtype=np.int64))

    @classmethod
    def empty(cls, rows: int, modulus: int) -> ModMatrix:
        """A matrix with no columns (the basis of a zero-dimensional space)."""
        return cls(modulus, np.zeros((rows, 0), dtype=np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.entries.shape[0]), int(self.entries.shape[1])

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModMatrix):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.modulus, self.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"ModMatrix({self.entries.tolist()} mod {self.modulus})"

    def apply(self, y: Sequence[int] | np.ndarray) -> np.ndarray:
        """Matrix-vector product, reduced."""
        return (self.entries @ np.asarray(y, dtype=np.int64)) % self.modulus


@dataclass(frozen=True)
class AffineSolutionSet:
    """
    The solution set {basis·y + offset : y ∈ Z_q^free_dim} of a linear system mod q.
    Basis columns are linearly independent; column j is the unit vector of the unknown
    free_columns[j], and every other unknown is a pivot determined by the free ones.
    """

    basis: ModMatrix
    offset: ModVector
    free_columns: tuple[int, ...]

    @property
    def free_dim(self) -> int:
        return self.basis.cols

    @property
    def pivot_columns(self) -> tuple[int, ...]:
        free = set(self.free_columns)
        return tuple(col for col in range(self.basis.rows) if col not in free)

    def point(self, y: Sequence[int] | np.ndarray) -> np.ndarray:
        return (self.basis.apply(y) + self.offset.entries) % self.offset.modulus


@dataclass(frozen=True)
class Infeasible:
    """Result of an inconsistent linear system; `row` is the offending reduced row."""

    row: int
    rank: int


def solve_affine_system(
    A: ModMatrix, b: ModVector, q: int
) -> AffineSolutionSet | Infeasible:
    """
    Parametrize the complete solution set of A·w = b (mod q).

    Gaussian elimination with first-nonzero pivoting; the free columns, in increasing
    order, become the parameters y, so parametrizations are reproducible.

    Args:
        - A: r × c coefficient matrix.
        - b: right-hand side with r entries.
        - q: prime modulus.

    Returns:
        An AffineSolutionSet with free_dim = c − rank(A), or Infeasible.

    Raises:
        DimensionMismatch: if b does not have one entry per row of A.
        ModulusError: if q is not prime.
    """
    q = _require_prime(q)
    rows, cols = A.shape
    if len(b) != rows:
        raise DimensionMismatch(f"System has {rows} rows but right-hand side has {len(b)}")

    if rows == 0:
        return AffineSolutionSet(
            ModMatrix.identity(cols, q), ModVector.zeros(cols, q), tuple(range(cols))
        )
    if cols == 0:
        nonzero = np.flatnonzero(b.entries % q)
        if nonzero.size:
            return Infeasible(row=int(nonzero[0]), rank=0)
        return AffineSolutionSet(ModMatrix.empty(0, q), ModVector.zeros(0, q), ())

    GF = galois.GF(q)
    augmented = np.hstack([A.entries % q, (b.entries % q).reshape(-1, 1)])
    rref = GF(augmented).row_reduce().view(np.ndarray).astype(np.int64)

    pivots: list[int] = []
    for index, row in enumerate(rref):
        nonzero = np.flatnonzero(row)
        if nonzero.size == 0:
            break
        if nonzero[0] == cols:
            return Infeasible(row=index, rank=len(pivots))
        pivots.append(int(nonzero[0]))

    pivot_set = set(pivots)
    free = [col for col in range(cols) if col not in pivot_set]
    offset = np.zeros(cols, dtype=np.int64)
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for row, pivot in enumerate(pivots):
        offset[pivot] = rref[row, cols]
        basis[pivot] = -rref[row, free]
    for j, col in enumerate(free):
        basis[col, j] = 1

    return AffineSolutionSet(ModMatrix(q, basis), ModVector(q, offset), tuple(free))


@dataclass(frozen=True)
class DiagonalizedForm:
    """
    Σ a_i y_i² + Σ b_i y_i + constant, obtained from a quadratic polynomial through the
    invertible substitution x = change_of_vars·y.
    """

    modulus: int
    diagonal_coeffs: ModVector
    linear_coeffs: ModVector
    constant: int
    change_of_vars: ModMatrix

    def evaluate(self, y: Sequence[int] | np.ndarray) -> int:
        y = np.asarray(y, dtype=np.int64)
        value = self.diagonal_coeffs.entries @ (y * y) + self.linear_coeffs.entries @ y
        return int(value + self.constant) % self.modulus


def evaluate_quadratic(
    Q: ModMatrix,
    linear: ModVector,
    constant: int,
    x: Sequence[int] | np.ndarray,
    modulus: int,
) -> int:
    """Evaluate xᵀQx + linear·x + constant (mod modulus) at an integer point."""
    x = np.asarray(x, dtype=np.int64)
    return int(x @ Q.entries @ x + linear.entries @ x + constant) % modulus


def diagonalize_quadratic(
    Q: ModMatrix, linear: ModVector, constant: int, q: int
) -> DiagonalizedForm:
    """
    Congruence-diagonalize the quadratic form of xᵀQx + linear·x + constant over GF(q).

    Args:
        - Q: symmetric coefficient matrix (the cross coefficient of x_i x_j is 2·Q_ij).
        - linear: linear coefficients.
        - constant: constant term.
        - q: odd prime.

    Returns:
        A DiagonalizedForm whose substitution identity holds at every point.

    Raises:
        ModulusError: for q = 2 or 4; the binary case uses a different algorithm.
        DimensionMismatch: if Q is not square, symmetric, or does not match `linear`.
    """
    q = _require_prime(q)
    if q == 2:
        raise ModulusError("Diagonalization needs an odd characteristic.")
    dim = Q.rows
    if Q.cols != dim or len(linear) != dim:
        raise DimensionMismatch(f"Form of shape {Q.shape} with {len(linear)} linear terms")
    if not np.array_equal(Q.entries % q, Q.entries.T % q):
        raise DimensionMismatch("Quadratic coefficient matrix must be symmetric.")

    form = Q.entries % q
    change = np.eye(dim, dtype=np.int64)

    def shear(source: int, targets: np.ndarray, factors: np.ndarray) -> None:
        # x_source -> x_source + Σ factors·x_targets, as in-place column then row operations
        form[:, targets] = (form[:, targets] + np.outer(form[:, source], factors)) % q
        form[targets, :] = (form[targets, :] + np.outer(factors, form[source, :])) % q
        change[:, targets] = (change[:, targets] + np.outer(change[:, source], factors)) % q

    def swap(i: int, j: int) -> None:
        form[[i, j]] = form[[j, i]]
        form[:, [i, j]] = form[:, [j, i]]
        change[:, [i, j]] = change[:, [j, i]]

    for k in range(dim):
        candidates = np.flatnonzero(np.diagonal(form)[k:])
        if candidates.size:
            pivot = k + int(candidates[0])
        else:
            pairs = np.argwhere(np.triu(form[k:, k:], 1))
            if not pairs.size:
                break
            # x_i -> x_i + x_j puts 2·Q_ij on the diagonal at j
            i, j = (k + int(v) for v in pairs[0])
            shear(i, np.array([j]), np.array([1]))
            pivot = j
        if pivot != k:
            swap(k, pivot)
        if k + 1 == dim:
            break
        inverse = pow(int(form[k, k]), -1, q)
        ratios = (-form[k, k + 1 :] * inverse) % q
        targets = k + 1 + np.flatnonzero(ratios)
        if targets.size:
            shear(k, targets, ratios[targets - k - 1])

    diagonal = np.diagonal(form).copy()
    new_linear = (change.T @ (linear.entries % q)) % q
    logger.debug(
        "Diagonalized %d-variable form mod %d (rank %d)", dim, q, np.count_nonzero(diagonal)
    )
    return DiagonalizedForm(
        modulus=q,
        diagonal_coeffs=ModVector(q, diagonal),
        linear_coeffs=ModVector(q, new_linear),
        constant=int(constant) % q,
        change_of_vars=ModMatrix(q, change),
    )


def root_group_order(q: int) -> int:
    """Order L of the root-of-unity group carrying exact phases: 8 for q = 2, 4q otherwise."""
    return 8 if q == 2 else 4 * q


@dataclass(frozen=True)
class ExactScaledRoot:
    """
    An exact complex number that is either zero or q^{half_power/2}·e^{2πi·phase_exp/L},
    with L = 8 for q = 2 and L = 4q for odd q.
    """

    q: int
    is_zero: bool = False
    half_power: int = 0
    phase_exp: int = field(default=0)

    def __post_init__(self) -> None:
        if self.is_zero:
            object.__setattr__(self, "half_power", 0)
            object.__setattr__(self, "phase_exp", 0)
        else:
            object.__setattr__(self, "phase_exp", int(self.phase_exp) % self.L)
            object.__setattr__(self, "half_power", int(self.half_power))

    @property
    def L(self) -> int:
        return root_group_order(self.q)

    @classmethod
    def zero(cls, q: int) -> ExactScaledRoot:
        return cls(q, is_zero=True)

    @classmethod
    def one(cls, q: int) -> ExactScaledRoot:
        return cls(q)

    def __mul__(self, other: ExactScaledRoot) -> ExactScaledRoot:
        if self.q != other.q:
            raise ModulusError(f"Cannot multiply values over q={self.q} and q={other.q}")
        if self.is_zero or other.is_zero:
            return ExactScaledRoot.zero(self.q)
        return ExactScaledRoot(
            self.q,
            half_power=self.half_power + other.half_power,
            phase_exp=self.phase_exp + other.phase_exp,
        )

    def scaled(self, half_power: int) -> ExactScaledRoot:
        """Multiply by q^{half_power/2}."""
        if self.is_zero:
            return self
        return ExactScaledRoot(self.q, half_power=self.half_power + half_power,
                               phase_exp=self.phase_exp)

    def rotated(self, phase_exp: int) -> ExactScaledRoot:
        """Multiply by e^{2πi·phase_exp/L}."""
        if self.is_zero:
            return self
        return ExactScaledRoot(self.q, half_power=self.half_power,
                               phase_exp=self.phase_exp + phase_exp)

    def conjugate(self) -> ExactScaledRoot:
        if self.is_zero:
            return self
        return ExactScaledRoot(self.q, half_power=self.half_power, phase_exp=-self.phase_exp)

    def magnitude(self) -> float:
        return 0.0 if self.is_zero else self.q ** (self.half_power / 2)

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return self.magnitude() * cmath.exp(2j * math.pi * self.phase_exp / self.L)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        return f"{self.q}^({self.half_power}/2)·exp(2πi·{self.phase_exp}/{self.L})"
