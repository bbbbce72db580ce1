"""
Brute-force ground truth for small instances.

This module:
  1. Builds dense q^n × q^n unitaries from Clifford circuits, gate by gate on a digit tensor
     (wire 0 is the most significant digit).
  2. Computes normalized traces, global-phase equality and Pauli decompositions.
  3. Evaluates the EPR identity test analytically, on an explicit statevector, or by
     seeded sampling.
  4. Enumerates commutator-identity probabilities exactly.
  5. Reads and writes unitaries in the JSON matrix format {"n", "q", "re", "im"}.

Every construction is bounded by a dimension cap (QSUB_DIM_CAP or src.config.DEFAULT_DIM_CAP unless given).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import binomtest, unitary_group

from src import get_logger
from src.clifford import CliffordCircuit, Gate
from src.config import (
    COEFF_TOL,
    DEFAULT_SHOTS,
    LOAD_UNITARY_TOL,
    PHASE_TOL,
    UNITARY_TOL,
    WILSON_CONFIDENCE,
    resolve_cap,
)
from src.modring import PHASE_RING, ModulusError, validate_modulus
from src.pauli import PauliOperator, iter_basis_paulis, phase_modulus

logger = get_logger(__name__)

EPR_MODES = ("analytic", "statevector", "sample")


class DimensionCapExceeded(ValueError):
    """Raised when a dense construction would exceed the configured dimension cap."""

    def __init__(self, dimension: int, cap: int) -> None:
        self.dimension = dimension
        self.cap = cap
        super().__init__(f"Dimension {dimension} exceeds the cap {cap} (set QSUB_DIM_CAP or --cap)")


class MatrixFormatError(ValueError):
    """Raised for malformed or non-unitary matrix files."""


def check_cap(dimension: int, cap: int | None = None) -> None:
    cap = resolve_cap(cap)
    if dimension > cap:
        raise DimensionCapExceeded(dimension, cap)


def _unitarity_error(matrix: np.ndarray) -> float:
    identity = np.eye(matrix.shape[0])
    return float(np.max(np.abs(matrix @ matrix.conj().T - identity)))


@dataclass(frozen=True, eq=False)
class DenseUnitary:
    """A q^n × q^n unitary, validated on construction."""

    n: int
    q: int
    matrix: np.ndarray
    tol: float = field(default=UNITARY_TOL, repr=False)

    def __post_init__(self) -> None:
        if validate_modulus(self.q) == PHASE_RING:
            raise ModulusError(f"Qudit arity must be prime, got q={self.q}")
        matrix = np.asarray(self.matrix, dtype=complex)
        d = self.q**self.n
        if matrix.shape != (d, d):
            raise ValueError(f"Expected a {d}×{d} matrix for n={self.n}, q={self.q}, got {matrix.shape}")
        error = _unitarity_error(matrix)
        if error > self.tol:
            raise ValueError(f"Matrix is not unitary (max deviation {error:.3e} > {self.tol:g})")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dimension(self) -> int:
        return self.q**self.n

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.matrix @ state

    def apply_inverse(self, state: np.ndarray) -> np.ndarray:
        return self.matrix.conj().T @ state


def _omega(q: int) -> complex:
    return np.exp(2j * np.pi / q)


def gate_matrix(gate: Gate | str, q: int) -> np.ndarray:
    """
    Dense matrix of a gate: q × q for single-wire gates, q² × q² for CNOT (control is the
    more significant wire).
    """
    name = gate if isinstance(gate, str) else gate.name
    w = _omega(q)
    x = np.arange(q)
    if name == "F":
        return w ** np.outer(x, x) / math.sqrt(q)
    if name == "S":
        exponents = x if q == 2 else x * (x - 1) // 2
        base = 1j if q == 2 else w
        return np.diag(base**exponents)
    if name == "X":
        return np.roll(np.eye(q, dtype=complex), 1, axis=0)
    if name == "Z":
        return np.diag(w**x)
    if name == "CNOT":
        tensor = np.eye(q * q, dtype=complex).reshape(q, q, q * q)
        return _apply_gate(tensor, Gate("CNOT", (0, 1)), q).reshape(q * q, q * q)
    raise ValueError(f"Unknown gate {name!r}")


def _apply_gate(tensor: np.ndarray, gate: Gate, q: int) -> np.ndarray:
    """Apply a gate to a digit tensor of shape (q,)*n + (columns,)."""
    if gate.name == "CNOT":
        control, target = gate.wires
        axis = target - (target > control)
        out = np.empty_like(tensor)
        for value in range(q):
            index = [slice(None)] * tensor.ndim
            index[control] = value
            index = tuple(index)
            # |x, y⟩ -> |x, x + y⟩
            out[index] = np.roll(tensor[index], value, axis=axis)
        return out
    wire = gate.wires[0]
    return np.moveaxis(np.tensordot(gate_matrix(gate, q), tensor, axes=([1], [wire])), 0, wire)


def apply_circuit(C: CliffordCircuit, block: np.ndarray) -> np.ndarray:
    """C·block for a q^n × m block of column vectors, without forming C."""
    d = C.q**C.n
    block = np.asarray(block, dtype=complex)
    columns = block.reshape(d, -1)
    tensor = columns.reshape((C.q,) * C.n + (columns.shape[1],))
    for gate in C.gates:
        tensor = _apply_gate(tensor, gate, C.q)
    return tensor.reshape(block.shape)


def circuit_to_dense(C: CliffordCircuit, cap: int | None = None) -> DenseUnitary:
    """
    Dense unitary of a circuit.

    Raises:
        DimensionCapExceeded: if q^n exceeds the cap.
    """
    d = C.q**C.n
    check_cap(d, cap)
    logger.debug("Dense build of %d gates at dimension %d", len(C), d)
    return DenseUnitary(C.n, C.q, apply_circuit(C, np.eye(d, dtype=complex)))


def as_dense(backing: CliffordCircuit | DenseUnitary, cap: int | None = None) -> DenseUnitary:
    if isinstance(backing, DenseUnitary):
        check_cap(backing.dimension, cap)
        return backing
    return circuit_to_dense(backing, cap)


def pauli_to_dense(P: PauliOperator) -> np.ndarray:
    """ω_{q'}^p X^x Z^z as a dense matrix."""
    X, Z = gate_matrix("X", P.q), gate_matrix("Z", P.q)
    matrix = np.ones((1, 1), dtype=complex)
    for a, b in zip(P.x_vec.tolist(), P.z_vec.tolist()):
        wire = np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
        matrix = np.kron(matrix, wire)
    return np.exp(2j * np.pi * P.phase_exp / phase_modulus(P.q)) * matrix


def normalized_trace(U: DenseUnitary | np.ndarray) -> complex:
    matrix = U.matrix if isinstance(U, DenseUnitary) else np.asarray(U)
    return complex(np.trace(matrix) / matrix.shape[0])


def equal_up_to_global_phase(
    U: DenseUnitary | np.ndarray, V: DenseUnitary | np.ndarray, tol: float = PHASE_TOL
) -> bool:
    """True iff ‖U − e^{iφ}V‖_max ≤ tol for the phase read off V's largest entry."""
    u = U.matrix if isinstance(U, DenseUnitary) else np.asarray(U)
    v = V.matrix if isinstance(V, DenseUnitary) else np.asarray(V)
    if u.shape != v.shape:
        raise ValueError(f"Shape mismatch: {u.shape} vs {v.shape}")
    index = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(v[index]) <= tol:
        return bool(np.max(np.abs(u), initial=0.0) <= tol)
    ratio = u[index] / v[index]
    if abs(ratio) == 0:
        return False
    phase = ratio / abs(ratio)
    return bool(np.max(np.abs(u - phase * v)) <= tol)


def epr_statevector_probability(
    apply: Callable[[np.ndarray], np.ndarray], n: int, q: int
) -> float:
    """
    |⟨e|(U ⊗ I)|e⟩|² with |e⟩ = q^{-n/2} Σ_x |x⟩|x⟩, calling `apply` exactly once on the
    first register of the reshaped state.
    """
    d = q**n
    epr = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)
    evolved = np.asarray(apply(epr.reshape(d, d))).reshape(-1)
    return float(np.clip(abs(np.vdot(epr, evolved)) ** 2, 0.0, 1.0))


def epr_acceptance(
    U: DenseUnitary | CliffordCircuit,
    mode: str = "analytic",
    shots: int = DEFAULT_SHOTS,
    seed: int | np.random.Generator | None = 0,
    cap: int | None = None,
) -> float:
    """
    Acceptance probability of the EPR identity test.

    Args:
        - U: the tested unitary, dense or as a circuit.
        - mode: 'analytic' (|τ̂(U)|²), 'statevector' (explicit |e⟩) or 'sample' (Bernoulli
          estimate over `shots` runs).

    Raises:
        DimensionCapExceeded: if the statevector modes need (q^n)² beyond the cap.
        ValueError: for an unknown mode.
    """
    if mode not in EPR_MODES:
        raise ValueError(f"Unknown EPR mode {mode!r}; expected one of {EPR_MODES}")
    if mode == "analytic":
        return float(abs(normalized_trace(as_dense(U, cap))) ** 2)
    check_cap((U.q**U.n) ** 2, cap)
    if isinstance(U, CliffordCircuit):
        probability = epr_statevector_probability(lambda s: apply_circuit(U, s), U.n, U.q)
    else:
        probability = epr_statevector_probability(U.apply, U.n, U.q)
    if mode == "statevector":
        return probability
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return int(rng.binomial(shots, probability)) / shots


@dataclass(frozen=True, eq=False)
class PauliDecomposition:
    """
    Coefficients m_{a,b} of M = Σ m_{a,b} X^a Z^b, stored as an array of shape
    (q,)*n + (q,)*n indexed by (a, b).
    """

    n: int
    q: int
    coefficients: np.ndarray

    def coefficient(self, a, b) -> complex:
        return complex(self.coefficients[tuple(a) + tuple(b)])

    def nonzero(self, tol: float = COEFF_TOL) -> list[tuple[tuple[int, ...], tuple[int, ...], complex]]:
        terms = []
        for index in zip(*np.nonzero(np.abs(self.coefficients) > tol)):
            index = tuple(int(i) for i in index)
            terms.append((index[: self.n], index[self.n :], complex(self.coefficients[index])))
        return terms

    def parseval(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def reconstruct(self) -> np.ndarray:
        q, n = self.q, self.n
        d = q**n
        digits = np.indices((q,) * n).reshape(n, -1)
        matrix = np.zeros((d, d), dtype=complex)
        for a in np.ndindex(*(q,) * n):
            # M[x + a, x] = Σ_b m_{a,b} ω^{b·x}
            diagonal = d * np.fft.ifftn(self.coefficients[a]).reshape(-1)
            rows = np.ravel_multi_index((digits + np.array(a)[:, None]) % q, (q,) * n)
            matrix[rows, np.arange(d)] = diagonal
        return matrix


def pauli_decompose(M: DenseUnitary, cap: int | None = None) -> PauliDecomposition:
    """
    m_{a,b} = τ̂((X^aZ^b)†·M) for all (a, b). Each shifted diagonal M[x + a, x] is Fourier
    transformed over the digits of x.

    Raises:
        DimensionCapExceeded: if q^n exceeds the cap.
    """
    q, n = M.q, M.n
    d = q**n
    check_cap(d, cap)
    digits = np.indices((q,) * n).reshape(n, -1)
    coefficients = np.zeros((q,) * (2 * n), dtype=complex)
    for a in np.ndindex(*(q,) * n):
        rows = np.ravel_multi_index((digits + np.array(a)[:, None]) % q, (q,) * n)
        diagonal = M.matrix[rows, np.arange(d)].reshape((q,) * n)
        coefficients[a] = np.fft.fftn(diagonal) / d
    return PauliDecomposition(n, q, coefficients)


def is_pauli_unitary(U: DenseUnitary, cap: int | None = None) -> bool:
    """Exactly one nonzero Pauli coefficient, of modulus 1."""
    terms = pauli_decompose(U, cap).nonzero()
    return len(terms) == 1 and abs(abs(terms[0][2]) - 1) <= COEFF_TOL


def commutator_identity_probability(U: DenseUnitary, cap: int | None = None) -> Fraction:
    """Exact fraction of basis Paulis P with U†P†UP equal to the identity up to phase."""
    check_cap(U.dimension, cap)
    identity = np.eye(U.dimension)
    u, u_dag = U.matrix, U.matrix.conj().T
    hits = 0
    for P in iter_basis_paulis(U.n, U.q):
        p = pauli_to_dense(P)
        hits += equal_up_to_global_phase(u_dag @ p.conj().T @ u @ p, identity)
    return Fraction(hits, U.q ** (2 * U.n))


def random_unitary(n: int, q: int, seed: int | np.random.Generator | None = 0) -> DenseUnitary:
    """Haar-random unitary on n qudits."""
    matrix = unitary_group.rvs(q**n, random_state=seed)
    return DenseUnitary(n, q, np.atleast_2d(matrix))


def t_gate_unitary(n: int, q: int) -> DenseUnitary:
    """diag(1, e^{iπ/4}, 1, …) on wire 0, identity elsewhere. Neither Pauli nor Clifford."""
    single = np.ones(q, dtype=complex)
    single[1] = np.exp(1j * np.pi / 4)
    return DenseUnitary(n, q, np.kron(np.diag(single), np.eye(q ** (n - 1))))


def load_matrix(path: str | Path) -> DenseUnitary:
    """
    Read a unitary from JSON {"n": …, "q": …, "re": [[…]], "im": [[…]]} (row-major).

    Raises:
        MatrixFormatError: for missing keys, wrong shapes, or a matrix that is not unitary
        within LOAD_UNITARY_TOL.
    """
    try:
        payload = json.loads(Path(path).read_text())
        n, q = int(payload["n"]), int(payload["q"])
        matrix = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"{path}: malformed matrix file ({exc})") from exc
    try:
        return DenseUnitary(n, q, matrix, tol=LOAD_UNITARY_TOL)
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: {exc}") from exc


def save_matrix(U: DenseUnitary, path: str | Path) -> None:
    payload = {
        "n": U.n,
        "q": U.q,
        "re": U.matrix.real.tolist(),
        "im": U.matrix.imag.tolist(),
    }
    Path(path).write_text(json.dumps(payload))


def wilson_interval(
    accepts: int, trials: int, confidence: float = WILSON_CONFIDENCE
) -> tuple[float, float]:
    interval = binomtest(accepts, trials).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    return float(interval.low), float(interval.high)
