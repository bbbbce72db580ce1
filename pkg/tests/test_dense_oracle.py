import json
import math
from fractions import Fraction

import numpy as np
import pytest

from src.clifford import CNOT, F, S, X, CliffordCircuit, random_clifford_circuit
from src.config import DEFAULT_DIM_CAP, resolve_cap
from src.dense_oracle import (
    DenseUnitary,
    DimensionCapExceeded,
    MatrixFormatError,
    circuit_to_dense,
    commutator_identity_probability,
    epr_acceptance,
    epr_statevector_probability,
    equal_up_to_global_phase,
    gate_matrix,
    is_pauli_unitary,
    load_matrix,
    normalized_trace,
    pauli_decompose,
    pauli_to_dense,
    random_unitary,
    save_matrix,
    t_gate_unitary,
    wilson_interval,
)
from src.modring import ModulusError
from src.pauli import PauliOperator


def circuit(q, *gates, n=1):
    return CliffordCircuit(n, q, gates)


def test_gate_matrices():
    assert np.allclose(circuit_to_dense(circuit(2)).matrix, np.eye(2))
    hadamard = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    np.testing.assert_allclose(circuit_to_dense(circuit(2, F(0))).matrix, hadamard, atol=1e-12)
    omega = np.exp(2j * np.pi / 3)
    np.testing.assert_allclose(
        circuit_to_dense(circuit(3, S(0))).matrix, np.diag([1, 1, omega]), atol=1e-12
    )
    np.testing.assert_allclose(gate_matrix("S", 2), np.diag([1, 1j]))


@pytest.mark.parametrize("control, target", [(0, 1), (1, 0)])
def test_cnot_adds_control_into_target(control, target):
    U = circuit_to_dense(circuit(3, CNOT(control, target), n=2)).matrix
    for x in range(3):
        for y in range(3):
            digits = [x, y]
            out = list(digits)
            out[target] = (digits[target] + digits[control]) % 3
            column = np.zeros(9)
            column[3 * out[0] + out[1]] = 1
            np.testing.assert_allclose(U[:, 3 * x + y], column, atol=1e-12)
    if control == 0:
        np.testing.assert_allclose(gate_matrix("CNOT", 3), U, atol=1e-12)


def test_normalized_trace_examples():
    assert normalized_trace(circuit_to_dense(circuit(3, n=2))) == pytest.approx(1)
    assert normalized_trace(circuit_to_dense(circuit(2, S(0)))) == pytest.approx((1 + 1j) / 2)
    assert normalized_trace(circuit_to_dense(circuit(2, X(0)))) == pytest.approx(0)


def test_trace_bound_and_equality_case():
    rng = np.random.default_rng(3)
    for q in (2, 3):
        for _ in range(20):
            U = circuit_to_dense(random_clifford_circuit(2, q, 10, rng))
            magnitude = abs(normalized_trace(U))
            assert magnitude <= 1 + 1e-12
            assert (abs(magnitude - 1) <= 1e-9) == equal_up_to_global_phase(U, np.eye(q**2))


def test_equal_up_to_global_phase():
    V = random_unitary(1, 3, seed=1)
    assert equal_up_to_global_phase(V, V)
    assert equal_up_to_global_phase(1j * V.matrix, V)
    assert not equal_up_to_global_phase(circuit_to_dense(circuit(2, X(0))), np.eye(2))
    assert not equal_up_to_global_phase(2 * V.matrix, V)


@pytest.mark.parametrize("mode", ["analytic", "statevector", "sample"])
def test_epr_acceptance_identity(mode):
    assert epr_acceptance(circuit_to_dense(circuit(3, n=2)), mode, shots=100) == pytest.approx(1)


def test_epr_acceptance_examples():
    s_gate = circuit_to_dense(circuit(2, S(0)))
    assert epr_acceptance(s_gate, "analytic") == pytest.approx(0.5, abs=1e-12)
    assert epr_acceptance(s_gate, "statevector") == pytest.approx(0.5, abs=1e-12)
    assert epr_acceptance(circuit(2, S(0)), "statevector") == pytest.approx(0.5, abs=1e-12)
    for mode in ("analytic", "statevector", "sample"):
        assert epr_acceptance(circuit_to_dense(circuit(3, X(0))), mode) <= 1e-12


def test_epr_sampling_is_seeded_and_accurate():
    s_gate = circuit_to_dense(circuit(2, S(0)))
    shots = 10_000
    rate = epr_acceptance(s_gate, "sample", shots=shots, seed=5)
    assert rate == epr_acceptance(s_gate, "sample", shots=shots, seed=5)
    assert abs(rate - 0.5) <= 4 * math.sqrt(0.25 / shots)


def test_statevector_epr_is_a_single_query():
    U = random_unitary(2, 2, seed=2)
    calls = []

    def apply(state):
        calls.append(state.shape)
        return U.apply(state)

    probability = epr_statevector_probability(apply, 2, 2)
    assert calls == [(4, 4)]
    assert probability == pytest.approx(abs(normalized_trace(U)) ** 2, abs=1e-12)


def test_epr_modes_respect_cap():
    U = random_unitary(2, 3, seed=0)
    epr_acceptance(U, "analytic", cap=9)
    with pytest.raises(DimensionCapExceeded):
        epr_acceptance(U, "statevector", cap=80)
    with pytest.raises(ValueError):
        epr_acceptance(U, "bogus")


def test_dense_cap():
    with pytest.raises(DimensionCapExceeded) as info:
        circuit_to_dense(circuit(2, n=3), cap=4)
    assert (info.value.dimension, info.value.cap) == (8, 4)


def test_dense_cap_from_environment(monkeypatch, caplog):
    monkeypatch.setenv("QSUB_DIM_CAP", "4")
    with pytest.raises(DimensionCapExceeded):
        circuit_to_dense(circuit(2, n=3))

    monkeypatch.setenv("QSUB_DIM_CAP", "abc")
    assert resolve_cap(None) == DEFAULT_DIM_CAP
    assert "QSUB_DIM_CAP" in caplog.text
    monkeypatch.setenv("QSUB_DIM_CAP", "-3")
    assert resolve_cap(None) == DEFAULT_DIM_CAP
    assert resolve_cap(7) == 7


def test_pauli_decomposition_examples():
    identity = pauli_decompose(circuit_to_dense(circuit(2))).nonzero()
    assert len(identity) == 1
    a, b, value = identity[0]
    assert (a, b) == ((0,), (0,))
    assert value == pytest.approx(1)

    hadamard = pauli_decompose(circuit_to_dense(circuit(2, F(0))))
    terms = {(a, b): value for a, b, value in hadamard.nonzero()}
    assert set(terms) == {((1,), (0,)), ((0,), (1,))}
    assert all(value == pytest.approx(1 / math.sqrt(2)) for value in terms.values())

    s_gate = pauli_decompose(circuit_to_dense(circuit(2, S(0))))
    assert s_gate.coefficient([0], [0]) == pytest.approx((1 + 1j) / 2)
    assert s_gate.coefficient([0], [1]) == pytest.approx((1 - 1j) / 2)
    assert len(s_gate.nonzero()) == 2


@pytest.mark.parametrize("n, q", [(1, 2), (2, 2), (3, 2), (1, 3), (2, 3), (1, 5), (2, 5)])
def test_decomposition_reconstructs_and_satisfies_parseval(n, q):
    U = random_unitary(n, q, seed=10 * n + q)
    decomposition = pauli_decompose(U)
    assert decomposition.parseval() == pytest.approx(1, abs=1e-9)
    np.testing.assert_allclose(decomposition.reconstruct(), U.matrix, atol=1e-9)


def test_decomposition_coefficients_are_normalized_traces():
    U = random_unitary(2, 3, seed=4)
    decomposition = pauli_decompose(U)
    P = PauliOperator.from_exponents([1, 2], [0, 1], 3)
    expected = np.trace(pauli_to_dense(P).conj().T @ U.matrix) / 9
    assert decomposition.coefficient([1, 2], [0, 1]) == pytest.approx(expected, abs=1e-12)


def test_is_pauli_unitary():
    assert is_pauli_unitary(circuit_to_dense(circuit(3, X(0))))
    assert is_pauli_unitary(DenseUnitary(1, 3, pauli_to_dense(PauliOperator.from_exponents([2], [1], 3, 1))))
    assert not is_pauli_unitary(circuit_to_dense(circuit(3, S(0))))
    assert not is_pauli_unitary(t_gate_unitary(1, 2))


def test_commutator_probabilities():
    pauli = DenseUnitary(2, 3, pauli_to_dense(PauliOperator.from_exponents([1, 0], [2, 1], 3)))
    assert commutator_identity_probability(pauli) == 1
    assert commutator_identity_probability(t_gate_unitary(1, 2)) == Fraction(1, 2)
    # H commutes up to phase with I and with XZ
    assert commutator_identity_probability(circuit_to_dense(circuit(2, F(0)))) == Fraction(1, 2)
    assert commutator_identity_probability(circuit_to_dense(circuit(3, F(0)))) == Fraction(1, 9)


def test_random_unitary_and_t_gate():
    U = random_unitary(2, 2, seed=3)
    assert U.matrix.shape == (4, 4)
    np.testing.assert_allclose(U.matrix, random_unitary(2, 2, seed=3).matrix)
    T = t_gate_unitary(2, 3)
    assert T.matrix[1, 1] == pytest.approx(1)
    assert T.matrix[3, 3] == pytest.approx(np.exp(1j * np.pi / 4))


def test_dense_unitary_validation():
    with pytest.raises(ValueError):
        DenseUnitary(1, 2, np.ones((2, 2)))
    with pytest.raises(ValueError):
        DenseUnitary(1, 3, np.eye(2))


def test_matrix_file_round_trip(tmp_path):
    U = random_unitary(1, 3, seed=8)
    path = tmp_path / "u.json"
    save_matrix(U, path)
    loaded = load_matrix(path)
    assert (loaded.n, loaded.q) == (1, 3)
    np.testing.assert_allclose(loaded.matrix, U.matrix)


def test_matrix_loader_tolerance_and_errors(tmp_path):
    nearly = np.eye(2) + 1e-8
    path = tmp_path / "near.json"
    path.write_text(json.dumps({"n": 1, "q": 2, "re": nearly.tolist(), "im": np.zeros((2, 2)).tolist()}))
    assert load_matrix(path).n == 1

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 1, "q": 2, "re": [[1, 1], [0, 1]], "im": [[0, 0], [0, 0]]}))
    with pytest.raises(MatrixFormatError):
        load_matrix(bad)
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"n": 1, "q": 2, "re": [[1, 0], [0, 1]]}))
    with pytest.raises(MatrixFormatError):
        load_matrix(missing)
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    with pytest.raises(MatrixFormatError):
        load_matrix(garbage)


@pytest.mark.parametrize("q", [4, 6])
def test_matrix_loader_rejects_non_prime_arity(tmp_path, q):
    path = tmp_path / f"arity{q}.json"
    path.write_text(json.dumps({"n": 1, "q": q, "re": np.eye(q).tolist(), "im": np.zeros((q, q)).tolist()}))
    with pytest.raises(MatrixFormatError, match="prime"):
        load_matrix(path)
    with pytest.raises(ModulusError):
        DenseUnitary(1, q, np.eye(q))


def test_wilson_interval_brackets_rate():
    low, high = wilson_interval(30, 100)
    assert low < 0.3 < high
    assert wilson_interval(0, 1000)[0] == pytest.approx(0, abs=1e-12)
