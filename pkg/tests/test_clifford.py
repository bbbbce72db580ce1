import numpy as np
import pytest

from src.clifford import (
    CNOT,
    F,
    S,
    X,
    Z,
    CircuitParseError,
    CliffordCircuit,
    build_commutator_circuit,
    build_ctp_to_ptp_circuit,
    conjugate_by_gate,
    conjugate_directly,
    conjugate_pauli,
    conjugation_tableau,
    dagger,
    format_circuit,
    is_symplectic,
    load_circuit,
    parse_circuit,
    pauli_circuit,
    random_clifford_circuit,
    save_circuit,
    wb_identity_test,
    wb_pauli_test,
)
from src.dense_oracle import equal_up_to_global_phase, pauli_to_dense
from src.pauli import PauliOperator, iter_basis_paulis, sample_basis_pauli
from tests.helpers import dense

GATES = [F(0), S(0), X(0), Z(0), F(1), S(1), CNOT(0, 1), CNOT(1, 0)]


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("gate", GATES, ids=str)
def test_rewrite_table_matches_dense_conjugation(q, gate):
    G = dense(CliffordCircuit(2, q, (gate,)))
    for P in iter_basis_paulis(2, q):
        P = P.with_phase(1)
        expected = G @ pauli_to_dense(P) @ G.conj().T
        np.testing.assert_allclose(pauli_to_dense(conjugate_by_gate(gate, P)), expected, atol=1e-9)


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_tableau_conjugation_agrees_with_direct_and_dense(q, n):
    rng = np.random.default_rng(7 * q + n)
    for _ in range(10):
        C = random_clifford_circuit(n, q, 15, rng)
        T = conjugation_tableau(C)
        U = dense(C)
        assert is_symplectic(T)
        for _ in range(5):
            P = sample_basis_pauli(n, q, rng).with_phase(int(rng.integers(0, 2)))
            image = conjugate_pauli(T, P)
            assert image == conjugate_directly(C, P)
            np.testing.assert_allclose(
                pauli_to_dense(image), U @ pauli_to_dense(P) @ U.conj().T, atol=1e-9
            )


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("n", [1, 2])
def test_tableau_conjugates_every_basis_pauli(q, n):
    rng = np.random.default_rng(30 + 7 * q + n)
    for _ in range(3):
        C = random_clifford_circuit(n, q, int(rng.integers(0, 31)), rng)
        T = conjugation_tableau(C)
        U = dense(C)
        for P in iter_basis_paulis(n, q):
            np.testing.assert_allclose(
                pauli_to_dense(conjugate_pauli(T, P)), U @ pauli_to_dense(P) @ U.conj().T, atol=1e-9
            )


@pytest.mark.parametrize("q", [2, 3, 5])
def test_tableau_conjugation_respects_products(q):
    rng = np.random.default_rng(50 + q)
    for _ in range(10):
        C = random_clifford_circuit(2, q, 20, rng)
        T = conjugation_tableau(C)
        for _ in range(10):
            P, Q = (
                sample_basis_pauli(2, q, rng).with_phase(int(rng.integers(0, 4 if q == 2 else q)))
                for _ in range(2)
            )
            assert conjugate_pauli(T, P * Q) == conjugate_pauli(T, P) * conjugate_pauli(T, Q)


@pytest.mark.parametrize(
    "q, gates, expected",
    [
        (2, (), True),
        (2, (F(0),) * 2, True),
        (3, (F(0),) * 2, False),
        (3, (F(0),) * 4, True),
        (2, (S(0),) * 2, False),
        (2, (S(0),) * 4, True),
        (5, (S(0),) * 5, True),
        (3, (X(0),) * 3, True),
        (3, (X(0), Z(0)), False),
    ],
)
def test_wb_identity_test(q, gates, expected):
    assert wb_identity_test(CliffordCircuit(1, q, gates)) is expected


@pytest.mark.parametrize(
    "gates, expected",
    [((X(0),), True), ((Z(0), X(0)), True), ((S(0),), False), ((F(0),), False), ((), True)],
)
def test_wb_pauli_test(gates, expected):
    assert wb_pauli_test(CliffordCircuit(1, 3, gates)) is expected


def test_cnot_pair_is_not_pauli():
    assert not wb_pauli_test(CliffordCircuit(2, 2, (CNOT(0, 1),)))
    assert wb_identity_test(CliffordCircuit(2, 2, (CNOT(0, 1), CNOT(0, 1))))


@pytest.mark.parametrize("q", [2, 3, 5])
def test_dagger_inverts(q):
    rng = np.random.default_rng(q)
    C = random_clifford_circuit(2, q, 12, rng)
    assert wb_identity_test(C + dagger(C))
    np.testing.assert_allclose(dense(dagger(C)), dense(C).conj().T, atol=1e-9)


@pytest.mark.parametrize("q", [2, 3])
def test_pauli_circuit_realizes_basis_pauli(q):
    for P in iter_basis_paulis(2, q):
        np.testing.assert_allclose(dense(pauli_circuit(P)), pauli_to_dense(P), atol=1e-9)


@pytest.mark.parametrize("q", [2, 3])
def test_commutator_circuit(q):
    rng = np.random.default_rng(20 + q)
    C = random_clifford_circuit(2, q, 10, rng)
    P = sample_basis_pauli(2, q, rng)
    U, p = dense(C), pauli_to_dense(P)
    expected = p.conj().T @ U.conj().T @ p @ U
    np.testing.assert_allclose(dense(build_commutator_circuit(C, P)), expected, atol=1e-9)


def test_commutator_circuit_requires_phase_free_pauli():
    C = CliffordCircuit(1, 3, (F(0),))
    with pytest.raises(ValueError):
        build_commutator_circuit(C, PauliOperator.from_exponents([1], [0], 3, phase_exp=1))
    with pytest.raises(ValueError):
        build_commutator_circuit(C, PauliOperator.identity(2, 3))


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("n", [1, 2])
def test_ctp_to_ptp_circuit_shape(q, n):
    C = random_clifford_circuit(n, q, 6, seed=n)
    reduced = build_ctp_to_ptp_circuit(C)
    assert reduced.n == 2 * n * n
    assert len(reduced) == 2 * n * (len(C) + len(dagger(C))) + 2 * n
    assert wb_pauli_test(reduced)


def test_ctp_to_ptp_blocks_conjugate_generators():
    C = CliffordCircuit(1, 3, (S(0), F(0)))
    U = dense(C)
    reduced = dense(build_ctp_to_ptp_circuit(C))
    X1, Z1 = pauli_to_dense(PauliOperator.generator_x(1, 3, 0)), pauli_to_dense(
        PauliOperator.generator_z(1, 3, 0)
    )
    expected = np.kron(U.conj().T @ X1 @ U, U.conj().T @ Z1 @ U)
    assert equal_up_to_global_phase(reduced, expected)


def test_random_circuit_is_seeded():
    assert random_clifford_circuit(3, 5, 30, seed=4) == random_clifford_circuit(3, 5, 30, seed=4)
    single = random_clifford_circuit(1, 2, 50, seed=1)
    assert len(single) == 50
    assert single.count("CNOT") == 0
    with pytest.raises(ValueError):
        random_clifford_circuit(1, 2, -1)


def test_circuit_validation():
    with pytest.raises(ValueError):
        CliffordCircuit(1, 4, ())
    with pytest.raises(ValueError):
        CliffordCircuit(2, 3, (CNOT(1, 1),))
    with pytest.raises(ValueError):
        CliffordCircuit(2, 3, (X(2),))


def test_format_parse_round_trip(tmp_path):
    C = random_clifford_circuit(3, 3, 25, seed=9)
    text = format_circuit(C)
    assert parse_circuit(text) == C
    assert format_circuit(parse_circuit(text)) == text
    path = tmp_path / "c.qc"
    save_circuit(C, path)
    assert load_circuit(path) == C


def test_parse_ignores_comments_and_blank_lines():
    text = "# header comment\n\nqudits 2 3  # two qutrits\nF 0\n\nCNOT 0 1 # entangle\n"
    assert parse_circuit(text) == CliffordCircuit(2, 3, (F(0), CNOT(0, 1)))


@pytest.mark.parametrize(
    "text, line",
    [
        ("qudits 1 2\nF\n", 2),
        ("F 0\n", 1),
        ("qudits 1 4\n", 1),
        ("qudits 1 3\nH 0\n", 2),
        ("qudits 2 3\nX 0\nX 3\n", 3),
        ("qudits 2 3\nCNOT 0 0\n", 2),
        ("qudits 1 3\nS a\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(CircuitParseError) as info:
        parse_circuit(text)
    assert info.value.line_number == line
    assert f"line {line}" in str(info.value)


def test_parse_rejects_empty_text():
    with pytest.raises(CircuitParseError):
        parse_circuit("# nothing\n")
