"""Shared builders for the test suites."""

import itertools

import numpy as np

from src.clifford import CliffordCircuit, Gate, inverse_gates, random_clifford_circuit
from src.dense_oracle import circuit_to_dense
from src.phasepoly import QuadraticPhasePolynomial


def dense(C: CliffordCircuit) -> np.ndarray:
    return circuit_to_dense(C).matrix


def random_gate(n: int, q: int, rng: np.random.Generator) -> Gate:
    return random_clifford_circuit(n, q, 1, rng).gates[0]


def near_identity_circuit(
    n: int, q: int, pairs: int, rng: np.random.Generator, perturb: bool = False
) -> CliffordCircuit:
    """
    Nested G·G† insertions, which multiply to the identity; with `perturb` one S gate is
    slipped in at a random position.
    """
    gates: list[Gate] = []
    for _ in range(pairs):
        gate = random_gate(n, q, rng)
        position = int(rng.integers(len(gates) + 1))
        gates[position:position] = [gate, *inverse_gates(gate, q)]
    if perturb:
        position = int(rng.integers(len(gates) + 1))
        gates.insert(position, Gate("S", (int(rng.integers(n)),)))
    return CliffordCircuit(n, q, tuple(gates))


def respectful_polynomials(num_vars: int):
    """Every respectful mod-4 polynomial in num_vars variables."""
    pairs = list(itertools.combinations(range(num_vars), 2))
    for square in itertools.product(range(4), repeat=num_vars):
        for cross_bits in itertools.product((0, 2), repeat=len(pairs)):
            cross = np.zeros((num_vars, num_vars), dtype=np.int64)
            for (i, j), value in zip(pairs, cross_bits):
                cross[i, j] = cross[j, i] = value
            for linear in itertools.product((0, 2), repeat=num_vars):
                for constant in range(4):
                    yield QuadraticPhasePolynomial(4, square, cross, linear, constant)
