"""
Clifford circuits over {F, S, CNOT} (plus X and Z) on n qudits of prime arity q, their
conjugation tableaus, white-box identity and Pauli tests, and the circuit constructions
used by the reductions between subgroup-testing problems.

Gate semantics:
    F|x⟩ = q^{-1/2} Σ_a ω^{ax}|a⟩      CNOT|x, y⟩ = |x, x + y⟩
    S|x⟩ = ω^{x(x-1)/2}|x⟩ (odd q)     S|x⟩ = i^x|x⟩ (q = 2)
    X|x⟩ = |x + 1⟩                      Z|x⟩ = ω^x|x⟩

Circuit text format, one directive per line, '#' starts a comment:
    qudits <n> <q>
    F <i> | S <i> | CNOT <c> <t> | X <i> | Z <i>
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from src import get_logger
from src.modring import ModulusError, ModVector, PHASE_RING, validate_modulus
from src.pauli import (
    PauliOperator,
    multiply,
    omega_units,
    power,
    symplectic_exponent,
)

logger = get_logger(__name__)

SINGLE_WIRE_GATES = ("F", "S", "X", "Z")
GATE_NAMES = SINGLE_WIRE_GATES + ("CNOT",)


class CircuitParseError(ValueError):
    """Raised for malformed circuit text; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Gate:
    name: str
    wires: tuple[int, ...]

    def __str__(self) -> str:
        return " ".join([self.name, *map(str, self.wires)])

    def shifted(self, offset: int) -> Gate:
        return Gate(self.name, tuple(w + offset for w in self.wires))


def F(wire: int) -> Gate:
    return Gate("F", (wire,))


def S(wire: int) -> Gate:
    return Gate("S", (wire,))


def X(wire: int) -> Gate:
    return Gate("X", (wire,))


def Z(wire: int) -> Gate:
    return Gate("Z", (wire,))


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def _check_arity(q: int) -> int:
    q = validate_modulus(q)
    if q == PHASE_RING:
        raise ModulusError("Circuit arity must be prime.")
    return q


@dataclass(frozen=True)
class CliffordCircuit:
    """An ordered gate list on n wires of prime arity q; gates[0] is applied first."""

    n: int
    q: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _check_arity(self.q))
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 1:
            raise ValueError(f"A circuit needs at least one wire, got n={self.n}")
        for gate in self.gates:
            _validate_gate(gate, self.n)

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: CliffordCircuit) -> CliffordCircuit:
        if (self.n, self.q) != (other.n, other.q):
            raise ValueError("Cannot concatenate circuits of different shape.")
        return CliffordCircuit(self.n, self.q, self.gates + other.gates)

    def count(self, name: str) -> int:
        return sum(gate.name == name for gate in self.gates)


def _validate_gate(gate: Gate, n: int) -> None:
    if gate.name not in GATE_NAMES:
        raise ValueError(f"Unknown gate {gate.name!r}")
    expected = 2 if gate.name == "CNOT" else 1
    if len(gate.wires) != expected:
        raise ValueError(f"{gate.name} takes {expected} wire(s), got {gate.wires}")
    if any(not 0 <= w < n for w in gate.wires):
        raise ValueError(f"{gate} addresses a wire outside [0, {n})")
    if gate.name == "CNOT" and gate.wires[0] == gate.wires[1]:
        raise ValueError(f"CNOT control equals target: {gate}")


# Per-gate conjugation rewrites G·P·G†, acting on the exponent arrays of one Pauli.
# Phases are in ω_{q'} units. Each rule was fixed against dense conjugation on n <= 2
# (tests/test_clifford.py re-derives all of them).
Rewrite = Callable[[np.ndarray, np.ndarray, int, tuple[int, ...], int], int]


def _rewrite_f(x: np.ndarray, z: np.ndarray, phase: int, wires: tuple[int, ...], q: int) -> int:
    # (a, b) -> (-b, a), phase -ab
    (i,) = wires
    a, b = int(x[i]), int(z[i])
    x[i], z[i] = (-b) % q, a
    return phase - omega_units(q) * a * b


def _rewrite_s(x: np.ndarray, z: np.ndarray, phase: int, wires: tuple[int, ...], q: int) -> int:
    # (a, b) -> (a, a + b); phase a (q = 2, ω_4 units) or a(a-1)/2 (odd q)
    (i,) = wires
    a = int(x[i])
    z[i] = (z[i] + a) % q
    return phase + (a if q == 2 else a * (a - 1) // 2)


def _rewrite_x(x: np.ndarray, z: np.ndarray, phase: int, wires: tuple[int, ...], q: int) -> int:
    (i,) = wires
    return phase - omega_units(q) * int(z[i])


def _rewrite_z(x: np.ndarray, z: np.ndarray, phase: int, wires: tuple[int, ...], q: int) -> int:
    (i,) = wires
    return phase + omega_units(q) * int(x[i])


def _rewrite_cnot(
    x: np.ndarray, z: np.ndarray, phase: int, wires: tuple[int, ...], q: int
) -> int:
    # X_c -> X_c X_t, Z_t -> Z_c^{-1} Z_t
    c, t = wires
    x[t] = (x[t] + x[c]) % q
    z[c] = (z[c] - z[t]) % q
    return phase


REWRITE_TABLE: dict[str, Rewrite] = {
    "F": _rewrite_f,
    "S": _rewrite_s,
    "X": _rewrite_x,
    "Z": _rewrite_z,
    "CNOT": _rewrite_cnot,
}


def conjugate_by_gate(gate: Gate, P: PauliOperator) -> PauliOperator:
    """G·P·G† for a single gate."""
    x = P.x_vec.entries.copy()
    z = P.z_vec.entries.copy()
    phase = REWRITE_TABLE[gate.name](x, z, P.phase_exp, gate.wires, P.q)
    return PauliOperator(P.n, P.q, phase, ModVector(P.q, x), ModVector(P.q, z))


def conjugate_directly(C: CliffordCircuit, P: PauliOperator) -> PauliOperator:
    """C·P·C† by rewriting P gate by gate."""
    for gate in C.gates:
        P = conjugate_by_gate(gate, P)
    return P


@dataclass(frozen=True)
class ConjugationTableau:
    """Images C·P_i^x·C† and C·P_i^z·C† of the 2n single-wire generators."""

    n: int
    q: int
    x_images: tuple[PauliOperator, ...]
    z_images: tuple[PauliOperator, ...]

    @property
    def images(self) -> tuple[PauliOperator, ...]:
        return self.x_images + self.z_images

    def generators(self) -> tuple[PauliOperator, ...]:
        return tuple(PauliOperator.generator_x(self.n, self.q, i) for i in range(self.n)) + tuple(
            PauliOperator.generator_z(self.n, self.q, i) for i in range(self.n)
        )


def conjugation_tableau(C: CliffordCircuit) -> ConjugationTableau:
    """
    Conjugation tableau of a circuit, built by applying the per-gate rewrite table to
    every generator image; cost O(n·|gates|).
    """
    x_images = [PauliOperator.generator_x(C.n, C.q, i) for i in range(C.n)]
    z_images = [PauliOperator.generator_z(C.n, C.q, i) for i in range(C.n)]
    for gate in C.gates:
        x_images = [conjugate_by_gate(gate, image) for image in x_images]
        z_images = [conjugate_by_gate(gate, image) for image in z_images]
    return ConjugationTableau(C.n, C.q, tuple(x_images), tuple(z_images))


def conjugate_pauli(T: ConjugationTableau, P: PauliOperator) -> PauliOperator:
    """
    Image of P under the tableau's conjugation: P's own phase times
    Π_i image(X_i)^{a_i} · Π_i image(Z_i)^{b_i}, multiplied in that fixed order.
    """
    if (P.n, P.q) != (T.n, T.q):
        raise ValueError(f"Pauli on (n={P.n}, q={P.q}) vs tableau (n={T.n}, q={T.q})")
    result = PauliOperator.identity(T.n, T.q).with_phase(P.phase_exp)
    for image, exponent in zip(T.x_images, P.x_vec.tolist()):
        result = multiply(result, power(image, exponent))
    for image, exponent in zip(T.z_images, P.z_vec.tolist()):
        result = multiply(result, power(image, exponent))
    return result


def is_symplectic(T: ConjugationTableau) -> bool:
    """Commutation exponents among the images equal those among the generators."""
    images, generators = T.images, T.generators()
    return all(
        symplectic_exponent(images[i], images[j])
        == symplectic_exponent(generators[i], generators[j])
        for i in range(len(images))
        for j in range(i + 1, len(images))
    )


def wb_identity_test(C: CliffordCircuit) -> bool:
    """
    White-box identity test: accept iff every generator is its own image with phase 0,
    i.e. f(a,b) = a, g(a,b) = b and h ≡ 0.
    """
    T = conjugation_tableau(C)
    accept = all(image == generator for image, generator in zip(T.images, T.generators()))
    logger.debug("WB identity test on %d gates (n=%d, q=%d): %s", len(C), C.n, C.q, accept)
    return accept


def wb_pauli_test(C: CliffordCircuit) -> bool:
    """White-box Pauli test: accept iff every generator image keeps its exponent vectors."""
    T = conjugation_tableau(C)
    accept = all(
        image.x_vec == generator.x_vec and image.z_vec == generator.z_vec
        for image, generator in zip(T.images, T.generators())
    )
    logger.debug("WB Pauli test on %d gates (n=%d, q=%d): %s", len(C), C.n, C.q, accept)
    return accept


def gate_order(name: str, q: int) -> int:
    """Multiplicative order of a gate: F^4 = I, S^q (odd) / S^4 (q = 2), others q."""
    if name == "F":
        return 4
    if name == "S" and q == 2:
        return 4
    return q


def inverse_gates(gate: Gate, q: int) -> list[Gate]:
    return [gate] * (gate_order(gate.name, q) - 1)


def dagger(C: CliffordCircuit) -> CliffordCircuit:
    """C† as reversed per-gate inverses, each realized by order-minus-one repetition."""
    gates: list[Gate] = []
    for gate in reversed(C.gates):
        gates.extend(inverse_gates(gate, C.q))
    return CliffordCircuit(C.n, C.q, tuple(gates))


def pauli_circuit(P: PauliOperator) -> CliffordCircuit:
    """Gates realizing the basis Pauli X^x Z^z (phase ignored): the Z block runs first."""
    gates = [Z(i) for i, b in enumerate(P.z_vec.tolist()) for _ in range(b)]
    gates += [X(i) for i, a in enumerate(P.x_vec.tolist()) for _ in range(a)]
    return CliffordCircuit(P.n, P.q, tuple(gates))


def build_commutator_circuit(C: CliffordCircuit, P: PauliOperator) -> CliffordCircuit:
    """
    C ∥ P ∥ C† ∥ P† in time order, i.e. the operator P†·C†·P·C. It lies in 𝓘 exactly
    when C and P commute up to phase.

    Raises:
        ValueError: if P carries a phase or does not match the circuit's shape.
    """
    if (P.n, P.q) != (C.n, C.q):
        raise ValueError(f"Pauli on (n={P.n}, q={P.q}) vs circuit (n={C.n}, q={C.q})")
    if P.phase_exp:
        raise ValueError("Commutator circuits take basis Paulis (phase 0).")
    P_gates = pauli_circuit(P)
    result = C + P_gates + dagger(C) + dagger(P_gates)
    logger.debug("Commutator circuit with %s: %d gates", P, len(result))
    return result


def build_ctp_to_ptp_circuit(C: CliffordCircuit) -> CliffordCircuit:
    """
    Circuit on 2n blocks of n wires: C on every block, then X on wire i of block i and
    Z on wire i of block n + i, then C† on every block. Each block realizes the
    conjugate of a single-wire generator, so the whole circuit is Pauli iff C normalizes
    the generators.
    """
    n, blocks = C.n, 2 * C.n
    width = blocks * n
    inverse = dagger(C)
    gates: list[Gate] = []
    for block in range(blocks):
        gates.extend(gate.shifted(block * n) for gate in C.gates)
    for i in range(n):
        gates.append(X(i * n + i))
    for i in range(n):
        gates.append(Z((n + i) * n + i))
    for block in range(blocks):
        gates.extend(gate.shifted(block * n) for gate in inverse.gates)
    result = CliffordCircuit(width, C.q, tuple(gates))
    logger.debug("CTP->PTP circuit: %d wires, %d gates from %d", width, len(result), len(C))
    return result


def random_clifford_circuit(
    n: int, q: int, depth: int, seed: int | np.random.Generator | None = 0
) -> CliffordCircuit:
    """
    depth gates drawn uniformly from {F(i), S(i), CNOT(c, t)} with uniform wires
    (CNOT only when n ≥ 2).
    """
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    kinds = ("F", "S", "CNOT") if n >= 2 else ("F", "S")
    gates: list[Gate] = []
    for _ in range(depth):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind == "CNOT":
            control = int(rng.integers(n))
            target = int(rng.integers(n - 1))
            target += target >= control
            gates.append(CNOT(control, target))
        else:
            gates.append(Gate(kind, (int(rng.integers(n)),)))
    return CliffordCircuit(n, q, tuple(gates))


def format_circuit(C: CliffordCircuit) -> str:
    """Canonical text form; parse_circuit(format_circuit(C)) == C."""
    lines = [f"qudits {C.n} {C.q}"] + [str(gate) for gate in C.gates]
    return "\n".join(lines) + "\n"


def _parse_int(token: str, line_number: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise CircuitParseError(f"expected an integer, got {token!r}", line_number) from None


def parse_circuit(text: str) -> CliffordCircuit:
    """
    Parse the circuit text format.

    Raises:
        CircuitParseError: for a missing header, non-prime arity, unknown gates, wrong
        operand counts, out-of-range wires or CNOT with control = target.
    """
    header: tuple[int, int] | None = None
    gates: list[Gate] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if header is None:
            if tokens[0] != "qudits" or len(tokens) != 3:
                raise CircuitParseError("expected header 'qudits <n> <q>'", line_number)
            n, q = (_parse_int(t, line_number) for t in tokens[1:])
            if n < 1:
                raise CircuitParseError(f"need at least one qudit, got {n}", line_number)
            try:
                q = _check_arity(q)
            except ModulusError:
                raise CircuitParseError(f"arity {q} is not prime", line_number) from None
            header = (n, q)
            continue
        name, operands = tokens[0], tokens[1:]
        if name not in GATE_NAMES:
            raise CircuitParseError(f"unknown gate {name!r}", line_number)
        gate = Gate(name, tuple(_parse_int(t, line_number) for t in operands))
        try:
            _validate_gate(gate, header[0])
        except ValueError as exc:
            raise CircuitParseError(str(exc), line_number) from None
        gates.append(gate)
    if header is None:
        raise CircuitParseError("empty circuit file (missing 'qudits' header)")
    return CliffordCircuit(header[0], header[1], tuple(gates))


def load_circuit(path: str | Path) -> CliffordCircuit:
    return parse_circuit(Path(path).read_text())


def save_circuit(C: CliffordCircuit, path: str | Path) -> None:
    Path(path).write_text(format_circuit(C))
