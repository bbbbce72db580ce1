"""
The q-ary Pauli group on n qudits.

An element is stored as the tuple (phase_exp, x_vec, z_vec) standing for
ω_{q'}^{phase_exp} X^{x_vec} Z^{z_vec}, where q' = 4 for q = 2 and q' = q otherwise, and
X^{x} Z^{z} = ⊗_i X^{x_i} Z^{z_i}. Products are kept in this X-before-Z normal form, so
two tuples are equal exactly when the operators are.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.modring import (
    DimensionMismatch,
    ExactScaledRoot,
    ModulusError,
    ModVector,
    PHASE_RING,
    root_group_order,
    validate_modulus,
)

_LITERAL = re.compile(
    r"^\s*w\^(?P<phase>-?\d+)\s+X\[(?P<x>[\d,\s]*)\]\s+Z\[(?P<z>[\d,\s]*)\]\s+q=(?P<q>\d+)\s*$"
)


class PauliLiteralError(ValueError):
    """Raised for malformed textual Pauli literals."""


def phase_modulus(q: int) -> int:
    """Order q' of the phase root ω_{q'}: 4 for qubits, q for odd primes."""
    return PHASE_RING if q == 2 else q


def omega_units(q: int) -> int:
    """Number of ω_{q'} steps in one ω_q step."""
    return phase_modulus(q) // q


@dataclass(frozen=True)
class PauliOperator:
    """ω_{q'}^{phase_exp} X^{x_vec} Z^{z_vec} on n wires of arity q."""

    n: int
    q: int
    phase_exp: int
    x_vec: ModVector
    z_vec: ModVector

    def __post_init__(self) -> None:
        q = validate_modulus(self.q)
        if q == PHASE_RING:
            raise ModulusError("Pauli arity must be prime.")
        x_vec = self.x_vec if isinstance(self.x_vec, ModVector) else ModVector(q, self.x_vec)
        z_vec = self.z_vec if isinstance(self.z_vec, ModVector) else ModVector(q, self.z_vec)
        if len(x_vec) != self.n or len(z_vec) != self.n:
            raise DimensionMismatch(
                f"Pauli on {self.n} wires given vectors of width {len(x_vec)}, {len(z_vec)}"
            )
        if x_vec.modulus != q or z_vec.modulus != q:
            raise ModulusError("Exponent vectors must be reduced modulo the arity.")
        object.__setattr__(self, "x_vec", x_vec)
        object.__setattr__(self, "z_vec", z_vec)
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % phase_modulus(q))

    @classmethod
    def from_exponents(
        cls, x: Sequence[int], z: Sequence[int], q: int, phase_exp: int = 0
    ) -> PauliOperator:
        return cls(len(x), q, phase_exp, ModVector(q, x), ModVector(q, z))

    @classmethod
    def identity(cls, n: int, q: int) -> PauliOperator:
        return cls.from_exponents([0] * n, [0] * n, q)

    @classmethod
    def generator_x(cls, n: int, q: int, wire: int) -> PauliOperator:
        """P_i^x = I^{⊗i} ⊗ X ⊗ I^{⊗(n-i-1)}."""
        x = [0] * n
        x[wire] = 1
        return cls.from_exponents(x, [0] * n, q)

    @classmethod
    def generator_z(cls, n: int, q: int, wire: int) -> PauliOperator:
        """P_i^z = I^{⊗i} ⊗ Z ⊗ I^{⊗(n-i-1)}."""
        z = [0] * n
        z[wire] = 1
        return cls.from_exponents([0] * n, z, q)

    @property
    def phase_modulus(self) -> int:
        return phase_modulus(self.q)

    @property
    def is_identity(self) -> bool:
        """Identity up to global phase."""
        return not self.x_vec.entries.any() and not self.z_vec.entries.any()

    def with_phase(self, phase_exp: int) -> PauliOperator:
        return PauliOperator(self.n, self.q, phase_exp, self.x_vec, self.z_vec)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)

    def __str__(self) -> str:
        return format_pauli(self)


def _check_compatible(P: PauliOperator, Q: PauliOperator) -> None:
    if P.q != Q.q:
        raise ModulusError(f"Arity mismatch: {P.q} != {Q.q}")
    if P.n != Q.n:
        raise DimensionMismatch(f"Width mismatch: {P.n} != {Q.n}")


def multiply(P: PauliOperator, Q: PauliOperator) -> PauliOperator:
    """
    Matrix product P·Q in normal form.

    Moving Q's X block past P's Z block uses Z^b X^a = ω_q^{ab} X^a Z^b per wire.

    Raises:
        ModulusError / DimensionMismatch: on arity or width mismatch.
    """
    _check_compatible(P, Q)
    reorder = P.z_vec.dot(Q.x_vec)
    phase = P.phase_exp + Q.phase_exp + omega_units(P.q) * reorder
    return PauliOperator(
        P.n,
        P.q,
        phase,
        ModVector(P.q, P.x_vec.entries + Q.x_vec.entries),
        ModVector(P.q, P.z_vec.entries + Q.z_vec.entries),
    )


def dagger(P: PauliOperator) -> PauliOperator:
    """P† = ω_{q'}^{-p} ω_q^{⟨z,x⟩} X^{-x} Z^{-z}."""
    phase = -P.phase_exp + omega_units(P.q) * P.z_vec.dot(P.x_vec)
    return PauliOperator(
        P.n, P.q, phase, ModVector(P.q, -P.x_vec.entries), ModVector(P.q, -P.z_vec.entries)
    )


def power(P: PauliOperator, exponent: int) -> PauliOperator:
    """P^exponent; negative exponents go through the adjoint."""
    if exponent < 0:
        return power(dagger(P), -exponent)
    result = PauliOperator.identity(P.n, P.q)
    for _ in range(exponent):
        result = multiply(result, P)
    return result


def equal_up_to_phase(P: PauliOperator, Q: PauliOperator) -> bool:
    _check_compatible(P, Q)
    return P.x_vec == Q.x_vec and P.z_vec == Q.z_vec


def commutation_exponent(
    P: PauliOperator, coeffs: tuple[Sequence[int], Sequence[int]]
) -> int:
    """
    Exponent ⟨b,x⟩ − ⟨a,z⟩ (mod q) picked up by the X^a Z^b term of a Pauli decomposition
    under conjugation P† (·) P, for the basis Pauli P = X^x Z^z.

    Raises:
        DimensionMismatch: if (a, b) do not have P's width.
    """
    a = ModVector(P.q, coeffs[0])
    b = ModVector(P.q, coeffs[1])
    if len(a) != P.n or len(b) != P.n:
        raise DimensionMismatch(f"Coefficient pair of width {len(a)}, {len(b)} vs {P.n}")
    return (b.dot(P.x_vec) - a.dot(P.z_vec)) % P.q


def symplectic_exponent(P: PauliOperator, Q: PauliOperator) -> int:
    """s with P·Q = ω_q^s Q·P."""
    _check_compatible(P, Q)
    return (P.z_vec.dot(Q.x_vec) - P.x_vec.dot(Q.z_vec)) % P.q


def exact_trace_pauli(P: PauliOperator) -> ExactScaledRoot:
    """
    Normalized trace of a Pauli: its phase when the vector part is trivial, else zero.
    X^a is a permutation without fixed points for a ≠ 0, and Z^b sums a full set of roots.
    """
    if not P.is_identity:
        return ExactScaledRoot.zero(P.q)
    units = root_group_order(P.q) // P.phase_modulus
    return ExactScaledRoot(P.q, half_power=0, phase_exp=units * P.phase_exp)


def sample_basis_pauli(
    n: int, q: int, seed: int | np.random.Generator | None = 0
) -> PauliOperator:
    """Uniform element X^a Z^b of the q^{2n} basis Paulis, phase 0."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    draw = rng.integers(0, q, size=2 * n)
    return PauliOperator.from_exponents(draw[:n], draw[n:], q)


def iter_basis_paulis(n: int, q: int):
    """All q^{2n} basis Paulis, x-major then z, in lexicographic order."""
    for index in range(q ** (2 * n)):
        digits = np.array(np.unravel_index(index, (q,) * (2 * n))).reshape(-1)
        yield PauliOperator.from_exponents(digits[:n], digits[n:], q)


def format_pauli(P: PauliOperator) -> str:
    """Textual literal, e.g. 'w^2 X[1,0] Z[2,2] q=3'."""
    x = ",".join(str(v) for v in P.x_vec.tolist())
    z = ",".join(str(v) for v in P.z_vec.tolist())
    return f"w^{P.phase_exp} X[{x}] Z[{z}] q={P.q}"


def parse_pauli(text: str) -> PauliOperator:
    """
    Parse a textual Pauli literal.

    Raises:
        PauliLiteralError: on malformed text, out-of-range exponents or a bad arity.
    """
    match = _LITERAL.match(text)
    if match is None:
        raise PauliLiteralError(f"Malformed Pauli literal: {text!r}")

    def entries(group: str) -> list[int]:
        group = group.strip()
        return [int(v) for v in group.split(",")] if group else []

    try:
        x, z = entries(match["x"]), entries(match["z"])
    except ValueError as exc:
        raise PauliLiteralError(f"Malformed exponent list in {text!r}") from exc
    q = int(match["q"])
    try:
        q = validate_modulus(q)
    except ModulusError as exc:
        raise PauliLiteralError(str(exc)) from exc
    if q == PHASE_RING or len(x) != len(z):
        raise PauliLiteralError(f"Inconsistent Pauli literal: {text!r}")
    if any(not 0 <= v < q for v in x + z):
        raise PauliLiteralError(f"Exponents out of range for q={q}: {text!r}")
    phase = int(match["phase"])
    if not 0 <= phase < phase_modulus(q):
        raise PauliLiteralError(f"Phase exponent out of range: {text!r}")
    return PauliOperator.from_exponents(x, z, q, phase)
