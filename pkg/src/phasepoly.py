"""
Sum-over-paths engine and exact Gauss sums.

A Clifford circuit maps |x⟩ to q^{-k/2} Σ_v ω_{q'}^{h(x,v)} |ℓ(x,v)⟩, where v are the k
path variables introduced by F gates, the labels ℓ are affine mod q and h is a quadratic
phase polynomial mod q' (q' = 4 for q = 2, else q). For q = 2 the phase is kept respectful:
every non-square monomial has an even coefficient, which makes h(x) mod 4 depend only on
x mod 2 and lets affine substitutions stay exact over the integers.

The trace of C is the Gauss sum of h restricted to the affine space ℓ(x,v) = x. Its value
is computed exactly as zero or q^{j/2} times a root of unity.

Path sums and eliminations work on a MutablePhasePolynomial: a preallocated working copy
updated in place, one variable at a time, touching only the support of each update.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import galois
import numpy as np

from src import get_logger
from src.clifford import CliffordCircuit, Gate
from src.modring import (
    ExactScaledRoot,
    Infeasible,
    ModMatrix,
    ModulusError,
    ModVector,
    diagonalize_quadratic,
    solve_affine_system,
)
from src.pauli import phase_modulus

logger = get_logger(__name__)


class NotRespectfulError(ValueError):
    """Raised when a binary Gauss sum is requested for a non-respectful polynomial."""


@dataclass(frozen=True, eq=False)
class QuadraticPhasePolynomial:
    """
    h(w) = Σ square_i w_i² + Σ_{i<j} cross_ij w_i w_j + Σ linear_i w_i + constant
    (mod modulus). `cross` is symmetric with a zero diagonal and holds the full monomial
    coefficient of w_i w_j.
    """

    modulus: int
    square: np.ndarray
    cross: np.ndarray
    linear: np.ndarray
    constant: int = 0

    def __post_init__(self) -> None:
        m = self.modulus
        square = np.asarray(self.square, dtype=np.int64).reshape(-1) % m
        cross = np.asarray(self.cross, dtype=np.int64) % m
        linear = np.asarray(self.linear, dtype=np.int64).reshape(-1) % m
        size = square.shape[0]
        if cross.shape != (size, size) or linear.shape != (size,):
            raise ValueError(
                f"Inconsistent polynomial shapes: {square.shape}, {cross.shape}, {linear.shape}"
            )
        if not np.array_equal(cross, cross.T) or np.diag(cross).any():
            raise ValueError("Cross coefficients must be symmetric with a zero diagonal.")
        for name, value in (("square", square), ("cross", cross), ("linear", linear)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "constant", int(self.constant) % m)

    @classmethod
    def zero(cls, num_vars: int, modulus: int) -> QuadraticPhasePolynomial:
        return cls(
            modulus,
            np.zeros(num_vars, dtype=np.int64),
            np.zeros((num_vars, num_vars), dtype=np.int64),
            np.zeros(num_vars, dtype=np.int64),
        )

    @property
    def num_vars(self) -> int:
        return int(self.square.shape[0])

    def upper(self) -> np.ndarray:
        """Upper-triangular monomial matrix A with h(w) = wᵀAw + linear·w + constant."""
        return np.triu(self.cross) + np.diag(self.square)

    def evaluate(self, w: Sequence[int] | np.ndarray) -> int:
        w = np.asarray(w, dtype=np.int64)
        return int(w @ self.upper() @ w + self.linear @ w + self.constant) % self.modulus

    def is_respectful(self) -> bool:
        """Binary phase ring only: every non-square coefficient is even."""
        return self.modulus == 4 and not (self.cross % 2).any() and not (self.linear % 2).any()

    def symmetric_form(self, q: int) -> ModMatrix:
        """Symmetric Q with h's quadratic part = wᵀQw over an odd prime field."""
        half = pow(2, -1, q)
        return ModMatrix(q, np.diag(self.square) + self.cross * half)

    def __repr__(self) -> str:
        return (
            f"QuadraticPhasePolynomial(mod {self.modulus}, square={self.square.tolist()}, "
            f"cross={self.cross.tolist()}, linear={self.linear.tolist()}, "
            f"constant={self.constant})"
        )


class MutablePhasePolynomial:
    """
    Working copy of a quadratic phase polynomial over `capacity` preallocated variables,
    of which the first `size` are live. Coefficient vectors passed to the update methods
    have one entry per live variable; every update is reduced mod `modulus` in place.
    """

    def __init__(self, modulus: int, capacity: int) -> None:
        self.modulus = modulus
        self.square = np.zeros(capacity, dtype=np.int64)
        self.cross = np.zeros((capacity, capacity), dtype=np.int64)
        self.linear = np.zeros(capacity, dtype=np.int64)
        self.constant = 0
        self.size = 0

    @classmethod
    def from_polynomial(
        cls, h: QuadraticPhasePolynomial, capacity: int | None = None
    ) -> MutablePhasePolynomial:
        size = h.num_vars
        work = cls(h.modulus, size if capacity is None else capacity)
        work.square[:size] = h.square
        work.cross[:size, :size] = h.cross
        work.linear[:size] = h.linear
        work.constant = h.constant
        work.size = size
        return work

    @property
    def capacity(self) -> int:
        return int(self.square.shape[0])

    def grow(self) -> int:
        """Make the next preallocated (absent) variable live; returns its index."""
        if self.size == self.capacity:
            raise ValueError(f"No spare variable left (capacity {self.capacity})")
        self.size += 1
        return self.size - 1

    def _add_quadratic(self, support: np.ndarray, update: np.ndarray) -> None:
        """Add a symmetric monomial update on the given variables; its diagonal goes to squares."""
        M = self.modulus
        self.square[support] = (self.square[support] + np.diagonal(update)) % M
        off = update.copy()
        np.fill_diagonal(off, 0)
        block = np.ix_(support, support)
        self.cross[block] = (self.cross[block] + off) % M

    def add_affine(self, coeffs: np.ndarray, offset: int, factor: int = 1) -> None:
        """h += factor·(coeffs·w + offset)."""
        m = self.size
        self.linear[:m] = (self.linear[:m] + factor * np.asarray(coeffs, dtype=np.int64)) % self.modulus
        self.constant = (self.constant + factor * int(offset)) % self.modulus

    def add_affine_square(self, coeffs: np.ndarray, offset: int, factor: int = 1) -> None:
        """h += factor·(coeffs·w + offset)², expanded over the integers."""
        a = np.asarray(coeffs, dtype=np.int64)
        d = int(offset)
        support = np.flatnonzero(a)
        if support.size:
            sub = a[support]
            outer = np.outer(sub, sub)
            update = factor * (2 * outer - np.diag(np.diagonal(outer)))
            self._add_quadratic(support, update)
            self.linear[support] = (self.linear[support] + 2 * factor * d * sub) % self.modulus
        self.constant = (self.constant + factor * d * d) % self.modulus

    def add_variable_product(
        self, var: int, coeffs: np.ndarray, offset: int, factor: int = 1
    ) -> None:
        """h += factor·w_var·(coeffs·w + offset), for a variable absent from coeffs."""
        m, M = self.size, self.modulus
        a = factor * np.asarray(coeffs, dtype=np.int64)
        self.cross[var, :m] = (self.cross[var, :m] + a) % M
        self.cross[var, var] = 0
        self.cross[:m, var] = self.cross[var, :m]
        self.linear[var] = (self.linear[var] + factor * int(offset)) % M

    def substitute(self, var: int, coeffs: np.ndarray, offset: int) -> None:
        """
        Replace w_var by coeffs·w + offset (coeffs[var] = 0), leaving w_var absent. Over
        the binary ring this is an integer lift, exact on respectful polynomials and
        keeping them respectful.
        """
        m, M = self.size, self.modulus
        a = np.asarray(coeffs, dtype=np.int64)
        d = int(offset)
        s, l = int(self.square[var]), int(self.linear[var])
        row = self.cross[var, :m].copy()
        self.cross[var, :m] = 0
        self.cross[:m, var] = 0
        self.square[var] = 0
        self.linear[var] = 0

        # s·(a·w + d)² + (a·w + d)·(row·w + l), on the variables either vector touches
        support = np.flatnonzero(a | row)
        if support.size:
            sa, sr = a[support], row[support]
            mixed = np.outer(sa, sr)
            outer = np.outer(sa, sa)
            update = s * (2 * outer - np.diag(np.diagonal(outer))) + mixed + mixed.T
            update -= np.diag(np.diagonal(mixed))
            self._add_quadratic(support, update)
            self.linear[support] = (self.linear[support] + 2 * s * d * sa + d * sr + l * sa) % M
        self.constant = (self.constant + s * d * d + d * l) % M

    def swap(self, i: int, j: int) -> None:
        if i == j:
            return
        for values in (self.square, self.linear):
            values[[i, j]] = values[[j, i]]
        self.cross[[i, j]] = self.cross[[j, i]]
        self.cross[:, [i, j]] = self.cross[:, [j, i]]

    def pop_last(self) -> tuple[int, np.ndarray, int]:
        """Drop the last live variable; returns its square coefficient, cross row and linear coefficient."""
        self.size -= 1
        last = self.size
        popped = int(self.square[last]), self.cross[last, :last].copy(), int(self.linear[last])
        self.square[last] = 0
        self.linear[last] = 0
        self.cross[last, :] = 0
        self.cross[:, last] = 0
        return popped

    def freeze(self, variables: Sequence[int] | None = None) -> QuadraticPhasePolynomial:
        """Immutable polynomial over the live variables, or over the listed ones."""
        index = np.arange(self.size) if variables is None else np.asarray(variables, dtype=np.int64)
        return QuadraticPhasePolynomial(
            self.modulus,
            self.square[index],
            self.cross[np.ix_(index, index)],
            self.linear[index],
            self.constant,
        )


@dataclass(frozen=True, eq=False)
class PathSumState:
    """
    Symbolic C_prefix|x⟩ = q^{norm_half_power/2} Σ_v ω_{q'}^{phase(x,v)} |labels(x,v)⟩.
    Variables are ordered (x_0..x_{n-1}, v_0..v_{k-1}); labels[i] = label_coeffs[i]·w +
    label_offsets[i] (mod q).
    """

    n: int
    q: int
    num_path_vars: int
    label_coeffs: np.ndarray
    label_offsets: np.ndarray
    phase: QuadraticPhasePolynomial
    norm_half_power: int = 0

    @classmethod
    def initial(cls, n: int, q: int) -> PathSumState:
        return cls(
            n,
            q,
            0,
            np.eye(n, dtype=np.int64),
            np.zeros(n, dtype=np.int64),
            QuadraticPhasePolynomial.zero(n, phase_modulus(q)),
        )

    @property
    def num_vars(self) -> int:
        return self.n + self.num_path_vars

    def apply(self, gate: Gate) -> PathSumState:
        """State after one more gate."""
        builder = _PathSumBuilder.from_state(self, spare=1 if gate.name == "F" else 0)
        builder.apply(gate)
        return builder.freeze()


class _PathSumBuilder:
    """In-place form of PathSumState, with room for `spare` more path variables."""

    def __init__(
        self,
        state: PathSumState,
        coeffs: np.ndarray,
        phase: MutablePhasePolynomial,
    ) -> None:
        self.n, self.q = state.n, state.q
        self.coeffs = coeffs
        self.offsets = np.array(state.label_offsets, dtype=np.int64)
        self.phase = phase
        self.num_path_vars = state.num_path_vars
        self.norm_half_power = state.norm_half_power

    @classmethod
    def from_state(cls, state: PathSumState, spare: int) -> _PathSumBuilder:
        capacity = state.num_vars + spare
        coeffs = np.zeros((state.n, capacity), dtype=np.int64)
        coeffs[:, : state.num_vars] = state.label_coeffs
        return cls(state, coeffs, MutablePhasePolynomial.from_polynomial(state.phase, capacity))

    def apply(self, gate: Gate) -> None:
        q = self.q
        binary = q == 2
        phase = self.phase
        i = gate.wires[0]
        a, a0 = self.coeffs[i, : phase.size], int(self.offsets[i])

        if gate.name == "CNOT":
            c, t = gate.wires
            self.coeffs[t] = (self.coeffs[t] + self.coeffs[c]) % q
            self.offsets[t] = (self.offsets[t] + self.offsets[c]) % q
        elif gate.name == "X":
            self.offsets[i] = (a0 + 1) % q
        elif gate.name == "Z":
            phase.add_affine(a, a0, 2 if binary else 1)
        elif gate.name == "S":
            if binary:
                # ℓ² ≡ (ℓ mod 2) (mod 4) for any integer lift of the label
                phase.add_affine_square(a, a0)
            else:
                half = pow(2, -1, q)
                phase.add_affine_square(a, a0, half)
                phase.add_affine(a, a0, -half)
        elif gate.name == "F":
            var = phase.grow()
            label = self.coeffs[i, : var + 1].copy()
            phase.add_variable_product(var, label, a0, 2 if binary else 1)
            self.coeffs[i] = 0
            self.coeffs[i, var] = 1
            self.offsets[i] = 0
            self.num_path_vars += 1
            self.norm_half_power -= 1
        else:
            raise ValueError(f"Unknown gate {gate.name!r}")

    def freeze(self) -> PathSumState:
        size = self.phase.size
        return PathSumState(
            self.n,
            self.q,
            self.num_path_vars,
            self.coeffs[:, :size].copy(),
            self.offsets.copy(),
            self.phase.freeze(),
            self.norm_half_power,
        )


def build_path_sum(C: CliffordCircuit) -> PathSumState:
    """Sum-over-paths form of C with intermediate F gates only."""
    builder = _PathSumBuilder.from_state(PathSumState.initial(C.n, C.q), spare=C.count("F"))
    for gate in C.gates:
        builder.apply(gate)
    return builder.freeze()


def _root(modulus: int, exponent: int) -> complex:
    return cmath.exp(2j * math.pi * exponent / modulus)


def expand_path_sum(state: PathSumState, x: Sequence[int]) -> np.ndarray:
    """Dense column C_prefix|x⟩ obtained by enumerating the path variables."""
    q, n = state.q, state.n
    column = np.zeros(q**n, dtype=complex)
    radix = q ** np.arange(n - 1, -1, -1)
    for v in itertools.product(range(q), repeat=state.num_path_vars):
        w = np.concatenate([np.asarray(x, dtype=np.int64), np.asarray(v, dtype=np.int64)])
        labels = (state.label_coeffs @ w + state.label_offsets) % q
        column[int(labels @ radix)] += _root(state.phase.modulus, state.phase.evaluate(w))
    return column * q ** (state.norm_half_power / 2)


def brute_force_gauss_sum(h: QuadraticPhasePolynomial, q: int) -> complex:
    """Σ ω_{q'}^{h(w)} over w ∈ {0..q-1}^num_vars, by direct enumeration."""
    return sum(
        (_root(h.modulus, h.evaluate(w)) for w in itertools.product(range(q), repeat=h.num_vars)),
        0j,
    )


def random_phase_polynomial(
    num_vars: int, q: int, seed: int | np.random.Generator | None = 0
) -> QuadraticPhasePolynomial:
    """Uniform respectful polynomial mod 4 for q = 2, uniform quadratic mod q otherwise."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    modulus = phase_modulus(q)
    step = 2 if q == 2 else 1
    upper = np.triu(rng.integers(0, modulus // step, (num_vars, num_vars)), 1) * step
    return QuadraticPhasePolynomial(
        modulus,
        rng.integers(0, modulus, num_vars),
        upper + upper.T,
        rng.integers(0, modulus // step, num_vars) * step,
        int(rng.integers(0, modulus)),
    )


def gauss_sum_binary(h: QuadraticPhasePolynomial) -> ExactScaledRoot:
    """
    Exact Σ_{x ∈ {0,1}^n} ω_4^{h(x)} for a respectful h.

    Eliminates the last live variable until none is left. With h = c·x² + 2x·ℓ(x') + g(x'):
      c = 1, 3: the x-sum is √2·e^{±iπ/4}·ω_4^{∓ℓ²};
      c = 2: 2x² ≡ 2x on binary x, folded into ℓ;
      c = 0: the x-sum is 2·[ℓ ≡ 0 mod 2]; a non-constant ℓ is solved for one of its
             variables, which is substituted away.

    Raises:
        NotRespectfulError: if h is not respectful.
    """
    if not h.is_respectful():
        raise NotRespectfulError(f"Not a respectful polynomial: {h!r}")
    work = MutablePhasePolynomial.from_polynomial(h)
    half_power, phase_exp = 0, 0
    while work.size:
        c, row, lin = work.pop_last()
        ell = (row // 2) % 2
        ell0 = (lin // 2) % 2
        if c == 2:
            c, ell0 = 0, 1 - ell0

        if c in (1, 3):
            # Σ_x ω_4^{±x² + 2xy} = √2·e^{±iπ/4}·ω_4^{∓y²}
            sign = 1 if c == 1 else -1
            work.add_affine_square(ell, ell0, -sign)
            half_power += 1
            phase_exp += sign
            continue

        if not ell.any():
            if ell0:
                return ExactScaledRoot.zero(2)
            half_power += 2
            continue

        pivot = int(np.flatnonzero(ell)[-1])
        ell[pivot] = 0
        work.substitute(pivot, ell, ell0)
        work.swap(pivot, work.size - 1)
        work.pop_last()
        half_power += 2

    return ExactScaledRoot(2, half_power=half_power, phase_exp=phase_exp + 2 * work.constant)


def gauss_sum_odd(h: QuadraticPhasePolynomial, q: int) -> ExactScaledRoot:
    """
    Exact Σ_{x ∈ Z_q^n} ω_q^{h(x)} for odd prime q.

    After diagonalization each variable contributes q (a = b = 0), zero (a = 0, b ≠ 0),
    or ω_q^{-b²/(4a)}·η(a)·G_q (a ≠ 0), where η is the quadratic character and
    G_q = √q for q ≡ 1 (mod 4), i√q for q ≡ 3 (mod 4). Phases live in μ_{4q}.

    Raises:
        ModulusError: if q is even or h is not over Z_q.
    """
    if q % 2 == 0 or h.modulus != q:
        raise ModulusError(f"Odd Gauss sums need an odd prime modulus, got q={q}")
    form = diagonalize_quadratic(
        h.symmetric_form(q), ModVector(q, h.linear), h.constant, q
    )
    L = 4 * q
    gauss_phase = 0 if q % 4 == 1 else q  # i = e^{2πi·q/4q}
    value = ExactScaledRoot(q, half_power=0, phase_exp=4 * form.constant)
    for a, b in zip(form.diagonal_coeffs.tolist(), form.linear_coeffs.tolist()):
        if a == 0:
            if b:
                return ExactScaledRoot.zero(q)
            value = value.scaled(2)
            continue
        shift = (-b * b * pow(4 * a, -1, q)) % q
        character = int(galois.legendre_symbol(a, q))
        factor_phase = 4 * shift + gauss_phase + (0 if character == 1 else 2 * q)
        value = value.scaled(1).rotated(factor_phase % L)
    return value


def _trace_gauss_sum(C: CliffordCircuit) -> tuple[ExactScaledRoot, PathSumState]:
    state = build_path_sum(C)
    q, n = C.q, C.n
    identity = np.hstack(
        [np.eye(n, dtype=np.int64), np.zeros((n, state.num_path_vars), dtype=np.int64)]
    )
    constraints = solve_affine_system(
        ModMatrix(q, state.label_coeffs - identity), ModVector(q, -state.label_offsets), q
    )
    if isinstance(constraints, Infeasible):
        logger.debug("Trace constraints infeasible (k=%d)", state.num_path_vars)
        return ExactScaledRoot.zero(q), state
    logger.debug(
        "Trace over %d free variables (n=%d, k=%d, q=%d)",
        constraints.free_dim, n, state.num_path_vars, q,
    )

    # each pivot unknown depends on free unknowns only, so the order is irrelevant
    work = MutablePhasePolynomial.from_polynomial(state.phase)
    free = list(constraints.free_columns)
    for pivot in constraints.pivot_columns:
        coeffs = np.zeros(state.num_vars, dtype=np.int64)
        coeffs[free] = constraints.basis.entries[pivot]
        work.substitute(pivot, coeffs, int(constraints.offset.entries[pivot]))
    restricted = work.freeze(free)

    total = gauss_sum_binary(restricted) if q == 2 else gauss_sum_odd(restricted, q)
    return total, state


def exact_unnormalized_trace(C: CliffordCircuit) -> ExactScaledRoot:
    """τ(C) = Σ_x ⟨x|C|x⟩, exactly."""
    total, state = _trace_gauss_sum(C)
    return total.scaled(state.norm_half_power)


def exact_trace(C: CliffordCircuit) -> ExactScaledRoot:
    """Normalized trace τ̂(C) = τ(C)/q^n, exactly."""
    total, state = _trace_gauss_sum(C)
    return total.scaled(state.norm_half_power - 2 * C.n)
