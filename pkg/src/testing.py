"""
Subgroup testers for the chain 𝓘 ⊆ 𝓘𝓟 ⊆ 𝓘𝓒 (identity, Pauli and Clifford operators up to
global phase), their composition and amplification, and the reductions between the three
testing problems.

Problems are named 'itp', 'ptp' and 'ctp'; promises are 'pauli' and 'clifford'. A tester
declares its completeness and soundness (c, s); declared values follow the bookkeeping
formulas and are never measured. Empirical acceptance rates come from estimate_acceptance.

Black-box testers only touch the input through an OracleHandle, which counts queries.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import pandas as pd

from src import get_logger
from src.clifford import (
    CNOT,
    F,
    X,
    CliffordCircuit,
    build_commutator_circuit,
    build_ctp_to_ptp_circuit,
    dagger,
    wb_identity_test,
    wb_pauli_test,
)
from src.config import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DETERMINISTIC_ACCEPT_THRESHOLD,
    resolve_cap,
)
from src.dense_oracle import (
    DenseUnitary,
    apply_circuit,
    as_dense,
    check_cap,
    epr_statevector_probability,
    equal_up_to_global_phase,
    is_pauli_unitary,
    normalized_trace,
    pauli_to_dense,
    t_gate_unitary,
    wilson_interval,
)
from src.pauli import PauliOperator, iter_basis_paulis, sample_basis_pauli
from src.phasepoly import exact_trace

logger = get_logger(__name__)

PROBLEMS = ("itp", "ptp", "ctp")
PROMISES = ("pauli", "clifford")
BB_MODES = ("sample", "deterministic")

Seed = int | np.random.SeedSequence | np.random.Generator | None


class UnsupportedProblem(ValueError):
    """Raised for unknown problems, promises or reduction directions."""


def _check_problem(problem: str) -> str:
    if problem not in PROBLEMS:
        raise UnsupportedProblem(f"Unknown problem {problem!r}; expected one of {PROBLEMS}")
    return problem


def _as_probability(value: float | Fraction) -> Fraction:
    probability = Fraction(str(value)) if isinstance(value, float) else Fraction(value)
    if not 0 <= probability <= 1:
        raise ValueError(f"Probability out of range: {value}")
    return probability


def _generator(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _children(rng: np.random.Generator, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(int(s)) for s in rng.integers(0, 2**63 - 1, size=count)]


class OracleHandle:
    """
    Query access to a unitary backed by a Clifford circuit or a dense matrix. Every apply
    or apply_inverse adds one to query_count.

    A handle derived from another one (a commutator, a generator-conjugation block) bills
    `cost` queries to its parent for each of its own.
    """

    def __init__(
        self,
        backing: CliffordCircuit | DenseUnitary,
        cap: int | None = None,
        parent: OracleHandle | None = None,
        cost: int = 1,
    ) -> None:
        if not isinstance(backing, (CliffordCircuit, DenseUnitary)):
            raise TypeError(f"Unsupported oracle backing {type(backing).__name__}")
        self.backing = backing
        self.cap = cap
        self.parent = parent
        self.cost = cost
        self.query_count = 0

    def _record(self, queries: int = 1) -> None:
        self.query_count += queries
        if self.parent is not None:
            self.parent._record(queries * self.cost)

    @property
    def n(self) -> int:
        return self.backing.n

    @property
    def q(self) -> int:
        return self.backing.q

    @property
    def is_circuit(self) -> bool:
        return isinstance(self.backing, CliffordCircuit)

    def apply(self, state: np.ndarray) -> np.ndarray:
        self._record()
        if self.is_circuit:
            return apply_circuit(self.backing, state)
        return self.backing.apply(state)

    def apply_inverse(self, state: np.ndarray) -> np.ndarray:
        self._record()
        if self.is_circuit:
            return apply_circuit(dagger(self.backing), state)
        return self.backing.apply_inverse(state)

    def epr_probability(self, analytic: bool = False) -> float:
        """
        Acceptance probability of one EPR test run (one query). Circuits too large for the
        explicit statevector fall back to the exact trace.
        """
        statevector_fits = (self.q**self.n) ** 2 <= resolve_cap(self.cap)
        if not analytic and statevector_fits:
            return epr_statevector_probability(self.apply, self.n, self.q)
        self._record()
        if self.is_circuit:
            return exact_trace(self.backing).magnitude() ** 2
        return float(abs(normalized_trace(self.backing)) ** 2)

    def unitary(self) -> DenseUnitary:
        """Dense form of the backing, for ground-truth deciders; not a query."""
        return as_dense(self.backing, self.cap)

    def fresh(self) -> OracleHandle:
        return OracleHandle(self.backing, self.cap)

    def __repr__(self) -> str:
        kind = "circuit" if self.is_circuit else "matrix"
        return f"OracleHandle({kind}, n={self.n}, q={self.q}, queries={self.query_count})"


def _handle(target: OracleHandle | CliffordCircuit | DenseUnitary) -> OracleHandle:
    return target if isinstance(target, OracleHandle) else OracleHandle(target)


@dataclass
class TesterReport:
    tester: str
    verdict: bool
    declared_completeness: Fraction
    declared_soundness: Fraction
    repetitions: int
    seed: int | None
    queries: int
    accept_rate: float | None = None
    trials: int | None = None

    def to_dict(self) -> dict:
        return {
            "tester": self.tester,
            "verdict": "accept" if self.verdict else "reject",
            "declared": {
                "c": float(self.declared_completeness),
                "s": float(self.declared_soundness),
            },
            "empirical": {"accept_rate": self.accept_rate, "trials": self.trials},
            "queries": self.queries,
            "repetitions": self.repetitions,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class Tester:
    """A decision procedure with declared completeness and soundness."""

    name: str
    completeness: Fraction
    soundness: Fraction
    decide: Callable[[OracleHandle, np.random.Generator], bool] = field(repr=False)
    repetitions: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "completeness", _as_probability(self.completeness))
        object.__setattr__(self, "soundness", _as_probability(self.soundness))

    def run(self, target: OracleHandle | CliffordCircuit | DenseUnitary, seed: Seed = DEFAULT_SEED) -> TesterReport:
        h = _handle(target)
        start = h.query_count
        verdict = bool(self.decide(h, _generator(seed)))
        logger.debug("%s on %r: %s", self.name, h, "accept" if verdict else "reject")
        return TesterReport(
            tester=self.name,
            verdict=verdict,
            declared_completeness=self.completeness,
            declared_soundness=self.soundness,
            repetitions=self.repetitions,
            seed=seed if isinstance(seed, int) else None,
            queries=h.query_count - start,
        )


def bb_identity_tester(
    promise: str, q: int, reps: int = 1, mode: str = "sample"
) -> Tester:
    """
    EPR identity test repeated `reps` times, accepting iff every run accepts. Under the
    Pauli promise it is exact; under the Clifford promise a single run accepts non-identity
    inputs with probability at most 1/q.

    Args:
        - promise: 'pauli' or 'clifford'.
        - mode: 'sample' draws each run's outcome from the statevector probability;
          'deterministic' accepts iff the analytic probability is at least 1 − 1e-9.
    """
    if promise not in PROMISES:
        raise UnsupportedProblem(f"Unknown promise {promise!r}; expected one of {PROMISES}")
    if mode not in BB_MODES:
        raise UnsupportedProblem(f"Unknown mode {mode!r}; expected one of {BB_MODES}")
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")

    def decide(h: OracleHandle, rng: np.random.Generator) -> bool:
        outcomes = []
        for _ in range(reps):
            if mode == "sample":
                outcomes.append(rng.random() < h.epr_probability())
            else:
                outcomes.append(h.epr_probability(analytic=True) >= DETERMINISTIC_ACCEPT_THRESHOLD)
        return all(outcomes)

    soundness = Fraction(0) if promise == "pauli" else Fraction(1, q**reps)
    return Tester(f"bb-identity[{promise}]", Fraction(1), soundness, decide, reps)


def bb_promise_identity_test(
    h: OracleHandle | CliffordCircuit | DenseUnitary,
    promise: str,
    reps: int = 1,
    seed: Seed = DEFAULT_SEED,
    mode: str = "sample",
) -> TesterReport:
    h = _handle(h)
    return bb_identity_tester(promise, h.q, reps, mode).run(h, seed)


def compose_testers(big: Tester, promise_tester: Tester) -> Tester:
    """
    AND of a tester for the larger subgroup and a promise tester for the smaller one, with
    independent randomness. Declared (c, s) = (c₁c₂, s₁ + s₂ − s₁s₂).
    """

    def decide(h: OracleHandle, rng: np.random.Generator) -> bool:
        first, second = _children(rng, 2)
        big_verdict = big.decide(h, first)
        promise_verdict = promise_tester.decide(h, second)
        return big_verdict and promise_verdict

    s1, s2 = big.soundness, promise_tester.soundness
    return Tester(
        f"compose({big.name}, {promise_tester.name})",
        big.completeness * promise_tester.completeness,
        s1 + s2 - s1 * s2,
        decide,
        big.repetitions + promise_tester.repetitions,
    )


def amplify(tester: Tester, reps: int) -> Tester:
    """AND of `reps` independent runs; declared (c^reps, s^reps)."""
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")

    def decide(h: OracleHandle, rng: np.random.Generator) -> bool:
        verdicts = [tester.decide(h, child) for child in _children(rng, reps)]
        return all(verdicts)

    return Tester(
        f"amplify({tester.name}, {reps})",
        tester.completeness**reps,
        tester.soundness**reps,
        decide,
        tester.repetitions * reps,
    )


def decide_exact(
    target: OracleHandle | CliffordCircuit | DenseUnitary, problem: str, cap: int | None = None
) -> bool:
    """
    Dense ground truth: itp is identity up to phase, ptp has a single Pauli coefficient,
    ctp conjugates each of the 2n generators to a Pauli.

    Raises:
        DimensionCapExceeded: beyond the cap.
        UnsupportedProblem: for an unknown problem name.
    """
    _check_problem(problem)
    U = target.unitary() if isinstance(target, OracleHandle) else as_dense(target, cap)
    if problem == "itp":
        return equal_up_to_global_phase(U, np.eye(U.dimension))
    if problem == "ptp":
        return is_pauli_unitary(U, cap)
    for wire in range(U.n):
        for P in (PauliOperator.generator_x(U.n, U.q, wire), PauliOperator.generator_z(U.n, U.q, wire)):
            image = U.matrix @ pauli_to_dense(P) @ U.matrix.conj().T
            if not is_pauli_unitary(DenseUnitary(U.n, U.q, image), cap):
                return False
    return True


def decide_white_box(C: CliffordCircuit, problem: str) -> bool:
    """Exact decisions from the conjugation tableau; every circuit here is Clifford."""
    _check_problem(problem)
    if problem == "itp":
        return wb_identity_test(C)
    if problem == "ptp":
        return wb_pauli_test(C)
    return True


def _is_member(h: OracleHandle, problem: str) -> bool:
    if h.is_circuit:
        return decide_white_box(h.backing, problem)
    return decide_exact(h, problem)


def exact_tester(problem: str) -> Tester:
    """Ground-truth solver with (c, s) = (1, 0): white-box on circuits, dense otherwise."""
    _check_problem(problem)
    return Tester(f"exact-{problem}", Fraction(1), Fraction(0), lambda h, rng: _is_member(h, problem))


def noisy_tester(problem: str, soundness: float | Fraction) -> Tester:
    """Accepts members always and non-members with probability `soundness`."""
    _check_problem(problem)
    s = _as_probability(soundness)

    def decide(h: OracleHandle, rng: np.random.Generator) -> bool:
        return _is_member(h, problem) or bool(rng.random() < s)

    return Tester(f"noisy-{problem}[s={float(s):g}]", Fraction(1), s, decide)


def commutator_handle(h: OracleHandle, P: PauliOperator) -> OracleHandle:
    """Handle for P†·C†·P·C (time order C, P, C†, P†); each query costs two of C."""
    if h.is_circuit:
        return OracleHandle(build_commutator_circuit(h.backing, P), h.cap, h, 2)
    U = h.unitary().matrix
    p = pauli_to_dense(P)
    return OracleHandle(DenseUnitary(h.n, h.q, p.conj().T @ U.conj().T @ p @ U), h.cap, h, 2)


def ctp_to_ptp_handle(h: OracleHandle) -> OracleHandle:
    """
    Handle for the 2n-block operator whose block j is C†·P_j·C, with P_j running over the
    single-wire X then Z generators. Each query costs 4n queries of C.
    """
    n, q = h.n, h.q
    if h.is_circuit:
        return OracleHandle(build_ctp_to_ptp_circuit(h.backing), h.cap, h, 4 * n)
    check_cap((q**n) ** (2 * n), h.cap)
    U = h.unitary().matrix
    generators = [PauliOperator.generator_x(n, q, i) for i in range(n)]
    generators += [PauliOperator.generator_z(n, q, i) for i in range(n)]
    matrix = np.ones((1, 1), dtype=complex)
    for P in generators:
        matrix = np.kron(matrix, U.conj().T @ pauli_to_dense(P) @ U)
    return OracleHandle(DenseUnitary(2 * n * n, q, matrix), h.cap, h, 4 * n)


def itp_via_promise_tester(solver: Tester, promise: str, q: int, reps: int = 1, mode: str = "sample") -> Tester:
    """ITP from a solver for the promise's subgroup composed with the promised EPR test."""
    return compose_testers(solver, bb_identity_tester(promise, q, reps, mode))


def reduce_itp_to_ptp(
    ptp_solver: Tester,
    h: OracleHandle | CliffordCircuit | DenseUnitary,
    reps: int = 1,
    seed: Seed = DEFAULT_SEED,
    mode: str = "sample",
) -> TesterReport:
    """Declared (c, s) of the solver carries over unchanged."""
    h = _handle(h)
    return itp_via_promise_tester(ptp_solver, "pauli", h.q, reps, mode).run(h, seed)


def reduce_itp_to_ctp(
    ctp_solver: Tester,
    h: OracleHandle | CliffordCircuit | DenseUnitary,
    reps: int = 1,
    seed: Seed = DEFAULT_SEED,
    mode: str = "sample",
) -> TesterReport:
    """Declared (c, s + (1 − s)/q) for a single EPR run."""
    h = _handle(h)
    return itp_via_promise_tester(ctp_solver, "clifford", h.q, reps, mode).run(h, seed)


def ctp_via_ptp_tester(ptp_solver: Tester) -> Tester:
    def decide(h: OracleHandle, rng: np.random.Generator) -> bool:
        return ptp_solver.decide(ctp_to_ptp_handle(h), rng)

    return Tester(
        f"ctp-via({ptp_solver.name})",
        ptp_solver.completeness,
        ptp_solver.soundness,
        decide,
        ptp_solver.repetitions,
    )


def reduce_ctp_to_ptp(
    C: OracleHandle | CliffordCircuit | DenseUnitary,
    ptp_solver: Tester,
    seed: Seed = DEFAULT_SEED,
) -> TesterReport:
    """The PTP solver's answer on the generator-conjugation construction; (c, s) unchanged."""
    return ctp_via_ptp_tester(ptp_solver).run(_handle(C), seed)


def ptp_via_itp_tester(itp_solver: Tester, q: int) -> Tester:
    """Run the ITP solver on the commutator with a uniform basis Pauli."""

    def decide(h: OracleHandle, rng: np.random.Generator) -> bool:
        P = sample_basis_pauli(h.n, h.q, rng)
        return itp_solver.decide(commutator_handle(h, P), rng)

    s = itp_solver.soundness
    return Tester(
        f"ptp-via({itp_solver.name})",
        itp_solver.completeness,
        s + (1 - s) / q,
        decide,
        itp_solver.repetitions,
    )


def reduce_ptp_to_itp(
    C: OracleHandle | CliffordCircuit | DenseUnitary,
    itp_solver: Tester,
    seed: Seed = DEFAULT_SEED,
) -> TesterReport:
    h = _handle(C)
    return ptp_via_itp_tester(itp_solver, h.q).run(h, seed)


def ptp_to_itp_exhaustive_rate(
    C: OracleHandle | CliffordCircuit | DenseUnitary,
    itp_solver: Tester,
    seed: Seed = DEFAULT_SEED,
) -> Fraction:
    """Acceptance fraction of the ITP solver over the commutators with all basis Paulis."""
    h = _handle(C)
    rng = _generator(seed)
    accepted = sum(
        bool(itp_solver.decide(commutator_handle(h, P), rng)) for P in iter_basis_paulis(h.n, h.q)
    )
    return Fraction(accepted, h.q ** (2 * h.n))


def dummy_non_member(target: str, n: int, q: int) -> CliffordCircuit | DenseUnitary:
    """A fixed operator outside the target subgroup."""
    _check_problem(target)
    if target == "itp":
        return CliffordCircuit(n, q, (X(0),))
    if target == "ptp":
        return CliffordCircuit(n, q, (F(0),) if n == 1 else (CNOT(0, 1),))
    return t_gate_unitary(n, q)


def karp_reduction(
    h: OracleHandle | CliffordCircuit | DenseUnitary,
    promise_tester: Tester,
    target: str,
    seed: Seed = DEFAULT_SEED,
) -> OracleHandle:
    """
    Map an instance of the smaller-subgroup problem to one of `target`: the input when the
    promise tester accepts, a fixed non-member of the target subgroup otherwise.
    """
    h = _handle(h)
    if promise_tester.decide(h, _generator(seed)):
        return h
    logger.debug("Promise tester rejected; substituting a %s non-member", target)
    return OracleHandle(dummy_non_member(target, h.n, h.q), h.cap)


def estimate_acceptance(
    tester: Tester,
    backing: OracleHandle | CliffordCircuit | DenseUnitary,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    jobs: int = 1,
) -> pd.DataFrame:
    """
    Independent runs of a tester on fresh handles; one row per trial with columns
    trial, verdict and queries, ordered by trial index.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    base = backing if isinstance(backing, OracleHandle) else OracleHandle(backing)
    streams = np.random.SeedSequence(seed).spawn(trials)

    def run(trial: int) -> dict:
        report = tester.run(base.fresh(), np.random.default_rng(streams[trial]))
        return {"trial": trial, "verdict": report.verdict, "queries": report.queries}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run, range(trials)))
    else:
        rows = [run(trial) for trial in range(trials)]
    frame = pd.DataFrame(rows).sort_values("trial").reset_index(drop=True)
    logger.debug("%s: %d/%d accepted", tester.name, int(frame["verdict"].sum()), trials)
    return frame


def summarize_acceptance(frame: pd.DataFrame) -> dict:
    """Accept rate, its standard error and a Wilson interval."""
    trials = len(frame)
    accepts = int(frame["verdict"].sum())
    rate = accepts / trials
    low, high = wilson_interval(accepts, trials)
    return {
        "accept_rate": rate,
        "trials": trials,
        "accepts": accepts,
        "sigma": math.sqrt(rate * (1 - rate) / trials),
        "wilson_low": low,
        "wilson_high": high,
        "mean_queries": float(frame["queries"].mean()),
    }


def run_with_estimate(
    tester: Tester,
    backing: OracleHandle | CliffordCircuit | DenseUnitary,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    jobs: int = 1,
) -> TesterReport:
    """Majority verdict over `trials` runs, with the empirical accept rate attached."""
    frame = estimate_acceptance(tester, backing, trials, seed, jobs)
    summary = summarize_acceptance(frame)
    report = TesterReport(
        tester=tester.name,
        verdict=summary["accept_rate"] > 0.5,
        declared_completeness=tester.completeness,
        declared_soundness=tester.soundness,
        repetitions=tester.repetitions,
        seed=seed,
        queries=int(frame["queries"].sum()),
        accept_rate=summary["accept_rate"],
        trials=trials,
    )
    return report
