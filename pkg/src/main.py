"""
Command line for the subgroup-testing toolkit.

Subcommands:
    trace     exact and/or dense normalized trace of a circuit
    epr       EPR identity-test acceptance (analytic, statevector or sampled)
    decide    run a tester (exact, or black-box under a promise) and report its verdict
    wb        white-box identity / Pauli test of a circuit
    reduce    emit a reduced circuit (ctp->ptp, ptp->itp) or run a composed tester
              (itp->ptp, itp->ctp)
    random    write a seeded random Clifford circuit
    selftest  desk-scale checks of the core claims

Exit codes: 0 success, 1 claim mismatch or failed check, 2 usage or input error,
3 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd

from src import get_logger
from src.clifford import (
    S,
    CircuitParseError,
    CliffordCircuit,
    build_commutator_circuit,
    build_ctp_to_ptp_circuit,
    format_circuit,
    load_circuit,
    random_clifford_circuit,
    wb_identity_test,
    wb_pauli_test,
)
from src.config import (
    DEFAULT_SEED,
    DEFAULT_SHOTS,
    DEFAULT_TRIALS,
    MATRIX_SUFFIX,
    TRACE_TOL,
)
from src.dense_oracle import (
    DenseUnitary,
    DimensionCapExceeded,
    MatrixFormatError,
    circuit_to_dense,
    commutator_identity_probability,
    epr_acceptance,
    equal_up_to_global_phase,
    load_matrix,
    normalized_trace,
    t_gate_unitary,
    wilson_interval,
)
from src.pauli import PauliLiteralError, parse_pauli, sample_basis_pauli
from src.phasepoly import (
    brute_force_gauss_sum,
    exact_trace,
    gauss_sum_binary,
    gauss_sum_odd,
    random_phase_polynomial,
)
from src.testing import (
    PROBLEMS,
    OracleHandle,
    UnsupportedProblem,
    bb_identity_tester,
    decide_exact,
    exact_tester,
    itp_via_promise_tester,
    ptp_to_itp_exhaustive_rate,
    run_with_estimate,
)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

logger = get_logger(__name__)


def load_input(path: str) -> CliffordCircuit | DenseUnitary:
    """Matrix JSON for '.json' files, circuit text otherwise."""
    if Path(path).suffix == MATRIX_SUFFIX:
        return load_matrix(path)
    return load_circuit(path)


def _require_circuit(backing: CliffordCircuit | DenseUnitary, command: str) -> CliffordCircuit:
    if not isinstance(backing, CliffordCircuit):
        raise UnsupportedProblem(f"'{command}' needs a circuit file, not a matrix")
    return backing


def emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, default=str))
        return
    for key, value in payload.items():
        print(f"{key}: {value}")


def _complex_pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def cmd_trace(args: argparse.Namespace) -> int:
    C = load_circuit(args.file)
    payload: dict = {"n": C.n, "q": C.q, "gates": len(C)}
    exact_value = dense_value = None
    if args.method in ("exact", "both"):
        value = exact_trace(C)
        exact_value = value.to_complex()
        payload["exact"] = {
            "zero": value.is_zero,
            "half_power": value.half_power,
            "phase_exp": value.phase_exp,
            "L": value.L,
            "value": _complex_pair(exact_value),
        }
    if args.method in ("dense", "both"):
        dense_value = normalized_trace(circuit_to_dense(C, args.cap))
        payload["dense"] = _complex_pair(dense_value)
    if args.method == "both":
        mismatch = abs(exact_value - dense_value)
        payload["mismatch"] = mismatch
        emit(payload, args.format)
        return EXIT_MISMATCH if mismatch > TRACE_TOL else EXIT_OK
    emit(payload, args.format)
    return EXIT_OK


def cmd_epr(args: argparse.Namespace) -> int:
    backing = load_input(args.file)
    payload: dict = {"mode": args.mode}
    if args.mode == "sample":
        rate = epr_acceptance(backing, "sample", shots=args.shots, seed=args.seed, cap=args.cap)
        accepts = round(rate * args.shots)
        payload.update(
            accept_rate=rate,
            accepts=accepts,
            shots=args.shots,
            seed=args.seed,
            wilson=list(wilson_interval(accepts, args.shots)),
        )
    else:
        payload["probability"] = epr_acceptance(backing, args.mode, cap=args.cap)
    emit(payload, args.format)
    return EXIT_OK


def _decide_tester(problem: str, promise: str, q: int, reps: int, mode: str):
    if promise == "none":
        return exact_tester(problem)
    if problem != "itp":
        raise UnsupportedProblem(f"No black-box tester for {problem} under a {promise} promise")
    return bb_identity_tester(promise, q, reps, mode)


def cmd_decide(args: argparse.Namespace) -> int:
    backing = load_input(args.file)
    tester = _decide_tester(args.problem, args.promise, backing.q, args.reps, args.mode)
    report = run_with_estimate(tester, OracleHandle(backing, args.cap), args.trials, args.seed, args.jobs)
    emit(report.to_dict(), args.format)
    return EXIT_OK


def cmd_wb(args: argparse.Namespace) -> int:
    C = load_circuit(args.file)
    accept = wb_identity_test(C) if args.problem == "itp" else wb_pauli_test(C)
    emit({"problem": args.problem, "verdict": "accept" if accept else "reject"}, args.format)
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    direction = (args.source, args.target)
    backing = load_input(args.file)
    if direction in (("ctp", "ptp"), ("ptp", "itp")):
        C = _require_circuit(backing, "reduce")
        if direction == ("ctp", "ptp"):
            reduced = build_ctp_to_ptp_circuit(C)
        else:
            P = parse_pauli(args.pauli) if args.pauli else sample_basis_pauli(C.n, C.q, args.seed)
            reduced = build_commutator_circuit(C, P)
        text = format_circuit(reduced)
        if args.output:
            Path(args.output).write_text(text)
            logger.info("Wrote %d-wire circuit to %s", reduced.n, args.output)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.source == "itp" and args.target in ("ptp", "ctp"):
        promise = "pauli" if args.target == "ptp" else "clifford"
        tester = itp_via_promise_tester(exact_tester(args.target), promise, backing.q, args.reps)
        report = run_with_estimate(tester, OracleHandle(backing, args.cap), args.trials, args.seed, args.jobs)
        emit(report.to_dict(), args.format)
        return EXIT_OK
    raise UnsupportedProblem(f"Unsupported reduction {args.source} -> {args.target}")


def cmd_random(args: argparse.Namespace) -> int:
    C = random_clifford_circuit(args.n, args.q, args.depth, args.seed)
    text = format_circuit(C)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def selftest_report(seed: int = DEFAULT_SEED, samples: int = 25) -> pd.DataFrame:
    """One row per check: name, passed flag and the measured detail."""
    rng = np.random.default_rng(seed)
    rows = []

    for q in (2, 3, 5):
        for n in (1, 2):
            worst, agree = 0.0, True
            for _ in range(samples):
                C = random_clifford_circuit(n, q, int(rng.integers(0, 21)), rng)
                U = circuit_to_dense(C)
                worst = max(worst, abs(exact_trace(C).to_complex() - normalized_trace(U)))
                agree &= wb_identity_test(C) == equal_up_to_global_phase(U, np.eye(U.dimension))
            rows.append({"check": f"exact trace q={q} n={n}", "passed": worst <= TRACE_TOL, "detail": worst})
            rows.append({"check": f"white-box identity q={q} n={n}", "passed": agree, "detail": samples})

    for q in (2, 3, 5, 7):
        evaluate = gauss_sum_binary if q == 2 else (lambda h, q=q: gauss_sum_odd(h, q))
        worst = 0.0
        for _ in range(samples):
            h = random_phase_polynomial(int(rng.integers(0, 4)), q, rng)
            worst = max(worst, abs(evaluate(h).to_complex() - brute_force_gauss_sum(h, q)))
        rows.append({"check": f"Gauss sums q={q}", "passed": worst <= TRACE_TOL, "detail": worst})

    probability = epr_acceptance(CliffordCircuit(1, 2, (S(0),)), "statevector")
    rows.append({"check": "EPR on S", "passed": abs(probability - 0.5) <= 1e-12, "detail": probability})

    t_gate = t_gate_unitary(1, 2)
    commuting = commutator_identity_probability(t_gate)
    rows.append({"check": "commutator T gate", "passed": commuting == Fraction(1, 2), "detail": str(commuting)})
    exhaustive = ptp_to_itp_exhaustive_rate(t_gate, exact_tester("itp"))
    rows.append({"check": "ptp->itp exhaustive rate", "passed": exhaustive == commuting, "detail": str(exhaustive)})

    emitted_pauli = True
    for q in (2, 3):
        C = random_clifford_circuit(1, q, 12, rng)
        emitted_pauli &= decide_exact(build_ctp_to_ptp_circuit(C), "ptp")
    rows.append({"check": "ctp->ptp emits a Pauli", "passed": emitted_pauli, "detail": ""})

    return pd.DataFrame(rows)


def cmd_selftest(args: argparse.Namespace) -> int:
    report = selftest_report(args.seed, args.samples)
    if args.format == "json":
        print(report.to_json(orient="records", indent=2))
    else:
        print(report.to_string(index=False))
    return EXIT_OK if bool(report["passed"].all()) else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("--cap", type=int, default=None, help="Dense dimension cap (default: QSUB_DIM_CAP or 4096)")
    common.add_argument("--format", choices=("json", "text"), default="json", help="Output format (default: json)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed (default: 0)")

    parser = argparse.ArgumentParser(prog="qsub", description="Qudit subgroup testing toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    trace = commands.add_parser("trace", parents=[common], help="Normalized trace of a circuit")
    trace.add_argument("file")
    method = trace.add_mutually_exclusive_group()
    method.add_argument("--exact", dest="method", action="store_const", const="exact")
    method.add_argument("--dense", dest="method", action="store_const", const="dense")
    method.add_argument("--both", dest="method", action="store_const", const="both")
    trace.set_defaults(method="exact", handler=cmd_trace)

    epr = commands.add_parser("epr", parents=[common], help="EPR identity-test acceptance")
    epr.add_argument("file", help="Circuit file, or a .json matrix")
    epr.add_argument("--mode", choices=("analytic", "statevector", "sample"), default="analytic")
    epr.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    epr.set_defaults(handler=cmd_epr)

    decide = commands.add_parser("decide", parents=[common], help="Run a subgroup tester")
    decide.add_argument("file", help="Circuit file, or a .json matrix")
    decide.add_argument("--problem", choices=PROBLEMS, required=True)
    decide.add_argument("--promise", choices=("none", "pauli", "clifford"), default="none")
    decide.add_argument("--reps", type=int, default=1)
    decide.add_argument("--mode", choices=("sample", "deterministic"), default="sample")
    decide.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    decide.add_argument("--jobs", type=int, default=1)
    decide.set_defaults(handler=cmd_decide)

    wb = commands.add_parser("wb", parents=[common], help="White-box test of a circuit")
    wb.add_argument("file")
    wb.add_argument("--problem", choices=("itp", "ptp"), default="itp")
    wb.set_defaults(handler=cmd_wb)

    reduce = commands.add_parser("reduce", parents=[common], help="Reduce between testing problems")
    reduce.add_argument("file", help="Circuit file, or a .json matrix for itp->ptp/ctp")
    reduce.add_argument("--from", dest="source", choices=PROBLEMS, required=True)
    reduce.add_argument("--to", dest="target", choices=PROBLEMS, required=True)
    reduce.add_argument("--pauli", default=None, help="Pauli literal for ptp->itp (default: sampled)")
    reduce.add_argument("--reps", type=int, default=1)
    reduce.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    reduce.add_argument("--jobs", type=int, default=1)
    reduce.add_argument("-o", "--output", default=None)
    reduce.set_defaults(handler=cmd_reduce)

    random = commands.add_parser("random", parents=[common], help="Random Clifford circuit")
    random.add_argument("--n", type=int, required=True)
    random.add_argument("--q", type=int, required=True)
    random.add_argument("--depth", type=int, required=True)
    random.add_argument("-o", "--output", default=None)
    random.set_defaults(handler=cmd_random)

    selftest = commands.add_parser("selftest", parents=[common], help="Desk-scale checks")
    selftest.add_argument("--samples", type=int, default=25)
    selftest.set_defaults(handler=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    get_logger("src", logging.DEBUG if args.verbose else logging.WARNING, is_root=True)
    if args.cap is not None:
        logger.debug("Dimension cap set to %d", args.cap)

    try:
        return args.handler(args)
    except DimensionCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CircuitParseError, MatrixFormatError, PauliLiteralError, UnsupportedProblem) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
