# src/config.py
"""
Configuration module for the qudit subgroup-testing toolkit.
Contains global constants such as numerical tolerances, the dense dimension cap and the
default seeds. The cap can be overridden with the QSUB_DIM_CAP environment variable.
"""

import os
from typing import Final

from src import get_logger

logger = get_logger(__name__)

DEFAULT_SEED: Final[int] = 0
DEFAULT_DIM_CAP: Final[int] = 4096
DIM_CAP_ENV: Final[str] = "QSUB_DIM_CAP"

UNITARY_TOL: Final[float] = 1e-9  # U U^dagger = I on construction
LOAD_UNITARY_TOL: Final[float] = 1e-6  # matrices read from JSON
PHASE_TOL: Final[float] = 1e-9  # equality up to global phase
TRACE_TOL: Final[float] = 1e-9  # exact vs dense trace comparisons
COEFF_TOL: Final[float] = 1e-9  # nonzero Pauli coefficients
DETERMINISTIC_ACCEPT_THRESHOLD: Final[float] = 1 - 1e-9

DEFAULT_SHOTS: Final[int] = 10_000
DEFAULT_TRIALS: Final[int] = 1000
WILSON_CONFIDENCE: Final[float] = 0.95

MATRIX_SUFFIX: Final[str] = ".json"


def configured_cap() -> int:
    """The cap from QSUB_DIM_CAP, or DEFAULT_DIM_CAP when unset or not a positive integer."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        logger.warning(
            "Ignoring %s=%r (not a positive integer); using %d", DIM_CAP_ENV, raw, DEFAULT_DIM_CAP
        )
        return DEFAULT_DIM_CAP
    return cap


def resolve_cap(cap: int | None) -> int:
    """Return the explicit cap, or the configured default."""
    return configured_cap() if cap is None else int(cap)
