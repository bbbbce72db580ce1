"""Qudit subgroup testing: exact Clifford traces, Pauli/Clifford/identity testers and reductions."""

import logging

LOG_FORMAT = "[%(levelname)s] %(name)s - %(module)s.%(funcName)s:%(lineno)s - %(message)s"


def get_logger(name: str, level: int | None = None, is_root: bool = False) -> logging.Logger:
    """
    Module loggers propagate to the 'src' root logger; only the root (set up by the CLI)
    owns a stream handler. Without an explicit level, module loggers inherit the root's.
    """
    logger = logging.getLogger(name)
    if level is not None:
        logger.setLevel(level)
    logger.propagate = True

    if is_root:
        if not logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT))
            logger.addHandler(handler)
        for handler in logger.handlers:
            handler.setLevel(level if level is not None else logging.WARNING)

    return logger
