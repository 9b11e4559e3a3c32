import logging
import os
import sys

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"

logger = logging.getLogger("fraccontrol")

if not logger.handlers:
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(_handler)
    logger.setLevel(getattr(logging, os.environ.get("FRACCTL_LOG_LEVEL", "WARNING").upper(), logging.WARNING))
    logger.propagate = False


def get_logger(name: str) -> logging.Logger:
    """Child logger below the package logger, e.g. ``fraccontrol.solver``."""
    return logger.getChild(name)


def set_verbosity(verbose: int) -> None:
    """Map the CLI ``-v`` count onto the package log level."""
    if verbose >= 2:
        logger.setLevel(logging.DEBUG)
    elif verbose == 1:
        logger.setLevel(logging.INFO)
