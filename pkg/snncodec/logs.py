# snncodec/logs.py

import logging
import sys

from pythonjsonlogger.json import JsonFormatter

LOGGER_NAME = 'snncodec'
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s %(message)s'


def configure_logging(level='INFO', stream=None):
    """Attach one JSON handler to the package logger; safe to call repeatedly."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        if getattr(handler, '_snncodec', False):
            logger.removeHandler(handler)

    # stderr only: stdout and output files stay timestamp-free
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(JsonFormatter(LOG_FORMAT, rename_fields={'levelname': 'level', 'asctime': 'ts'}))
    handler._snncodec = True
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def reset_logging():
    """Detach the handler added by configure_logging."""
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if getattr(handler, '_snncodec', False):
            logger.removeHandler(handler)
