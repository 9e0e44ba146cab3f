import logging
import os
import sys
from datetime import datetime, timezone

LOG_FILE = 'hplab.log'

_logger = logging.getLogger('hplab')
_logger.setLevel(logging.INFO)
_logger.propagate = False


class _IsoFormatter(logging.Formatter):
    # same line layout the worker log used: "<iso timestamp> <msg>"
    def format(self, record):
        now = datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat()
        return f"{now} {record.getMessage()}"


def configure_logging(log_file=None, verbose=False):
    """(Re)configure handlers. stdout is left alone so JSON reports stay clean."""
    global LOG_FILE
    if log_file is not None:
        LOG_FILE = log_file
    for h in list(_logger.handlers):
        _logger.removeHandler(h)
        h.close()

    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(_IsoFormatter())
    _logger.addHandler(stream)

    if LOG_FILE:
        parent = os.path.dirname(LOG_FILE) or '.'
        try:
            os.makedirs(parent, exist_ok=True)
            fh = logging.FileHandler(LOG_FILE, mode='a', encoding='utf-8')
            fh.setFormatter(_IsoFormatter())
            _logger.addHandler(fh)
        except OSError as e:
            _logger.warning(f"cannot open log file {LOG_FILE}: {e}")

    _logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    return _logger


def log(msg: str):
    if not _logger.handlers:
        _logger.addHandler(logging.NullHandler())
    _logger.info(msg)


def debug(msg: str):
    if not _logger.handlers:
        _logger.addHandler(logging.NullHandler())
    _logger.debug(msg)
