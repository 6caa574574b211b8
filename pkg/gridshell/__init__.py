import sys

if sys.version_info < (3, 11):
    raise RuntimeError("Python 3.11+ is required")
import logging
import os
from pathlib import Path

ROOT_DIR = Path(__file__).parent.resolve()
VAR_DIR = Path(os.environ.get("GRIDSHELL_VAR_DIR", "var")).resolve()

__version__ = "1.0.0"


class CustomFormatter(logging.Formatter):
    def __init__(self):
        self._format = "[%(levelname)s] %(pathname)s:%(lineno)s: %(message)s"
        self._foreign_format = "[%(levelname)s] %(name)s: %(message)s"

    def format(self, record):
        # Relative paths can be Ctrl+Clicked from most terminals and IDEs
        record.pathname = os.path.relpath(record.pathname)
        if record.name != "root":
            return logging.Formatter(self._foreign_format).format(record)
        return logging.Formatter(self._format).format(record)


class CustomFilter(logging.Filter):
    def filter(self, record):
        if record.name != "root":
            return record.levelno >= logging.WARNING
        return True


def setup_logging(level=logging.INFO):
    logger = logging.getLogger()
    if not any(
        isinstance(h.formatter, CustomFormatter) for h in logger.handlers
    ):
        handler = logging.StreamHandler()
        handler.setFormatter(CustomFormatter())
        handler.addFilter(CustomFilter())
        logger.addHandler(handler)
    logger.setLevel(level)

    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)
