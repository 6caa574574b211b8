import contextlib
import functools
import time

from gridshell.services import audit
from gridshell.services.errors import GridshellError, StageError


def duration(delta: float) -> str:
    minutes, seconds = int(delta // 60), delta % 60
    return f"{minutes}m {seconds:.1f}s"


class Stages:
    """Named pipeline stages with wall-clock timings."""

    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextlib.contextmanager
    def __call__(self, name: str):
        start = time.monotonic()
        audit.log(f"Stage started: {name}")
        try:
            yield
        except StageError:
            raise
        except (GridshellError, OSError, ValueError, ArithmeticError) as e:
            raise StageError(name, e) from e
        finally:
            self.timings[name] = time.monotonic() - start
        audit.log(
            f"Stage finished: {name}, {duration(self.timings[name])} elapsed"
        )


def descript_stage(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        start = time.monotonic()
        audit.log(f"Task started: {f.__name__}")
        result = f(*args, **kwargs)
        delta = time.monotonic() - start
        audit.log(f"Task finished: {f.__name__}, {duration(delta)} elapsed")
        return result

    return wrapper
