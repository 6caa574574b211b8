import functools
import logging
import traceback

from gridshell.services import audit


class GridshellError(Exception):
    exit_code = 1


class ConfigError(GridshellError):
    exit_code = 4


class MeshError(GridshellError):
    exit_code = 4


class NotADisk(MeshError):
    pass


class NonManifold(MeshError):
    pass


class DegenerateFace(MeshError):
    pass


class UVFlip(MeshError):
    pass


class DisconnectedMesh(GridshellError):
    exit_code = 4


class NoPath(GridshellError):
    pass


class DegenerateMember(GridshellError):
    pass


class InfeasibleGrid(GridshellError):
    exit_code = 3


class NonConvergence(GridshellError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ValidationFailed(GridshellError):
    exit_code = 2

    def __init__(self, violations):
        super().__init__(f"{len(violations)} violation(s)")
        self.violations = violations


class StageError(GridshellError):
    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = exit_code(cause)


def exit_code(e):
    if isinstance(e, GridshellError):
        return e.exit_code
    if isinstance(e, OSError):
        return 4
    return 1


def handle_exception(e):
    trace = "".join(traceback.format_exception(e))
    audit.log(
        "Unhandled exception" if exit_code(e) == 1 else "Pipeline failed",
        exception=e,
        stage=getattr(e, "stage", None),
        codeblock=trace if exit_code(e) == 1 else None,
        level=logging.ERROR,
    )
    return exit_code(e)


def exits_on_error(f):
    """Turn domain exceptions raised by a CLI command into exit codes."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except GridshellError as e:
            raise SystemExit(handle_exception(e))
        except OSError as e:
            raise SystemExit(handle_exception(e))

    return wrapper
