"""Exception types shared across the pipeline."""


class LaneWatchError(Exception):
    """Base class for all pipeline errors."""


class InvalidInputError(LaneWatchError):
    """Malformed data handed to an operation (wrong channel count, frame regression, ...)."""


class InvalidConfigError(LaneWatchError):
    """Parameter outside an operation's documented domain."""


class GeometryError(LaneWatchError):
    """Lane geometry became degenerate (crossing boundaries, empty domain)."""


class LogFormatError(LaneWatchError):
    """Detection log or lane-truth file violates its schema.

    Carries the offending 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class RasterFormatError(LaneWatchError):
    """Image file is not a readable binary PGM/PPM."""
