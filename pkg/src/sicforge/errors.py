"""Exception types shared across the pipeline."""


class SicForgeError(Exception):
    """Base class; the CLI maps subclasses of InputError to exit code 2."""


class InputError(SicForgeError):
    """Bad input data or configuration."""


class InvalidCode(InputError, ValueError):
    pass


class NoParent(SicForgeError, ValueError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class StructureError(ParseError):
    """Expected markers are missing from a fetched page (site layout drift)."""


class FetchError(SicForgeError):
    def __init__(self, url: str, status: int | str | None = None, message: str = ""):
        self.url = url
        self.status = status
        super().__init__(f"fetch failed for {url} (status={status}) {message}".rstrip())


class WriteError(SicForgeError, OSError):
    pass


class EmptyMatrix(InputError):
    pass


class InsufficientData(InputError):
    pass


class ShapeError(InputError, ValueError):
    pass


class PartitionError(InputError, ValueError):
    pass


class DegenerateModel(SicForgeError):
    pass


class MissingData(SicForgeError):
    pass


class ZeroSignal(SicForgeError):
    """No cross-sectional dispersion in expected returns; the day is skipped."""


class ConvergenceWarning(UserWarning):
    pass
