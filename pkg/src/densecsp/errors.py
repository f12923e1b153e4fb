"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so raise the most specific
type available: bad user-supplied data is `InputError`, a refused
combinatorial blowup is `CapExceeded`, and a broken internal contract is
`InternalInvariantError`.
"""


class DenseCspError(Exception):
    """Base class for all package errors."""


class InputError(DenseCspError):
    """Malformed or inconsistent user input (files, parameters, shapes)."""


class CapExceeded(DenseCspError):
    """A size guard refused to build or search an object this large."""

    def __init__(self, message: str, size: int | None = None, cap: int | None = None):
        if size is not None and cap is not None:
            message = f"{message} (size {size} exceeds cap {cap})"
        super().__init__(message)
        self.size = size
        self.cap = cap


class InternalInvariantError(DenseCspError):
    """An internal consistency check failed; indicates a bug, not bad input."""
