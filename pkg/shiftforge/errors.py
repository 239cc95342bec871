"""Exception hierarchy.

Refusals are precondition failures the caller can fix (exit code 2 at the
CLI). Anything else escaping a command is an internal error (exit code 1).
Findings that are data, such as rule violations or failed inequality checks,
are returned in records and never raised.
"""


class ShiftforgeError(Exception):
    pass


class RefusalError(ShiftforgeError, ValueError):
    """A precondition of the requested operation does not hold."""


class CapExceededError(RefusalError):
    def __init__(self, what, limit):
        super().__init__(f"{what} exceeds the configured cap ({limit})")
        self.what = what
        self.limit = limit


class SpecFormatError(RefusalError):
    def __init__(self, message, path=None, offset=None):
        where = ''
        if path is not None:
            where = f"{path}: "
        if offset is not None:
            where += f"byte {offset}: "
        super().__init__(where + message)
        self.path = path
        self.offset = offset


class TargetMissedError(RefusalError):
    """No candidate landed in the requested entropy interval; `nearest` lists the closest."""

    def __init__(self, message, nearest=()):
        super().__init__(message)
        self.nearest = list(nearest)
