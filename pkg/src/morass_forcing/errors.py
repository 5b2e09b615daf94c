"""Exception types shared across the package."""


class RejectedInput(ValueError):
    """An operation was called with arguments outside its contract."""


class InternalInconsistency(RuntimeError):
    """A structural guarantee failed; the input was not a valid structure."""


class SizeLimitExceeded(RejectedInput):
    """An enumeration would exceed its configured size limit."""

    def __init__(self, message: str, estimate: int):
        super().__init__(message)
        self.estimate = estimate
