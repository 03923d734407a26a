"""Shared exception types."""


class RefusalError(RuntimeError):
    """Raised when an exact computation is refused because it exceeds hard size caps."""
