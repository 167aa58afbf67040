"""Exception types shared across the package.

The CLI maps these onto exit codes: :class:`PreconditionError` -> 2,
:class:`ResourceCapError` -> 3.
"""


class PreconditionError(ValueError):
    """An input violates a documented precondition (bad id, bad parameter, wrong regime)."""


class ResourceCapError(RuntimeError):
    """A size or iteration cap was exceeded."""


class TreeOverflowError(ResourceCapError):
    """A Galton-Watson tree grew past its size cap."""

    def __init__(self, size, cap):
        super().__init__(f"tree size {size} exceeded cap {cap}")
        self.size = size
        self.cap = cap


class IterationCapError(ResourceCapError):
    """An iterative procedure hit its step cap before converging."""
