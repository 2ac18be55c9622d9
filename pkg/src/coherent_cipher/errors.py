"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """An iterative numerical routine hit its iteration cap."""


class InvalidStateError(ValueError):
    """A shift-register state that cannot be advanced (e.g. all-zero)."""


class UnsupportedConfigurationError(ValueError):
    """A parameter combination the requested operation does not support."""


class OracleDimensionError(ValueError):
    """The truncated Fock space would exceed the oracle's size limit."""

    def __init__(self, required, limit):
        self.required = required
        self.limit = limit
        super().__init__(
            f"truncated Fock dimension {required} exceeds the limit of {limit}"
        )
