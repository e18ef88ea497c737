"""Exception types shared across the package."""


class AnnealForgeError(Exception):
    """Base class for all package-specific errors."""


class GraphFormatError(AnnealForgeError):
    """A graph file or JSON payload violates the expected schema."""


class BudgetExceededError(AnnealForgeError):
    """A combinatorial enumeration exceeded its configured budget."""


class EmbeddingError(AnnealForgeError):
    """An embedding is inconsistent with the logical problem or hardware."""


class ParameterError(AnnealForgeError):
    """Parameter setting could not produce a valid physical problem."""


class StageError(AnnealForgeError):
    """A pipeline stage failed; carries a machine-readable record."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message
