"""Shared exception types.

Exit-code mapping in the CLI: DomainError/PoleError/CutError -> 2,
verification failures -> 3.
"""


class SleDensitiesError(Exception):
    """Base class for all library errors."""


class DomainError(SleDensitiesError):
    """Input outside the mathematical domain of an operation."""


class PoleError(SleDensitiesError):
    """Evaluation at (or too close to) a pole of a factor that does not cancel."""


class CutError(SleDensitiesError):
    """Evaluation on a branch cut without a side annotation."""


class AccuracyError(SleDensitiesError):
    """A series or quadrature failed to reach its accuracy target."""


class ResonanceError(SleDensitiesError):
    """Frobenius exponents differ by a non-negative integer; no power-series solution."""


class RealityError(SleDensitiesError):
    """A quantity that must be real came out with a large imaginary part."""
