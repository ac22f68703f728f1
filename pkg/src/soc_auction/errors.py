"""Exception types shared across the package."""


class ModelSpecError(ValueError):
    """A textual price-model specifier could not be parsed.

    The message always names the offending family or field.
    """


class InfiniteMomentError(ValueError):
    """A requested moment diverges for the given price model."""


class InsufficientDataError(ValueError):
    """Not enough data points or replicas for the requested estimate."""
