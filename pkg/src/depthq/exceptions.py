"""Exception types shared across the package.

The CLI maps :class:`InputError` to exit status 2 and :class:`NumericFailure`
to exit status 3.
"""


class InputError(ValueError):
    """Malformed or inconsistent input (shapes, dimensions, options)."""


class DimensionError(InputError):
    """Inputs disagree in dimension or violate a dimension requirement."""


class NumericFailure(ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""
