"""Exception types shared across the package.

Parameter/domain violations raise plain ValueError; the classes here cover
failures that callers may want to handle separately (and that the CLI maps
to distinct exit codes).
"""


class DataError(Exception):
    """Malformed or unusable input data (bad TSV cell, empty table, ...)."""


class NumericalError(Exception):
    """A numerical routine failed to converge or hit a pathology."""


class ModelMisfitError(NumericalError):
    """No mixture of the observation model fits the data within the band.

    Raised when even the unconstrained mixture family cannot reach the
    empirical CDF within the confidence-band width, i.e. the observation
    model itself is inconsistent with the sample at the requested level.
    """
