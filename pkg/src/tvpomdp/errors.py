"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; anything else surfaces as a plain ValueError/IndexError.
"""


class TvPomdpError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(TvPomdpError):
    """A scenario or component configuration violates an invariant."""


class OrderingError(TvPomdpError):
    """A record was pushed with a timestamp older than the window tail."""


class EmptyWindowError(TvPomdpError):
    """An operation that needs at least one record got an empty window."""


class DegenerateSeriesError(TvPomdpError):
    """Autocorrelation asked for on a zero-variance series."""


class WeightError(TvPomdpError):
    """A sample weight was negative."""


class EmptySampleError(TvPomdpError):
    """An MLE was requested with zero total count."""


class DistributionError(TvPomdpError):
    """A vector that must be a probability distribution is not one."""


class ImpossibleObservationError(TvPomdpError):
    """The observation has zero likelihood under every state in the belief."""


class OracleScopeError(TvPomdpError):
    """The brute-force oracle was asked for a problem outside its size limits."""
