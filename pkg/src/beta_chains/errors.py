"""Exception hierarchy shared by all modules."""


class BetaChainsError(Exception):
    """Base class for library errors."""


class InvalidInput(BetaChainsError, ValueError):
    """Malformed or non-finite input data."""


class InvalidParameter(BetaChainsError, ValueError):
    """A model parameter lies outside its admissible domain."""


class NotRealRooted(BetaChainsError, ArithmeticError):
    """A polynomial expected to be real-rooted has a genuinely complex root."""


class KernelNumericalFailure(BetaChainsError, ArithmeticError):
    """The kernel sampler produced roots that violate interlacing beyond tolerance."""


class DegenerateTopRow(BetaChainsError, ValueError):
    """The explicit kernel density needs a strictly decreasing top row."""


class DegenerateArguments(BetaChainsError, ValueError):
    """Coincident arguments where a formula needs distinct ones."""


class InsufficientData(BetaChainsError, ValueError):
    """Too few samples or rows for the requested statistic."""


class ChainQualityWarning(UserWarning):
    """MCMC acceptance rate outside the healthy band."""
