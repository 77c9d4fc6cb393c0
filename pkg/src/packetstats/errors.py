"""Exception hierarchy.

Each error class carries the process exit code the command-line runner
reports for it.
"""


class PacketStatsError(Exception):
    exit_code = 1


class ConfigError(PacketStatsError, ValueError):
    """Malformed or inconsistent experiment configuration."""

    exit_code = 1


class DimensionError(ConfigError):
    """Matrix shape does not fit the operation (e.g. non-square)."""


class SizeLimitError(ConfigError):
    """Problem size exceeds a hard algorithmic limit."""


class UnsupportedKindError(ConfigError):
    pass


class ChannelClosedError(ConfigError):
    """Scatterer evaluated at an energy where a channel does not propagate."""


class ConvergenceError(PacketStatsError, RuntimeError):
    """Quadrature result changed under node doubling beyond tolerance."""

    exit_code = 2


class ConsistencyError(PacketStatsError, RuntimeError):
    """A structural identity or a two-route cross-check failed."""

    exit_code = 3


class DegenerateInputError(ConsistencyError):
    """Normalization functional of the input overlaps vanishes."""


class InequalityViolation(PacketStatsError, AssertionError):
    exit_code = 4
