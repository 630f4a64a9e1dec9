"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code, so library failures surface as
distinct statuses: usage/config problems (2), malformed data (3),
non-finite numerics (4), broken internal invariants (5).
"""


class ShortfuseError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(ShortfuseError):
    """Invalid configuration, flag, or argument value."""

    exit_code = 2


class ShapeError(ConfigError):
    """Tensor shape or dimension mismatch. Treated as a usage error."""


class DataError(ShortfuseError):
    """Malformed or inconsistent input data files."""

    exit_code = 3


class NumericError(ShortfuseError):
    """Non-finite value produced where the contract requires finiteness."""

    exit_code = 4


class InvariantError(ShortfuseError):
    """An internal invariant (determinism, leakage freedom, ...) was violated."""

    exit_code = 5
