"""Exception types shared across the package.

The command line front end maps these onto process exit codes, so the
split between configuration problems, numerical tolerance failures and
internal invariant breaches is part of the public contract.
"""


class ConfigurationError(ValueError):
    """Bad user input: unknown keys, malformed labels, index ranges."""


class ToleranceError(ArithmeticError):
    """A numerical precondition failed (membership, Hermiticity, support)."""


class InvariantError(RuntimeError):
    """An internal consistency guarantee was violated."""
