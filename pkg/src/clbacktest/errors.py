"""Error hierarchy shared across the package.

The CLI maps these onto exit codes: DataError -> 1, UsageError -> 2.
"""


class DataError(ValueError):
    """Malformed or inconsistent input data (bad CSV row, unordered bars)."""


class UsageError(ValueError):
    """Invalid invocation: bad flags, bad parameter values, empty selections."""
