"""Exception vocabulary shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, DataError -> 2,
NumericError -> 3.
"""


class DataError(Exception):
    """Bad input data or artifact: missing columns, unknown labels, malformed files."""


class TreeParseError(DataError):
    """Malformed tree text or tree JSON."""


class NumericError(Exception):
    """Numerical failure during training (divergence, non-finite loss)."""
