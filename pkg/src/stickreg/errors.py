"""Exceptions shared across the package.

The command line maps these to distinct exit codes, so library code
should raise them rather than bare ValueError when the cause is bad
input data or a numerical failure.
"""


class DataError(Exception):
    """Malformed or inconsistent input data (files, labels, shapes)."""


class NumericError(Exception):
    """Numerical failure that invalidates a run (e.g. a precision
    matrix that stays indefinite after one jitter retry)."""
