"""Shared exception types."""


class ResourceLimit(Exception):
    """A configured search budget was exhausted before a verdict was reached.

    This is never a verdict: callers must not read it as unsatisfiable
    or false.
    """
