"""Shared exception types."""


class ExactLimitError(ValueError):
    """An exact (brute-force) routine was asked to exceed its instance-size limit."""
