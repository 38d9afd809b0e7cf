"""Semantic exceptions shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NumericsError(RuntimeError):
    """A numerical routine failed to reach its requested tolerance."""
