"""Exception hierarchy shared by all modules."""


class CavityDressedError(Exception):
    """Base class for package errors."""


class ConfigError(CavityDressedError, ValueError):
    """Missing or malformed configuration input."""


class ValidationError(CavityDressedError, ValueError):
    """A value violates a documented precondition or invariant."""


class SolverError(CavityDressedError, RuntimeError):
    """Internal numerical failure (a broken solver contract, not bad input)."""


class IntegrationError(CavityDressedError, RuntimeError):
    """Time integration aborted (step underflow or invariant violation)."""
