"""Exception hierarchy.

Input problems subclass ValueError, resource problems subclass RuntimeError, so
callers that only know the builtin types still catch them.
"""

from __future__ import annotations

from typing import Optional


class BiscountError(Exception):
    """Base class for every error raised by this package."""


class GraphFormatError(BiscountError, ValueError):
    """Malformed edge-list file. `line` is 1-based."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class GraphInvariantError(BiscountError, ValueError):
    pass


class PartMismatchError(BiscountError, ValueError):
    pass


class GenerationError(BiscountError, RuntimeError):
    pass


class ConvergenceError(BiscountError, RuntimeError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual norm {residual:.3e})")


class BudgetExceededError(BiscountError, RuntimeError):
    """A configured budget was exceeded in `stage`."""

    def __init__(self, stage: str, limit: float, observed: float, hint: str = ""):
        self.stage = stage
        self.limit = limit
        self.observed = observed
        msg = f"{stage}: budget {limit:g} exceeded (needed {observed:g})"
        if hint:
            msg = f"{msg}; {hint}"
        super().__init__(msg)


class SizeLimitError(BudgetExceededError):
    """An exact (exponential-time) routine was asked for an instance above its limit."""


class RegimeError(BiscountError, ValueError):
    pass


class ProfileNotFoundError(BiscountError, KeyError):
    """No profile of that name in the profile file."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


__all__ = [
    "BiscountError",
    "GraphFormatError",
    "GraphInvariantError",
    "PartMismatchError",
    "GenerationError",
    "ConvergenceError",
    "BudgetExceededError",
    "SizeLimitError",
    "RegimeError",
    "ProfileNotFoundError",
]
