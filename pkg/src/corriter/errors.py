"""Semantic exception hierarchy.

Public functions raise these instead of bare ValueError so callers can
distinguish contract violations (bad input) from numerical events
(degenerate row, invariant breach) and from I/O problems.
"""

from __future__ import annotations


class CorriterError(Exception):
    """Base class for all package errors."""


class ConfigError(CorriterError, ValueError):
    """An experiment or CLI configuration violates its contract."""


class DimensionMismatchError(CorriterError, ValueError):
    """Two matrices that must share an order do not."""


class DegenerateRowError(CorriterError):
    """A centered row has (numerically) zero norm, so normalization is undefined."""

    def __init__(self, row: int, norm: float, floor: float):
        self.row = row
        self.norm = norm
        self.floor = floor
        super().__init__(
            f"centered row {row} is degenerate: norm {norm:.3e} <= floor {floor:.3e}"
        )


class NumericalInvariantError(CorriterError, FloatingPointError):
    """A quantity violated a bound that rounding alone cannot explain."""


class ResampleLimitExceededError(CorriterError):
    """Too many degenerate draws in a row; the generator is broken."""


class TrialError(CorriterError):
    """One or more trials failed; carries every (n, trial) context."""

    def __init__(self, failures):
        self.failures = list(failures)
        ctx = "; ".join(f"(n={n}, t={t}): {msg}" for n, t, msg in self.failures)
        super().__init__(f"{len(self.failures)} trial(s) failed: {ctx}")


class EmptySampleError(CorriterError, ValueError):
    """A statistic was requested on an empty sample."""


class NonPositiveDeltaError(CorriterError, ValueError):
    """Log-binning requires strictly positive step sizes."""


class InsufficientDataError(CorriterError):
    """Not enough dimensions or trials to evaluate a law."""


class MissingInputError(CorriterError, FileNotFoundError):
    """A required input file is absent."""


class SchemaMismatchError(CorriterError, ValueError):
    """A CSV file does not match the fixed column schema."""
