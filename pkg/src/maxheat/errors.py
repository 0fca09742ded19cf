"""Error taxonomy shared by the library and the command line driver.

Three failure classes map onto distinct process exit codes so scripted
callers can tell a bad input apart from a blown-up computation:

    ConfigError         rejected configuration or inconsistent inputs (exit 2)
    NumericsError       NaN/Inf fields, CG breakdown, CFL violation   (exit 3)
    NonConvergenceError fixed-point iteration hit its cap             (exit 4)
"""

from __future__ import annotations


class MaxheatError(Exception):
    """Base class for all package errors."""


class ConfigError(MaxheatError):
    """Invalid configuration value or malformed input file.

    Messages name the offending key or quantity so the user can fix the
    config without reading a stack trace.
    """


class NumericsError(MaxheatError):
    """The computation produced non-finite values or an inner solve failed.

    ``details`` may carry step indices or residual histories for
    diagnosis.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class NonConvergenceError(MaxheatError):
    """A fixed-point iteration exhausted its iteration budget.

    ``deltas`` holds the update magnitudes seen before giving up so the
    caller can tell stagnation from divergence.
    """

    def __init__(self, message: str, deltas: list[float] | None = None):
        super().__init__(message)
        self.deltas = list(deltas) if deltas is not None else []
