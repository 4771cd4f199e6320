"""Exception types raised by the simulator."""

import numpy as np


class CusbfError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CusbfError, ValueError):
    """A scenario or sweep parameter is invalid.

    ``field`` names the offending configuration key when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DomainError(CusbfError, ValueError):
    """A numerical function was called outside its domain."""


class ContractError(CusbfError, ValueError):
    """An input violates a structural precondition (e.g. non-Toeplitz)."""


class SchedulingError(CusbfError):
    """No user can be scheduled (all-zero spectra or channels)."""


class RankDeficientError(CusbfError, np.linalg.LinAlgError):
    """Zero-forcing input is numerically rank deficient.

    ``rows`` lists the row indices that are (close to) linear combinations
    of earlier rows.
    """

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = tuple(rows)
