"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
CapacityError -> 3, NumericalInvariantError -> 4.
"""


class QpIsingError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QpIsingError):
    """Invalid user input: sizes, parameter ranges, malformed files."""


class AngleWindowError(ConfigError):
    """RZZ angle outside the hardware-native window (requires W >= 4/pi)."""


class ColoringError(ConfigError):
    """Edge coloring is not a partition into matchings."""


class AdjacencyError(QpIsingError):
    """Two-site MPS gate requested on non-adjacent sites."""


class CapacityError(QpIsingError):
    """Resource budget exceeded (state-vector memory)."""

    def __init__(self, message, required_bytes=None):
        super().__init__(message)
        self.required_bytes = required_bytes


class NumericalInvariantError(QpIsingError):
    """A numerical invariant (e.g. state norm) drifted beyond tolerance."""


class InsufficientDataError(QpIsingError, ValueError):
    """Estimator called with too few samples or an empty fit window."""
