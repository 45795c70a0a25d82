"""Exception hierarchy shared across the package."""


class HKLabError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(HKLabError, ValueError):
    """Malformed or inconsistent input data."""


class FamilyMismatchError(HKLabError, ValueError):
    """Two systems compared across incompatible (lattice, N, w, ...) families."""


class EnsembleMismatchError(FamilyMismatchError):
    """Thermal comparison across different ensembles."""


class DimensionTooLargeError(HKLabError, ValueError):
    """Dense operation requested above the densification cutoff."""


class SolverConvergenceError(HKLabError, RuntimeError):
    """Iterative eigensolver exhausted its budget without converging."""


class DegenerateGroundError(HKLabError, RuntimeError):
    """Ground state (near-)degeneracy makes the requested quantity set-valued."""


class HypothesisNotSatisfiedError(HKLabError, RuntimeError):
    """A theorem-verifier was invoked on data violating its hypothesis."""


class LevelCrossingError(HKLabError, RuntimeError):
    """Perturbation strength large enough to reorder energy levels."""

    def __init__(self, message, threshold=None):
        super().__init__(message)
        self.threshold = threshold


class ConfigError(HKLabError, ValueError):
    """Malformed experiment configuration; message names the offending key."""
