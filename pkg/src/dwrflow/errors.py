"""Exception types shared across the solver stack."""


class DwrflowError(Exception):
    """Base class for all package errors."""


class NonphysicalState(DwrflowError):
    """A conservative state has nonpositive density or pressure."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class UnknownCell(DwrflowError):
    """A cell id passed to a tree operation is not a leaf."""


class RootMismatch(DwrflowError):
    """Two trees do not derive from the same initial mesh."""


class NotARefinement(DwrflowError):
    """Field transfer requested between meshes without an ancestry relation."""


class UnknownBoundaryMarker(DwrflowError):
    """A functional references a boundary marker absent from the mesh."""


class DivisionByZero(DwrflowError):
    """An inverse component of a composite functional is zero."""


class NoConvergence(DwrflowError):
    """The multigrid solver hit its cycle cap before reaching tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NewtonDiverged(DwrflowError):
    """The Newton iteration is growing instead of contracting."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class BudgetExceeded(DwrflowError):
    """The adaptation loop exceeded its cell budget."""


class ConfigError(DwrflowError):
    """A run configuration file failed validation.

    ``violations`` is a list of (line, message) pairs; every problem found
    during parsing is reported at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"line {ln}: {msg}" if ln else msg for ln, msg in self.violations)
        super().__init__(lines)


class IoError(DwrflowError):
    """A mesh or field file could not be read or written."""
