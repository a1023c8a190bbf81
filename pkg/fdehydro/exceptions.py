"""fdehydro exceptions."""


class FdeHydroError(Exception):
    """Base class for all fdehydro errors."""

    def __str__(self):
        """Return a string representation of the exception."""
        return f"{self.__class__.__name__}: {self.args[0]}"

    def __repr__(self):
        """Return a string representation of the exception."""
        return f"{self.__class__.__name__}(message='{self.args[0]}')"


class LatticeError(FdeHydroError):
    """Base class for lattice errors."""


class EmptySiteError(LatticeError):
    """A particle was moved from an empty site."""

    def __init__(self, site: int):
        """Initialize empty site error."""
        super().__init__(f"site {site} holds no particle")
        self.site = site


class NotNeighborError(LatticeError):
    """Two sites are not nearest neighbors on the torus."""

    def __init__(self, x: int, y: int, n: int):
        """Initialize not neighbor error."""
        super().__init__(f"sites {x} and {y} are not neighbors on a torus of size {n}")


class SizeMismatchError(LatticeError, ValueError):
    """Two lattice objects have different sizes."""

    def __init__(self, expected: int, actual: int):
        """Initialize size mismatch error."""
        super().__init__(f"expected size {expected}, got {actual}")


class DomainError(FdeHydroError, ValueError):
    """An argument lies outside the domain of a function."""


class InvalidCheckpointError(FdeHydroError, ValueError):
    """Checkpoints are unsorted or outside the simulated interval."""


class OrderViolationError(FdeHydroError):
    """A coupled run broke the coordinatewise order.

    Indicates an implementation bug, never a user error.
    """

    def __init__(self, violations: int):
        """Initialize order violation error."""
        super().__init__(f"coupling order violated {violations} times")
        self.violations = violations


class IntegrationError(FdeHydroError):
    """Base class for ODE integration failures."""


class StiffnessFailureError(IntegrationError):
    """The integrator could not make progress."""

    def __init__(self, message: str, time: float):
        """Initialize stiffness failure error."""
        super().__init__(f"integration stalled at t={time}: {message}")
        self.time = time


class NegativityBreachError(IntegrationError):
    """A negative density appeared during integration."""

    def __init__(self, time: float, value: float):
        """Initialize negativity breach error."""
        super().__init__(
            f"density reached {value} at t={time}, tolerance is too loose"
        )
        self.time = time


class ZeroDensityError(FdeHydroError, ZeroDivisionError):
    """A field divides by phi_n(u) where u vanishes."""

    def __init__(self, site: int):
        """Initialize zero density error."""
        super().__init__(f"phi_n(u) vanishes at site {site}")
        self.site = site


class GridMismatchError(FdeHydroError, ValueError):
    """Two solutions cannot be compared on a common grid."""


class EnsembleError(FdeHydroError):
    """Base class for canonical ensemble errors."""


class TooLargeError(EnsembleError):
    """A state space exceeds the configured cap."""

    def __init__(self, size: int, cap: int):
        """Initialize too large error."""
        super().__init__(f"state space of size {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


class DegenerateBoxError(EnsembleError):
    """A canonical box has fewer than two states."""

    def __init__(self, ell: int, k: int):
        """Initialize degenerate box error."""
        super().__init__(f"box with ell={ell}, k={k} has a single state, no gap")


class ConfigError(FdeHydroError, ValueError):
    """Invalid experiment configuration."""

    def __init__(self, field: str, message: str):
        """Initialize config error."""
        super().__init__(f"{field}: {message}")
        self.field = field


class PlotIoError(FdeHydroError, OSError):
    """A plot could not be produced from the result files."""
