"""Exception hierarchy shared by the library and the command line front end."""


class LeoHarvestError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LeoHarvestError, ValueError):
    """An argument lies outside the domain of a formula."""


class OutOfCap(DomainError):
    """The orbit never enters the spherical cap of the typical user."""


class OutOfRange(DomainError):
    """A distance lies outside the admissible interval ``[r_a, sqrt(r_o^2 - r_e^2)]``."""


class OutOfValidity(DomainError):
    """A closed form is evaluated past the point where it stops being exact."""


class DegenerateGeometry(DomainError):
    """The communication range collapses the cap to a single point."""


class QuadratureFailure(LeoHarvestError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance.

    Attributes
    ----------
    interval : tuple of float
        The subinterval carrying the largest error estimate when work stopped.
    error : float
        The achieved global error estimate.
    """

    def __init__(self, message: str, interval: tuple[float, float], error: float):
        super().__init__(f"{message} (worst interval [{interval[0]:.6g}, {interval[1]:.6g}], "
                         f"error estimate {error:.3g})")
        self.interval = interval
        self.error = error


class ConfigError(LeoHarvestError):
    """The experiment configuration is malformed or inconsistent."""
