"""Exception types raised across the package."""


class ABQEDError(Exception):
    """Base class for all package errors."""


class EvaluationInsideSource(ABQEDError):
    """A field point lies within the exclusion radius of a singular source."""


class WrongElementKind(ABQEDError, TypeError):
    pass


class InvalidGeometry(ABQEDError, ValueError):
    pass


class QuadratureNotConverged(ABQEDError):
    """Adaptive quadrature hit its depth limit before meeting the tolerance.

    ``value`` and ``error`` hold the best estimate reached.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class OpenLoop(ABQEDError, ValueError):
    pass


class ZeroWavevector(ABQEDError, ValueError):
    pass


class NonCompactSource(ABQEDError, ValueError):
    """The source has no square-integrable Fourier transform (e.g. an infinite solenoid)."""


class SelfEnergyDivergent(ABQEDError):
    """The ground-energy constant diverges for point-like sources."""


class PhaseNotConverged(QuadratureNotConverged):
    pass


class CalculatorMismatchOnClosedLoop(ABQEDError):
    """Hamiltonian and energy phase differences disagree on a closed loop."""


class BadScenarioParameters(ABQEDError, ValueError):
    pass


class ConfigParseError(ABQEDError, ValueError):
    pass
