"""Physical constants for SI and reduced (eps0 = c = hbar = 1) unit systems."""

from dataclasses import dataclass
import math

from .errors import InvalidGeometry

ELEMENTARY_CHARGE = 1.602176634e-19
ELECTRON_MASS = 9.1093837015e-31


@dataclass(frozen=True)
class PhysicalConstants:
    eps0: float
    mu0: float
    c: float
    hbar: float
    name: str = "custom"

    def __post_init__(self):
        for field in ("eps0", "mu0", "c", "hbar"):
            if not getattr(self, field) > 0:
                raise InvalidGeometry(f"{field} must be positive")
        if abs(self.c**2 * self.mu0 * self.eps0 - 1.0) > 1e-12:
            raise InvalidGeometry("constants violate c^2 mu0 eps0 = 1")


_EPS0_SI = 8.8541878128e-12
_C_SI = 299792458.0

SI = PhysicalConstants(
    eps0=_EPS0_SI,
    mu0=1.0 / (_EPS0_SI * _C_SI**2),
    c=_C_SI,
    hbar=1.054571817e-34,
    name="si",
)

REDUCED = PhysicalConstants(eps0=1.0, mu0=1.0, c=1.0, hbar=1.0, name="reduced")


def constants_for(units):
    """Return the constant set for ``"si"`` or ``"reduced"``."""
    try:
        return {"si": SI, "reduced": REDUCED}[units]
    except KeyError:
        raise ValueError(f"unknown unit system {units!r}") from None


def default_particle(units):
    """(charge, mass) of the default particle: an electron in SI, q = m = 1 otherwise."""
    if units == "si":
        return -ELEMENTARY_CHARGE, ELECTRON_MASS
    return 1.0, 1.0


def coulomb_factor(constants):
    return 1.0 / (4.0 * math.pi * constants.eps0)
