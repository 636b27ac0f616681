"""Physical constants and the geometric (r_g = c = hbar = k_B = 1) unit set."""
from __future__ import annotations

from dataclasses import dataclass

CONSTANTS_VERSION = "CODATA-2018"

#: Solar mass in kg.
SOLAR_MASS = 1.98892e30


@dataclass(frozen=True)
class Constants:
    """Values of G, c, hbar and k_B in one consistent unit system."""

    G: float
    c: float
    hbar: float
    k_B: float
    name: str = ""


CODATA2018 = Constants(
    G=6.67430e-11,
    c=299792458.0,
    hbar=1.054571817e-34,
    k_B=1.380649e-23,
    name=CONSTANTS_VERSION,
)


def geometric(mass: float = 1.0) -> Constants:
    """Units where c = hbar = k_B = 1 and a hole of ``mass`` has r_g = 1.

    Lengths are then measured in r_g, times in r_g/c and angular frequencies
    in c/r_g. Setting r_g = 2GM/c^2 = 1 fixes G = 1/(2M).
    """
    if not mass > 0:
        raise ValueError(f"mass must be positive, got {mass!r}")
    return Constants(G=0.5 / mass, c=1.0, hbar=1.0, k_B=1.0, name="geometric")
