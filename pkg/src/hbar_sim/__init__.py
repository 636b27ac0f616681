"""Acceleration radiation from atoms falling into a Schwarzschild black hole.

Modules: :mod:`geometry` (units, horizon quantities, tortoise coordinate),
:mod:`trajectory` (infall and uniformly accelerated worldlines),
:mod:`excitation` (emission/absorption probabilities), :mod:`master_equation`
(photon statistics of a cavity mode), :mod:`entropy` (field entropy and the
area bookkeeping) and :mod:`runner` (scenario pipeline behind ``hbar-sim``).
"""
__version__ = "0.1.0"

from .constants import CODATA2018, CONSTANTS_VERSION, SOLAR_MASS, Constants, geometric
from .errors import ConfigError, ConvergenceError, DomainError
from .geometry import (BlackHole, UnitMode, UnitSystem, gravitational_radius,
                       hawking_temperature, horizon_area, tortoise, tortoise_inverse)
from .excitation import (AtomSpec, ModeSpec, QuadratureConfig, absorption_probability,
                         excitation_probability_closed_form, excitation_probability_numeric)
from .master_equation import FockPopulations, evolve, mode_rates, steady_state
from .entropy import von_neumann_entropy, hbar_entropy_flux, area_rate_and_entropy_law

__all__ = [
    "__version__", "CODATA2018", "CONSTANTS_VERSION", "SOLAR_MASS", "Constants", "geometric",
    "ConfigError", "ConvergenceError", "DomainError",
    "BlackHole", "UnitMode", "UnitSystem", "gravitational_radius", "hawking_temperature",
    "horizon_area", "tortoise", "tortoise_inverse",
    "AtomSpec", "ModeSpec", "QuadratureConfig", "absorption_probability",
    "excitation_probability_closed_form", "excitation_probability_numeric",
    "FockPopulations", "evolve", "mode_rates", "steady_state",
    "von_neumann_entropy", "hbar_entropy_flux", "area_rate_and_entropy_law",
]
