"""Schwarzschild horizon thermodynamics, units and near-horizon coordinates.

Everything internal works in the dimensionless system where lengths are
measured in the gravitational radius r_g = 2GM/c^2, times in r_g/c and
angular frequencies in c/r_g. :class:`UnitSystem` converts to and from SI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constants import CODATA2018, Constants, geometric
from .errors import ConvergenceError, DomainError


class UnitMode(str, Enum):
    DIMENSIONLESS = "dimensionless"
    SI = "si"


_KINDS = ("length", "time", "frequency", "rate", "area")


@dataclass(frozen=True)
class UnitSystem:
    """Conversion between SI and r_g-based dimensionless quantities.

    :meth:`to_si` and :meth:`to_dimensionless` always convert. ``mode``
    records which system user-facing values are expressed in, and
    :meth:`to_internal` / :meth:`to_user` convert only when it is SI.
    """

    r_g_meters: float
    mode: UnitMode = UnitMode.DIMENSIONLESS
    c: float = CODATA2018.c

    def __post_init__(self):
        if not self.r_g_meters > 0:
            raise DomainError(f"r_g_meters must be positive, got {self.r_g_meters!r}")
        object.__setattr__(self, "mode", UnitMode(self.mode))

    @classmethod
    def from_mass(cls, mass_kg, mode=UnitMode.DIMENSIONLESS, constants=CODATA2018):
        return cls(gravitational_radius(mass_kg, constants), mode, constants.c)

    def scale(self, kind: str) -> float:
        """SI value of one dimensionless unit of ``kind``."""
        if kind == "length":
            return self.r_g_meters
        if kind == "area":
            return self.r_g_meters**2
        if kind == "time":
            return self.r_g_meters / self.c
        if kind in ("frequency", "rate"):
            return self.c / self.r_g_meters
        raise ValueError(f"unknown quantity kind {kind!r}; expected one of {_KINDS}")

    def to_si(self, value, kind):
        return value * self.scale(kind)

    def to_dimensionless(self, value, kind):
        return value / self.scale(kind)

    def to_internal(self, value, kind):
        """User-facing value to the dimensionless working representation."""
        return value if self.mode is UnitMode.DIMENSIONLESS else self.to_dimensionless(value, kind)

    def to_user(self, value, kind):
        return value if self.mode is UnitMode.DIMENSIONLESS else self.to_si(value, kind)


def _check_mass(M):
    if not np.all(np.asarray(M) > 0):
        raise DomainError(f"mass must be positive, got {M!r}")


def gravitational_radius(M, constants: Constants = CODATA2018):
    _check_mass(M)
    return 2.0 * constants.G * M / constants.c**2


def hawking_temperature(M, constants: Constants = CODATA2018):
    """T_BH = hbar c^3 / (8 pi k_B G M)."""
    _check_mass(M)
    c = constants
    return c.hbar * c.c**3 / (8.0 * math.pi * c.k_B * c.G * M)


def horizon_area(M, constants: Constants = CODATA2018):
    """A = 16 pi G^2 M^2 / c^4 (= 4 pi r_g^2)."""
    _check_mass(M)
    c = constants
    return 16.0 * math.pi * c.G**2 * M**2 / c.c**4


def entropy_per_area(constants: Constants = CODATA2018) -> float:
    """The Bekenstein-Hawking coefficient k_B c^3 / (4 hbar G)."""
    c = constants
    return c.k_B * c.c**3 / (4.0 * c.hbar * c.G)


def bh_entropy_rate(M, dM_dt, constants: Constants = CODATA2018):
    """Rate of Bekenstein-Hawking entropy change for a hole losing/gaining mass.

    Evaluates both k_B (8 pi G / hbar c) M dM/dt and (k_B c^3 / 4 hbar G) dA/dt
    with dA/dt = 32 pi G^2 M dM/dt / c^4, and refuses to return if they
    disagree beyond rounding.
    """
    _check_mass(M)
    c = constants
    from_mass = c.k_B * 8.0 * math.pi * c.G / (c.hbar * c.c) * M * dM_dt
    dA_dt = 32.0 * math.pi * c.G**2 * M * dM_dt / c.c**4
    from_area = entropy_per_area(c) * dA_dt
    if not np.allclose(from_mass, from_area, rtol=1e-12, atol=0.0):
        raise ArithmeticError("mass and area forms of the entropy rate disagree")
    return from_mass


@dataclass(frozen=True)
class BlackHole:
    """A Schwarzschild hole of mass ``mass`` expressed in ``constants`` units.

    With :func:`hbar_sim.constants.geometric` constants the same object gives
    r_g = 1 and dimensionless temperatures; with CODATA constants it is SI.
    """

    mass: float
    constants: Constants = CODATA2018

    def __post_init__(self):
        _check_mass(self.mass)

    @classmethod
    def dimensionless(cls, mass: float = 1.0) -> "BlackHole":
        return cls(mass, geometric(mass))

    @classmethod
    def from_gravitational_radius(cls, r_g, constants: Constants = CODATA2018):
        if not r_g > 0:
            raise DomainError(f"r_g must be positive, got {r_g!r}")
        return cls(r_g * constants.c**2 / (2.0 * constants.G), constants)

    @property
    def r_g(self) -> float:
        return gravitational_radius(self.mass, self.constants)

    @property
    def area(self) -> float:
        return horizon_area(self.mass, self.constants)

    @property
    def temperature(self) -> float:
        return hawking_temperature(self.mass, self.constants)

    def units(self, mode=UnitMode.DIMENSIONLESS) -> UnitSystem:
        return UnitSystem(self.r_g, mode, self.constants.c)

    def xi(self, nu):
        """Boltzmann half-exponent 2 pi nu r_g / c for angular frequency ``nu``."""
        return 2.0 * math.pi * nu * self.r_g / self.constants.c


# -- tortoise coordinate ---------------------------------------------------


def tortoise(r):
    """Regge-Wheeler coordinate r* = r + ln(r - 1), r in units of r_g."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 1.0):
        raise DomainError("tortoise coordinate requires r > 1 (outside the horizon)")
    out = r + np.log(r - 1.0)
    return out if out.ndim else float(out)


def _horizon_offset_scalar(r_star: float, tol: float, max_iter: int) -> float:
    if not math.isfinite(r_star):
        raise DomainError(f"r_star must be finite, got {r_star!r}")
    # Solve for y = ln(r - 1): e^y + y + 1 = r_star. Working in y keeps
    # r - 1 at full relative precision close to the horizon.
    target = r_star - 1.0
    y = target if target < 1.0 else math.log(target)
    for _ in range(max_iter):
        ey = math.exp(y)
        step = (ey + y - target) / (ey + 1.0)
        y -= step
        if abs(step) <= tol * max(1.0, abs(y)):
            return math.exp(y)

    # the residual is increasing in y; bisect on the bracket
    lo = math.log(1e-15)
    hi = math.log(max(r_star, 2.0) + 50.0)
    f = lambda v: math.exp(v) + v - target  # noqa: E731
    if f(lo) > 0:
        lo = target - 1.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            return math.exp(0.5 * (lo + hi))
    raise ConvergenceError(f"tortoise_inverse failed for r_star={r_star!r}")


def horizon_offset(r_star, tol: float = 1e-15, max_iter: int = 100):
    """r - 1 for the radius whose tortoise coordinate is ``r_star``.

    Newton iteration on ln(r - 1) with a bisection fallback. Unlike
    :func:`tortoise_inverse` this keeps full relative precision arbitrarily
    close to the horizon.
    """
    arr = np.asarray(r_star, dtype=float)
    if arr.ndim == 0:
        return _horizon_offset_scalar(float(arr), tol, max_iter)
    flat = [_horizon_offset_scalar(float(v), tol, max_iter) for v in arr.ravel()]
    return np.array(flat).reshape(arr.shape)


def tortoise_inverse(r_star, tol: float = 1e-15, max_iter: int = 100):
    """Radius r > 1 with r + ln(r - 1) = r_star.

    Below r_star of about -36 the offset from the horizon is under double
    precision resolution and the result rounds to 1.0; use
    :func:`horizon_offset` there.
    """
    return 1.0 + horizon_offset(r_star, tol, max_iter)


# -- near-horizon Rindler approximation ------------------------------------


def rindler_static_acceleration(r_bar, r_g: float = 1.0, c: float = 1.0):
    """Proper acceleration of a static observer at areal radius ``r_bar``.

    a = (c^2 / 2 r_g) (1 - r_g / r_bar)^(-1/2); tends to c^2 / 2 r_g far away
    and diverges at the horizon.
    """
    r_bar = np.asarray(r_bar, dtype=float)
    if np.any(r_bar <= r_g):
        raise DomainError("static acceleration requires r_bar > r_g")
    a = c**2 / (2.0 * r_g) / np.sqrt(1.0 - r_g / r_bar)
    return a if a.ndim else float(a)


def rindler_acceleration(z_bar, c: float = 1.0):
    """Acceleration c^2 / z_bar of a curve of constant Rindler depth."""
    z_bar = np.asarray(z_bar, dtype=float)
    if np.any(z_bar <= 0):
        raise DomainError("Rindler depth z_bar must be positive")
    a = c**2 / z_bar
    return a if a.ndim else float(a)


def rindler_depth(r_bar, r_g: float = 1.0):
    """Depth z_bar with r_bar = r_g + z_bar^2 / (4 r_g)."""
    r_bar = np.asarray(r_bar, dtype=float)
    if np.any(r_bar <= r_g):
        raise DomainError("Rindler depth requires r_bar > r_g")
    z = 2.0 * np.sqrt(r_g * (r_bar - r_g))
    return z if z.ndim else float(z)


def radius_from_rindler_depth(z_bar, r_g: float = 1.0):
    z_bar = np.asarray(z_bar, dtype=float)
    r = r_g + z_bar**2 / (4.0 * r_g)
    return r if r.ndim else float(r)
