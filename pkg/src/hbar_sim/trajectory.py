"""Worldlines: radial free fall from rest at infinity, and uniform acceleration.

Radii are in units of r_g and times in units of r_g/c. The infall closed
forms carry two free integration constants; by default the atom crosses the
horizon at proper time 0 and Schwarzschild time vanishes at r = 4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ode
from .errors import DomainError
from .geometry import tortoise

#: Closest approach to the horizon allowed when integrating coordinate time.
R_MIN = 1.0 + 1e-6


def _raw_coordinate_time(r):
    sr = np.sqrt(r)
    return -2.0 / 3.0 * r * sr - 2.0 * sr - np.log((sr - 1.0) / (sr + 1.0))


@dataclass(frozen=True)
class InfallTrajectory:
    """Closed-form radial geodesic for an atom dropped from rest at infinity."""

    tau_offset: float = 2.0 / 3.0
    t_offset: float = 28.0 / 3.0 - math.log(3.0)

    def proper_time_at(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 1.0):
            raise DomainError("proper time defined here only for r >= 1")
        tau = -2.0 / 3.0 * r**1.5 + self.tau_offset
        return tau if tau.ndim else float(tau)

    def coordinate_time_at(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 1.0):
            raise DomainError("Schwarzschild time diverges at the horizon; need r > 1")
        t = _raw_coordinate_time(r) + self.t_offset
        return t if t.ndim else float(t)

    def tortoise_at(self, r):
        return tortoise(r)

    @staticmethod
    def dtau_dr(r):
        return -np.sqrt(r)

    @staticmethod
    def dt_dr(r):
        return -(r**1.5) / (r - 1.0)

    def sample(self, r):
        """Columns (r, tau, t, r_star) for the radii ``r``."""
        r = np.asarray(r, dtype=float)
        return np.column_stack(
            [r, self.proper_time_at(r), self.coordinate_time_at(r), tortoise(r)]
        )


@dataclass
class GeodesicSamples:
    """Output of :func:`integrate_geodesic`."""

    r: np.ndarray
    tau: np.ndarray
    t: np.ndarray
    truncated: bool
    tau_residual: float
    t_residual: float
    message: str = "ok"

    @property
    def r_reached(self) -> float:
        return float(self.r[-1])


def integrate_geodesic(
    r_start: float,
    r_end: float,
    tol: float = 1e-10,
    trajectory: InfallTrajectory = InfallTrajectory(),
    r_min: float = R_MIN,
    max_steps: int = 200_000,
) -> GeodesicSamples:
    """Numerically integrate d tau/dr = -sqrt(r), dt/dr = -r^(3/2)/(r-1) inward.

    Starts from the closed-form values at ``r_start``. If ``r_end`` is below
    ``r_min`` (or the step budget runs out) the result stops early and is
    flagged ``truncated``. Residuals are the max absolute differences from
    the closed forms over all accepted steps.
    """
    if not r_start > 1.0 or not r_end > 1.0:
        raise DomainError("both endpoints must lie outside the horizon (r > 1)")
    if r_end > r_start:
        raise DomainError("integration runs inward: need r_end <= r_start")

    truncated = False
    message = "ok"
    target = r_end
    if r_end < r_min:
        target, truncated = r_min, True
        message = f"stopped at r_min={r_min!r}; dt/dr is too stiff closer to the horizon"

    y0 = [trajectory.proper_time_at(r_start), trajectory.coordinate_time_at(r_start)]

    def rhs(r, y):
        return np.array([-math.sqrt(r), -(r**1.5) / (r - 1.0)])

    sol = ode.solve(rhs, r_start, target, y0, rtol=tol, atol=tol, max_steps=max_steps)
    if sol.truncated:
        truncated, message = True, sol.message
    r = sol.t
    tau, t = sol.y[:, 0], sol.y[:, 1]
    tau_res = float(np.max(np.abs(tau - trajectory.proper_time_at(r))))
    t_res = float(np.max(np.abs(t - trajectory.coordinate_time_at(r))))
    return GeodesicSamples(r, tau, t, truncated, tau_res, t_res, message)


# -- uniformly accelerated motion in flat space ----------------------------


def accelerated_event(a, tau, c: float = 1.0):
    """Event (t, z) reached at proper time ``tau`` with z(0) = c^2/a."""
    if not np.all(np.asarray(a) > 0):
        raise DomainError("proper acceleration must be positive")
    tau = np.asarray(tau, dtype=float)
    arg = a * tau / c
    t = c / a * np.sinh(arg)
    z = c**2 / a * np.cosh(arg)
    if t.ndim == 0:
        return float(t), float(z)
    return t, z


@dataclass(frozen=True)
class AcceleratedWorldline:
    a: float
    c: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("proper acceleration must be positive")

    def event(self, tau):
        return accelerated_event(self.a, tau, self.c)

    def velocity(self, tau):
        """dz/dt = c tanh(a tau / c)."""
        return self.c * np.tanh(self.a * np.asarray(tau, dtype=float) / self.c)

    def lightcone(self, tau):
        """Null coordinates u = z - c t and v = z + c t at proper time ``tau``."""
        arg = self.a * np.asarray(tau, dtype=float) / self.c
        scale = self.c**2 / self.a
        return scale * np.exp(-arg), scale * np.exp(arg)

    def interval(self, tau):
        """z^2 - c^2 t^2 = u v; constant (c^2/a)^2 along the hyperbola.

        Formed from the null coordinates because z^2 - c^2 t^2 from (t, z)
        loses about 2 cosh^2(a tau / c) ulps to cancellation.
        """
        u, v = self.lightcone(tau)
        return u * v


def rindler_to_minkowski(t_bar, z_bar, a_bar, c: float = 1.0):
    """Map Rindler coordinates (t_bar, z_bar) to Minkowski (t, z)."""
    z_bar = np.asarray(z_bar, dtype=float)
    if np.any(z_bar <= 0):
        raise DomainError("Rindler depth z_bar must be positive")
    arg = a_bar * np.asarray(t_bar, dtype=float) / c
    t = z_bar / c * np.sinh(arg)
    z = z_bar * np.cosh(arg)
    if np.ndim(t) == 0:
        return float(t), float(z)
    return t, z


def rindler_proper_time(t_bar, z_bar, a_bar, c: float = 1.0):
    """Proper time a_bar t_bar z_bar / c^2 along a curve of fixed z_bar."""
    return a_bar * np.asarray(t_bar) * z_bar / c**2
