"""Von Neumann entropy of the field and the HBAR entropy/area bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BlackHole, entropy_per_area

#: Populations below this are treated as exactly zero inside logarithms.
LOG_FLOOR = 1e-300


def _as_array(p):
    return np.asarray(getattr(p, "p", p), dtype=float)


def von_neumann_entropy(p) -> float:
    """S / k_B = -sum p_n ln p_n for a diagonal state (0 ln 0 = 0)."""
    p = _as_array(p)
    mask = p > LOG_FLOOR
    return float(-np.sum(p[mask] * np.log(p[mask])))


def entropy_rate_full(p, p_dot) -> float:
    """S_dot / k_B = -sum p_dot_n ln p_n, skipping empty levels."""
    p, p_dot = _as_array(p), _as_array(p_dot)
    mask = p > LOG_FLOOR
    return float(-np.sum(p_dot[mask] * np.log(p[mask])))


@dataclass(frozen=True)
class SteadyEntropyRate:
    sum_form: float        # -sum p_dot_n ln p_n^SS
    reduced_form: float    # 2 xi d<n>/dt
    n_dot: float
    valid: bool            # near steady state and probability-conserving
    steady_distance: float

    @property
    def agreement(self) -> float:
        scale = max(abs(self.sum_form), abs(self.reduced_form))
        return 0.0 if scale == 0 else abs(self.sum_form - self.reduced_form) / scale


def entropy_rate_steady(p, p_dot, xi: float, near_tol: float = 1e-2,
                        conservation_tol: float = 1e-12) -> SteadyEntropyRate:
    """Entropy production with ln p_n replaced by its thermal value.

    ln p_n^SS = -2 xi n + ln(1 - e^{-2 xi}); the constant drops when
    sum p_dot_n = 0, leaving 2 xi d<n>/dt. Both forms are returned. ``valid``
    is False when p is further than ``near_tol`` (L-inf) from the thermal
    state or when probability is not conserved, in which case only the sum
    form should be trusted.
    """
    p, p_dot = _as_array(p), _as_array(p_dot)
    n = np.arange(p.size)
    log_ss = -2.0 * xi * n + math.log(-math.expm1(-2.0 * xi))
    sum_form = float(-np.sum(p_dot * log_ss))
    n_dot = float(n @ p_dot)
    reduced = 2.0 * xi * n_dot
    p_ss = np.exp(log_ss)
    distance = float(np.max(np.abs(p - p_ss)))
    scale = max(np.max(np.abs(p_dot)), 1e-300)
    conserving = abs(float(np.sum(p_dot))) <= conservation_tol * scale * p.size
    return SteadyEntropyRate(sum_form, reduced, n_dot, distance <= near_tol and conserving,
                             distance)


@dataclass(frozen=True)
class FluxMode:
    nu: float       # angular frequency in the ledger's unit system
    n_dot: float    # photons per unit time leaving the cavity


@dataclass(frozen=True)
class FluxLedger:
    """Photon fluxes by mode, in the units of the hole they are booked against."""

    modes: tuple
    bh: BlackHole

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(
            m if isinstance(m, FluxMode) else FluxMode(*m) for m in self.modes))

    @property
    def power(self) -> float:
        """hbar sum nu n_dot."""
        return self.bh.constants.hbar * math.fsum(m.nu * m.n_dot for m in self.modes)

    @property
    def m_dot_p(self) -> float:
        return self.power / self.bh.constants.c**2

    def per_mode(self):
        return [FluxLedger((m,), self.bh) for m in self.modes]


def hbar_entropy_flux(modes, bh: BlackHole) -> float:
    """S_dot_p = (4 pi k_B r_g / c) sum nu n_dot.

    ``modes`` is an iterable of :class:`FluxMode` or (nu, n_dot) pairs with
    frequencies in the units of ``bh``.
    """
    total = 0.0
    c = bh.constants
    for m in modes:
        nu, n_dot = (m.nu, m.n_dot) if isinstance(m, FluxMode) else m
        total += nu * n_dot
    return 4.0 * math.pi * c.k_B * bh.r_g / c.c * total


def hbar_entropy_flux_xi(xis, n_dots, k_B: float = 1.0) -> float:
    """Same flux written with xi: 2 k_B sum xi n_dot."""
    return 2.0 * k_B * math.fsum(x * n for x, n in zip(xis, n_dots))


@dataclass(frozen=True)
class AreaLaw:
    m_dot_p: float
    A_dot_p: float
    S_dot_p: float          # from the photon flux
    S_dot_from_area: float  # (k_B c^3 / 4 hbar G) A_dot_p

    @property
    def residual(self) -> float:
        scale = max(abs(self.S_dot_p), abs(self.S_dot_from_area))
        return 0.0 if scale == 0 else abs(self.S_dot_p - self.S_dot_from_area) / scale

    def holds(self, rtol: float = 1e-10) -> bool:
        return self.residual <= rtol


def area_rate(m_dot, bh: BlackHole) -> float:
    """A_dot = 32 pi G^2 M m_dot / c^4."""
    c = bh.constants
    return 32.0 * math.pi * c.G**2 * bh.mass * m_dot / c.c**4


def area_rate_and_entropy_law(ledger: FluxLedger, bh: BlackHole | None = None) -> AreaLaw:
    """Entropy rate two ways: from the flux, and from the horizon-area change."""
    bh = ledger.bh if bh is None else bh
    m_dot = ledger.m_dot_p
    a_dot = area_rate(m_dot, bh)
    return AreaLaw(m_dot, a_dot, hbar_entropy_flux(ledger.modes, bh),
                   entropy_per_area(bh.constants) * a_dot)


@dataclass(frozen=True)
class MassBudget:
    M_dot: float
    A_dot_total: float
    A_dot_atom: float
    A_dot_p: float


def mass_budget(m_dot_atom: float, ledger: FluxLedger, bh: BlackHole | None = None) -> MassBudget:
    """M_dot = m_dot_atom + m_dot_p and the matching area rates (2 m_dot / M) A."""
    bh = ledger.bh if bh is None else bh
    m_dot_p = ledger.m_dot_p
    M_dot = m_dot_atom + m_dot_p
    scale = 2.0 * bh.area / bh.mass
    return MassBudget(M_dot, scale * M_dot, scale * m_dot_atom, scale * m_dot_p)
