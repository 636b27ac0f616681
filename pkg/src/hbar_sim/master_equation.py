"""Coarse-grained photon-number dynamics of one cavity mode.

Atoms injected at rate r each emit with probability P_exc and absorb with
P_abs, so the diagonal density matrix p_n = rho_nn obeys the birth-death
equation

    dp_n/dt = -G_e [(n+1) p_n - n p_{n-1}] - G_a [n p_n - (n+1) p_{n+1}]
              - kappa [n p_n - (n+1) p_{n+1}]

with G_{e,a} = r (g/omega)^2 R e^{-/+ xi}, R = xi / sinh(xi). The kappa term
is an optional zero-temperature leak of photons out of the cavity. The state
space is truncated at n = N with a reflecting top level, so probability is
conserved exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from . import ode
from .errors import ConvergenceError, DomainError
from .excitation import AtomSpec, ModeSpec
from .geometry import BlackHole

MIN_LEVELS = 20
TAIL_TOL = 1e-10
NEGATIVE_TOL = 1e-12


def suppression_factor(xi):
    """R = xi / sinh(xi), with R(0) = 1."""
    xi = np.asarray(xi, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(xi == 0.0, 1.0, xi / np.sinh(xi))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ModeKinetics:
    xi: float
    R: float
    gamma_e: float
    gamma_a: float
    injection_rate: float
    kappa: float = 0.0

    def __post_init__(self):
        if self.gamma_e < 0 or self.gamma_a < 0 or self.kappa < 0:
            raise DomainError("rates must be non-negative")

    @property
    def relaxation_rate(self) -> float:
        """Spectral gap G_a + kappa - G_e of the generator."""
        return self.gamma_a + self.kappa - self.gamma_e

    @property
    def mean_steady(self) -> float:
        """Stationary mean photon number G_e / (G_a + kappa - G_e)."""
        if self.relaxation_rate <= 0:
            raise DomainError("no normalisable steady state when G_a + kappa <= G_e")
        return self.gamma_e / self.relaxation_rate

    def with_leak(self, kappa: float) -> "ModeKinetics":
        return replace(self, kappa=float(kappa))


def mode_rates(atom: AtomSpec, mode: ModeSpec, injection_rate: float,
               kappa: float = 0.0) -> ModeKinetics:
    """Emission/absorption rates r (g/omega)^2 R e^{-/+ xi} for one mode."""
    if not injection_rate > 0:
        raise DomainError("injection_rate must be positive")
    xi = mode.xi
    if xi == 0.0:
        raise DomainError("xi = 0 is a degenerate mode (G_e = G_a)")
    R = suppression_factor(xi)
    base = injection_rate * (mode.g / atom.omega) ** 2 * R
    return ModeKinetics(xi, R, base * math.exp(-xi), base * math.exp(xi),
                        injection_rate, kappa)


@dataclass
class FockPopulations:
    """Diagonal of the mode density matrix, truncated at n = len(p) - 1."""

    p: np.ndarray
    leaked_mass: float = 0.0

    def __post_init__(self):
        self.p = np.array(self.p, dtype=float)
        if self.p.ndim != 1 or self.p.size < 2:
            raise DomainError("populations must be a 1-D vector with at least 2 levels")
        if np.any(self.p < -NEGATIVE_TOL):
            raise DomainError("populations must be non-negative")

    @classmethod
    def vacuum(cls, n_max: int = MIN_LEVELS) -> "FockPopulations":
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return cls(p)

    @classmethod
    def thermal(cls, mean: float, n_max: int) -> "FockPopulations":
        q = mean / (mean + 1.0)
        return cls((1.0 - q) * q ** np.arange(n_max + 1))

    @property
    def n_max(self) -> int:
        return self.p.size - 1

    def total(self) -> float:
        return float(np.sum(self.p))

    def mean(self) -> float:
        return float(np.arange(self.p.size) @ self.p)

    def entropy(self) -> float:
        from .entropy import von_neumann_entropy

        return von_neumann_entropy(self)

    def padded(self, n_max: int) -> "FockPopulations":
        if n_max < self.n_max:
            raise ValueError("cannot shrink populations")
        return FockPopulations(np.pad(self.p, (0, n_max - self.n_max)), self.leaked_mass)


def levels_for(xi: float, tail_tol: float = 1e-12) -> int:
    """Truncation max(20, ceil(-ln(tail_tol) / 2 xi)) for a thermal mode."""
    if not xi > 0:
        raise DomainError("xi must be positive")
    return max(MIN_LEVELS, math.ceil(-math.log(tail_tol) / (2.0 * xi)))


def population_rates(p, k: ModeKinetics) -> np.ndarray:
    """dp/dt under the truncated generator."""
    p = np.asarray(p, dtype=float)
    n = np.arange(p.size, dtype=float)
    down = k.gamma_a + k.kappa
    out = np.zeros_like(p)
    birth = k.gamma_e * (n[:-1] + 1.0) * p[:-1]  # flux n -> n+1
    death = down * n[1:] * p[1:]                 # flux n -> n-1
    out[:-1] += death - birth
    out[1:] += birth - death
    return out


def generator_matrix(k: ModeKinetics, n_max: int) -> np.ndarray:
    """Dense (n_max+1)^2 tridiagonal generator L with dp/dt = L p."""
    size = n_max + 1
    n = np.arange(size, dtype=float)
    down = k.gamma_a + k.kappa
    L = np.zeros((size, size))
    up_rates = k.gamma_e * (n[:-1] + 1.0)
    down_rates = down * n[1:]
    L[np.arange(1, size), np.arange(size - 1)] = up_rates
    L[np.arange(size - 1), np.arange(1, size)] = down_rates
    L[np.arange(size - 1), np.arange(size - 1)] -= up_rates
    L[np.arange(1, size), np.arange(1, size)] -= down_rates
    return L


def stationarity_residual(p, k: ModeKinetics) -> float:
    """max_n |dp_n/dt|; vanishes exactly at the truncated steady state."""
    if isinstance(p, FockPopulations):
        p = p.p
    return float(np.max(np.abs(population_rates(p, k))))


def steady_state(xi: float, tail_tol: float = 1e-12, n_max: int | None = None,
                 renormalize: bool = True) -> FockPopulations:
    """Thermal populations e^{-2 xi n}(1 - e^{-2 xi}) for n = 0..N.

    N defaults to :func:`levels_for`; with ``renormalize`` the truncated
    vector is rescaled to unit sum.
    """
    if not xi > 0:
        raise DomainError("steady state requires xi > 0 (absorption must exceed emission)")
    if n_max is None:
        n_max = levels_for(xi, tail_tol)
    n = np.arange(n_max + 1)
    p = np.exp(-2.0 * xi * n) * -math.expm1(-2.0 * xi)
    if renormalize:
        p /= p.sum()
    return FockPopulations(p)


@dataclass
class Evolution:
    """Sampled trajectory of the populations."""

    t: np.ndarray
    p: np.ndarray  # shape (len(t), N + 1), zero-padded to the final N
    kinetics: ModeKinetics
    leaked_photons: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_regrowths: int = 0

    @property
    def final(self) -> FockPopulations:
        return FockPopulations(self.p[-1])

    def n_mean(self) -> np.ndarray:
        return self.p @ np.arange(self.p.shape[1])

    def total_prob(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def entropy(self) -> np.ndarray:
        from .entropy import von_neumann_entropy

        return np.array([von_neumann_entropy(row) for row in self.p])

    def residual(self) -> np.ndarray:
        return np.array([stationarity_residual(row, self.kinetics) for row in self.p])

    def rates(self) -> np.ndarray:
        return np.array([population_rates(row, self.kinetics) for row in self.p])


def max_stable_step(k: ModeKinetics, n_max: int) -> float:
    """Step bound 1 / (2 (G_a + kappa + G_e)(N + 1)) keeping explicit steps positive."""
    return 1.0 / (2.0 * (k.gamma_a + k.kappa + k.gamma_e) * (n_max + 1))


def evolve(p0: FockPopulations, k: ModeKinetics, t_final: float, times=None,
           rtol: float = 1e-10, atol: float = 1e-14, tail_tol: float = TAIL_TOL,
           n_samples: int = 101, max_regrowths: int = 20) -> Evolution:
    """Integrate the populations from ``p0`` to ``t_final``.

    Output is recorded at ``times`` (default: ``n_samples`` evenly spaced
    points including 0 and t_final). Steps producing a population below
    -1e-12 are rejected and retried smaller. Whenever the top level exceeds
    ``tail_tol`` the segment is redone with 50% more levels.
    """
    if t_final < 0:
        raise DomainError("t_final must be non-negative")
    if times is None:
        times = np.linspace(0.0, t_final, n_samples) if t_final > 0 else np.array([0.0])
    times = np.unique(np.asarray(times, dtype=float))
    if times[0] != 0.0:
        times = np.concatenate([[0.0], times])
    if times[-1] > t_final:
        raise DomainError("sample times exceed t_final")

    p = p0.p.copy()
    if p[-1] > tail_tol:
        p = np.pad(p, (0, max(1, p.size // 2)))
    samples = [p.copy()]
    leaked = [0.0]
    regrowths = 0
    down_leak = k.kappa

    def rhs(_t, y):
        # last component accumulates photons leaked through kappa
        pop = y[:-1]
        return np.append(population_rates(pop, k), down_leak * (np.arange(pop.size) @ pop))

    def reject(_t, y):
        return bool(np.min(y[:-1]) < -NEGATIVE_TOL)

    for t_a, t_b in zip(times[:-1], times[1:]):
        while True:
            y0 = np.append(p, leaked[-1])
            sol = ode.solve(rhs, t_a, t_b, y0, rtol=rtol, atol=atol,
                            max_step=max_stable_step(k, p.size - 1), reject=reject,
                            max_steps=5_000_000)
            if sol.truncated:
                raise ConvergenceError(sol.message)
            if np.max(sol.y[:, -2]) <= tail_tol:
                break
            regrowths += 1
            if regrowths > max_regrowths:
                raise ConvergenceError("truncation kept growing; state does not stay bounded")
            p = np.pad(p, (0, max(1, p.size // 2)))
        p = sol.y[-1, :-1]
        samples.append(p.copy())
        leaked.append(float(sol.y[-1, -1]))

    width = max(s.size for s in samples)
    P = np.array([np.pad(s, (0, width - s.size)) for s in samples])
    return Evolution(times, P, k, np.array(leaked), regrowths)


def evolve_expm(p0: FockPopulations, k: ModeKinetics, t: float) -> FockPopulations:
    """Exact propagation exp(L t) p0 on the truncated space (small N oracle)."""
    L = generator_matrix(k, p0.n_max)
    return FockPopulations(np.clip(expm(L * t) @ p0.p, 0.0, None))


def mean_photon_number_exact(k: ModeKinetics, t, n0: float = 0.0):
    """Solution of dn/dt = G_e (n + 1) - (G_a + kappa) n from n(0) = n0."""
    n_inf = k.mean_steady
    return n_inf + (n0 - n_inf) * np.exp(-k.relaxation_rate * np.asarray(t, dtype=float))


def hawking_temperature_equivalence(mode: ModeSpec, bh: BlackHole) -> float:
    """2 xi divided by hbar nu / (k_B T_BH); identically 1.

    ``mode.nu`` is dimensionless (units c/r_g). It is converted to the unit
    system of ``bh`` before forming the Boltzmann exponent with that hole's
    Hawking temperature.
    """
    c = bh.constants
    nu_phys = mode.nu * c.c / bh.r_g
    boltzmann = c.hbar * nu_phys / (c.k_B * bh.temperature)
    return 2.0 * mode.xi / boltzmann
