"""Excitation and absorption probabilities of an atom falling into the hole.

The atom (transition frequency ``omega``) is coupled to an outgoing field
mode of far-field frequency ``nu``, both in units of c/r_g. After the change
of variables x = (2 omega / 3)(r^(3/2) - 1) the first-order amplitude is

    A = (g / omega) * integral_0^inf exp(-i nu phi(x)) exp(-i x) dx

up to a constant phase fixed by the trajectory's integration constants.

The integral converges only conditionally. It is evaluated with an
exponential regulator exp(-eps x) for a ladder of eps values and
extrapolated to eps = 0 (Neville/Richardson in eps). The logarithmic phase
singularity at x = 0 is removed by integrating over u = ln x there.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError
from .special import planck_weight
from .trajectory import InfallTrajectory

#: Probabilities above this strain first-order perturbation theory.
PERTURBATIVE_LIMIT = 0.1


@dataclass(frozen=True)
class AtomSpec:
    """Two-level atom with dimensionless transition frequency ``omega``."""

    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"atom.omega must be positive, got {self.omega!r}")

    def asymptotic_regime(self, nu: float, margin: float = 10.0) -> bool:
        """Whether omega >> 1 and omega >> nu hold by a factor ``margin``."""
        return self.omega >= margin and self.omega >= margin * abs(nu)


@dataclass(frozen=True)
class ModeSpec:
    """Outgoing field mode: far-field frequency, angular index and coupling."""

    nu: float
    ell: int = 0
    g: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"mode frequency nu must be positive, got {self.nu!r}")
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError(f"ell must be a non-negative integer, got {self.ell!r}")
        if not self.g > 0:
            raise DomainError(f"coupling g must be positive, got {self.g!r}")

    @classmethod
    def from_xi(cls, xi: float, ell: int = 0, g: float = 1.0) -> "ModeSpec":
        return cls(xi / (2.0 * math.pi), ell, g)

    @property
    def xi(self) -> float:
        return 2.0 * math.pi * self.nu


def _default_ladder():
    return tuple(1e-2 / 2**k for k in range(6))


@dataclass(frozen=True)
class QuadratureConfig:
    """Controls for the regulated oscillatory quadrature.

    ``x_max`` of None picks, for each eps, the cut where the regulated tail
    bound exp(-eps x_max) / eps drops below abs_tol / 10.
    """

    eps_ladder: tuple = _default_ladder()
    abs_tol: float = 1e-12
    rel_tol: float = 1e-6
    x_max: float | None = None
    log_split: float = 1.0
    nodes: int = 24

    def __post_init__(self):
        ladder = tuple(float(e) for e in self.eps_ladder)
        object.__setattr__(self, "eps_ladder", ladder)
        if len(ladder) < 2:
            raise DomainError("eps_ladder needs at least two entries to extrapolate")
        if any(e <= 0 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise DomainError("eps_ladder must be strictly decreasing and positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.x_max is not None and not self.x_max > self.log_split:
            raise DomainError("x_max must exceed log_split")

    @property
    def regulator_eps(self) -> float:
        return self.eps_ladder[0]

    def cutoff(self, eps: float) -> float:
        if self.x_max is not None:
            return self.x_max
        return math.log(10.0 / (eps * self.abs_tol)) / eps


@dataclass(frozen=True)
class RegulatedIntegral:
    value: complex
    error: float
    converged: bool
    ladder: tuple = ()


@dataclass(frozen=True)
class Probability:
    """A probability with its propagated quadrature error and validity flags."""

    value: float
    error: float = 0.0
    converged: bool = True
    perturbative: bool = True

    def __float__(self):
        return self.value


def phase_phi(x, omega):
    """Phase function phi(x) of the transformed excitation integral.

    Diverges logarithmically at x = 0, where -inf is returned.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("phase_phi is defined for x >= 0")
    if not omega > 0:
        raise DomainError("omega must be positive")
    u = 1.5 * x / omega
    c = np.cbrt(1.0 + u)
    with np.errstate(divide="ignore"):
        # ln(c - 1) = ln u - ln(c^2 + c + 1), free of cancellation at small u
        log_term = np.log(u) - np.log(c * c + c + 1.0)
    out = x / omega + c * c + 2.0 * c + 2.0 * log_term
    return out if out.ndim else float(out)


def _panels(a, b, width, nodes):
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    n = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * gx).ravel(), (half[:, None] * gw).ravel()


def _neville_at_zero(h, values):
    """Polynomial extrapolation to h = 0; returns the tableau diagonal."""
    p = list(values)
    diag = [p[-1]]
    n = len(p)
    for m in range(1, n):
        p = [(h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]) for i in range(n - m)]
        diag.append(p[-1])
    return diag


def _neville_lebesgue(h):
    """Sum of |Lagrange basis at 0|: the rounding amplification of extrapolation."""
    h = np.asarray(h, dtype=float)
    total = 0.0
    for i in range(len(h)):
        others = np.delete(h, i)
        total += abs(np.prod(others / (others - h[i])))
    return total


def regulated_integral(f, cfg: QuadratureConfig = QuadratureConfig(), frequency: float = 1.0,
                       phase_scale=None):
    """Abel-regularised value of integral_0^inf f(x) dx.

    ``f`` must be vectorised, bounded near 0 (a log-periodic factor is fine)
    and oscillate like exp(-i frequency x) at large x. ``phase_scale(x)``, if
    given, bounds the magnitude of the phase argument formed inside ``f`` and
    sets the rounding floor of the error estimate.
    """
    if not frequency > 0:
        raise DomainError("oscillation frequency must be positive")
    if phase_scale is None:
        phase_scale = np.ones_like
    u, wu = _panels(math.log(0.1 * cfg.abs_tol), math.log(cfg.log_split), 0.5, cfg.nodes)
    xu = np.exp(u)
    head = f(xu) * xu * wu
    head_mag = np.abs(xu * wu) * phase_scale(xu)

    width = math.pi / frequency
    values, floors = [], []
    for eps in cfg.eps_ladder:
        xs, wx = _panels(cfg.log_split, cfg.cutoff(eps), width, cfg.nodes)
        damp = np.exp(-eps * xs)
        total = np.sum(head * np.exp(-eps * xu)) + np.sum(wx * f(xs) * damp)
        values.append(complex(total))
        mag = np.sum(head_mag) + np.sum(np.abs(wx) * damp * phase_scale(xs))
        floors.append(4.0 * np.finfo(float).eps * mag)

    diag = _neville_at_zero(list(cfg.eps_ladder), values)
    best = diag[-1]
    rounding = _neville_lebesgue(cfg.eps_ladder) * max(floors)
    error = max(abs(diag[-1] - diag[-2]), rounding)
    converged = error <= max(cfg.abs_tol, cfg.rel_tol * abs(best))
    return RegulatedIntegral(best, float(error), bool(converged), tuple(values))


def _sign(process: str) -> int:
    if process == "emission":
        return 1
    if process == "absorption":
        return -1
    raise ValueError(f"process must be 'emission' or 'absorption', got {process!r}")


def transformed_integral(atom: AtomSpec, mode: ModeSpec,
                         cfg: QuadratureConfig = QuadratureConfig(),
                         process: str = "emission") -> RegulatedIntegral:
    """integral_0^inf exp(-i s nu phi(x) - i x) dx with s = +1 (emission), -1 (absorption)."""
    s = _sign(process)
    if s < 0 and mode.nu >= atom.omega:
        raise DomainError("absorption integral needs nu < omega to oscillate")
    omega, nu = atom.omega, mode.nu

    def integrand(x):
        # two factors, so exp(-ix) does not inherit the rounding of nu*phi
        return np.exp(-1j * s * nu * phase_phi(x, omega)) * np.exp(-1j * x)

    def phase_scale(x):
        # leading-order size of nu * phi(x)
        return 1.0 + nu * (x / omega + 3.0 + 2.0 * np.abs(np.log(x / (2.0 * omega))))

    return regulated_integral(integrand, cfg, frequency=1.0 + s * nu / omega,
                              phase_scale=phase_scale)


def log_kernel_numeric(nu: float, cfg: QuadratureConfig = QuadratureConfig(),
                       process: str = "emission") -> RegulatedIntegral:
    """integral_0^inf x^(-2 i s nu) e^(-i x) dx by the same regulated scheme.

    This is the transformed integral with phi replaced by its pure-log part
    2 ln x, whose magnitude is known in closed form; it benchmarks the
    quadrature.
    """
    if not nu > 0:
        raise DomainError("log-kernel benchmark needs nu > 0")
    s = _sign(process)

    def integrand(x):
        return np.exp(-2j * s * nu * np.log(x)) * np.exp(-1j * x)

    def phase_scale(x):
        return 1.0 + 2.0 * nu * np.abs(np.log(x))

    return regulated_integral(integrand, cfg, phase_scale=phase_scale)


def _probability(atom, mode, integral: RegulatedIntegral) -> Probability:
    scale = (mode.g / atom.omega) ** 2
    mag = abs(integral.value)
    value = scale * mag**2
    error = scale * (2.0 * mag * integral.error + integral.error**2)
    perturbative = value < PERTURBATIVE_LIMIT
    if not integral.converged:
        warnings.warn(
            f"eps-extrapolation did not converge (omega={atom.omega}, nu={mode.nu}, "
            f"error estimate {integral.error:.3g})", RuntimeWarning, stacklevel=3)
    if not perturbative:
        warnings.warn(f"probability {value:.3g} exceeds {PERTURBATIVE_LIMIT}; "
                      "first-order perturbation theory is strained", RuntimeWarning,
                      stacklevel=3)
    return Probability(value, error, integral.converged, perturbative)


def excitation_probability_numeric(atom: AtomSpec, mode: ModeSpec,
                                   cfg: QuadratureConfig = QuadratureConfig()) -> Probability:
    """P_exc = (g/omega)^2 |transformed integral|^2 by regulated quadrature."""
    return _probability(atom, mode, transformed_integral(atom, mode, cfg, "emission"))


def _closed(omega, nu, g, simplified):
    # valid for either sign of nu; nu -> -nu gives absorption
    pref = g**2 / omega**2
    if not simplified:
        pref /= (1.0 + 2.0 * nu / omega) ** 2
    return pref * planck_weight(nu)


def _warn_regime(atom, mode):
    if not atom.asymptotic_regime(mode.nu):
        warnings.warn(f"asymptotic formula outside its regime (omega={atom.omega}, "
                      f"nu={mode.nu}); needs omega >> 1 and omega >> nu",
                      RuntimeWarning, stacklevel=3)


def excitation_probability_closed_form(atom: AtomSpec, mode: ModeSpec,
                                       simplified: bool = False) -> float:
    """Large-omega asymptotic excitation probability.

    4 pi g^2 nu / (omega^2 (1 + 2 nu/omega)^2 (e^{4 pi nu} - 1)); with
    ``simplified`` the (1 + 2 nu/omega)^-2 factor is dropped (omega >> nu).
    """
    _warn_regime(atom, mode)
    return float(_closed(atom.omega, mode.nu, mode.g, simplified))


def excitation_probability_dimensional(g, omega, nu, r_g, c):
    """SI form of the omega >> nu asymptotic probability.

    ``g``, ``omega`` and ``nu`` are angular rates in 1/s, ``r_g`` in m.
    """
    k = 4.0 * math.pi * r_g * nu / c
    return g**2 / omega**2 * k / math.expm1(k)


def absorption_probability(atom: AtomSpec, mode: ModeSpec, method: str = "closed",
                           cfg: QuadratureConfig = QuadratureConfig(),
                           simplified: bool = False):
    """Photon absorption probability, obtained by nu -> -nu.

    ``method="closed"`` returns a float; ``"numeric"`` a :class:`Probability`.
    In the simplified closed form P_abs = e^{4 pi nu} P_exc exactly; the full
    form carries the extra ((1 + 2nu/omega) / (1 - 2nu/omega))^2.
    """
    if method == "closed":
        _warn_regime(atom, mode)
        if not simplified and 2.0 * mode.nu >= atom.omega:
            raise DomainError("full closed-form absorption needs 2 nu < omega")
        return float(_closed(atom.omega, -mode.nu, mode.g, simplified))
    if method == "numeric":
        return _probability(atom, mode, transformed_integral(atom, mode, cfg, "absorption"))
    raise ValueError(f"method must be 'closed' or 'numeric', got {method!r}")


# -- amplitude with explicit trajectory conventions ------------------------


def x_of_r(r, omega):
    """Integration variable x = (2 omega / 3)(r^(3/2) - 1)."""
    return 2.0 * omega / 3.0 * (np.asarray(r, dtype=float) ** 1.5 - 1.0)


def trajectory_phase(atom: AtomSpec, mode: ModeSpec,
                     trajectory: InfallTrajectory = InfallTrajectory(),
                     process: str = "emission") -> float:
    """Constant phase separating the radial integrand from the transformed one."""
    s = _sign(process)
    return (s * mode.nu * (trajectory.t_offset - 2.0 / 3.0)
            + atom.omega * (trajectory.tau_offset - 2.0 / 3.0))


def radial_integrand(r, atom: AtomSpec, mode: ModeSpec,
                     trajectory: InfallTrajectory = InfallTrajectory(),
                     process: str = "emission"):
    """sqrt(r) exp(i s nu (t - r*) + i omega tau) along the infall, r > 1.

    Integrating over r in (1, inf) gives the amplitude divided by g.
    """
    s = _sign(process)
    r = np.asarray(r, dtype=float)
    t = trajectory.coordinate_time_at(r)
    rs = trajectory.tortoise_at(r)
    tau = trajectory.proper_time_at(r)
    return np.sqrt(r) * np.exp(1j * (s * mode.nu * (t - rs) + atom.omega * tau))


def transition_amplitude(atom: AtomSpec, mode: ModeSpec,
                         cfg: QuadratureConfig = QuadratureConfig(),
                         trajectory: InfallTrajectory = InfallTrajectory(),
                         process: str = "emission") -> complex:
    """First-order amplitude g * integral dtau exp(...), trajectory phase included."""
    integral = transformed_integral(atom, mode, cfg, process)
    phase = trajectory_phase(atom, mode, trajectory, process)
    return mode.g / atom.omega * np.exp(1j * phase) * integral.value


# -- validity of the high-frequency approximation --------------------------


def effective_potential(r, ell: int = 0):
    """Scalar-wave potential (1 - 1/r)(1/r^3 + ell(ell+1)/r^2)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 1.0):
        raise DomainError("effective potential requires r > 1")
    if int(ell) != ell or ell < 0:
        raise DomainError("ell must be a non-negative integer")
    v = (1.0 - 1.0 / r) * (1.0 / r**3 + ell * (ell + 1) / r**2)
    return v if v.ndim else float(v)


def potential_peak(ell: int = 0, xatol: float = 1e-12):
    """(r_peak, V_max) of the effective potential.

    The peak sits between r = 4/3 (ell = 0) and the photon sphere r = 3/2.
    """
    res = minimize_scalar(lambda r: -effective_potential(r, ell), bounds=(1.0 + 1e-9, 4.0),
                          method="bounded", options={"xatol": xatol})
    return float(res.x), float(-res.fun)


def high_frequency_validity(mode: ModeSpec) -> float:
    """V_max / nu^2; small values justify dropping the potential."""
    return potential_peak(mode.ell)[1] / mode.nu**2
