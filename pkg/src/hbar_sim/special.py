"""Complex gamma function and the gamma-integral identities used by the
asymptotic excitation formula."""
from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import DomainError

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients); ~1e-15
# relative accuracy for Re(z) >= 1/2.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def complex_gamma(z: complex) -> complex:
    """Gamma function of a complex argument.

    Uses the Lanczos series for Re(z) >= 1/2 and the reflection formula
    Gamma(z) Gamma(1 - z) = pi / sin(pi z) otherwise.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"gamma has a pole at z = {z.real:g}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * complex_gamma(1.0 - z))
    z -= 1.0
    x = _LANCZOS_COEF[0]
    for i, coef in enumerate(_LANCZOS_COEF[1:], start=1):
        x += coef / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


def gamma_magnitude_sq(x):
    """|Gamma(-i x)|^2 = pi / (x sinh(pi x)) for real x > 0.

    Written as 2 pi e^{-pi x} / (x (1 - e^{-2 pi x})) so large x underflows
    gracefully instead of overflowing sinh.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("|Gamma(-ix)|^2 requires x > 0 (pole at x = 0)")
    out = 2.0 * np.pi * np.exp(-np.pi * x) / (x * -np.expm1(-2.0 * np.pi * x))
    return out if out.ndim else float(out)


def log_kernel_integral(nu: float) -> complex:
    """Closed form of the integral of x^(2 i nu) e^(i x) over (0, inf).

    Equals -pi e^(-pi nu) / (sinh(2 pi nu) Gamma(-2 i nu)).
    """
    if not nu > 0:
        raise DomainError("log-kernel integral needs nu > 0")
    return -math.pi * math.exp(-math.pi * nu) / (
        math.sinh(2.0 * math.pi * nu) * complex_gamma(-2j * nu)
    )


def planck_weight(nu):
    """4 pi nu / (e^(4 pi nu) - 1), the squared log-kernel magnitude.

    Tends to 1 as nu -> 0.
    """
    nu = np.asarray(nu, dtype=float)
    arg = 4.0 * np.pi * nu
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(arg == 0.0, 1.0, arg / np.expm1(arg))
    return out if out.ndim else float(out)


def log_kernel_magnitude_sq(nu: float) -> float:
    """|integral of x^(2 i nu) e^(i x)|^2 via the gamma-modulus identity."""
    if not nu > 0:
        raise DomainError("log-kernel magnitude needs nu > 0")
    sh = math.sinh(2.0 * math.pi * nu)
    return math.pi**2 * math.exp(-2.0 * math.pi * nu) / (sh**2 * gamma_magnitude_sq(2.0 * nu))
