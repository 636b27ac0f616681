import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hbar_sim.constants import CODATA2018, SOLAR_MASS, geometric
from hbar_sim.errors import DomainError
from hbar_sim.geometry import (BlackHole, UnitMode, UnitSystem, bh_entropy_rate,
                               entropy_per_area, gravitational_radius, hawking_temperature,
                               horizon_area, horizon_offset, radius_from_rindler_depth,
                               rindler_acceleration, rindler_depth,
                               rindler_static_acceleration, tortoise, tortoise_inverse)

from reference import A_SUN, T_SUN


def test_solar_temperature_and_area():
    assert hawking_temperature(SOLAR_MASS) == pytest.approx(T_SUN, rel=1e-14)
    assert horizon_area(SOLAR_MASS) == pytest.approx(A_SUN, rel=1e-14)


@pytest.mark.parametrize("M", [1.0, 3.7e5, SOLAR_MASS])
def test_mass_scalings(M):
    assert hawking_temperature(2 * M) == hawking_temperature(M) / 2
    assert horizon_area(2 * M) == pytest.approx(4 * horizon_area(M), rel=1e-15)
    r_g = gravitational_radius(M)
    assert horizon_area(M) / (4 * math.pi * r_g**2) == pytest.approx(1.0, rel=1e-14)
    assert hawking_temperature(10 * M) * 10 * M == pytest.approx(hawking_temperature(M) * M,
                                                                 rel=1e-12)


def test_entropy_rate_forms():
    c = geometric(1.0)
    assert bh_entropy_rate(1.0, 0.0, c) == 0.0
    assert bh_entropy_rate(1.0, 1e-6, c) > 0
    assert bh_entropy_rate(1.0, -1e-6, c) < 0
    # S_dot / A_dot is the same constant at any mass
    for M in (1.0, 10.0, 1e3):
        s = bh_entropy_rate(M, 1e-6)
        a = 32 * math.pi * CODATA2018.G**2 * M * 1e-6 / CODATA2018.c**4
        assert s / a == pytest.approx(entropy_per_area(), rel=1e-12)


def test_mass_must_be_positive():
    with pytest.raises(DomainError):
        hawking_temperature(0.0)
    with pytest.raises(DomainError):
        BlackHole(-1.0)


def test_dimensionless_hole():
    bh = BlackHole.dimensionless(3.0)
    assert bh.r_g == pytest.approx(1.0, rel=1e-15)
    assert bh.temperature == pytest.approx(1 / (4 * math.pi), rel=1e-15)
    assert bh.xi(0.5) == pytest.approx(math.pi, rel=1e-15)


def test_from_gravitational_radius():
    bh = BlackHole(SOLAR_MASS)
    assert BlackHole.from_gravitational_radius(bh.r_g).mass == pytest.approx(SOLAR_MASS,
                                                                            rel=1e-15)


@given(st.floats(1e-3, 1e6), st.sampled_from(["length", "time", "frequency", "rate", "area"]))
def test_unit_round_trip(value, kind):
    for mode in UnitMode:
        u = UnitSystem.from_mass(SOLAR_MASS, mode)
        assert u.to_dimensionless(u.to_si(value, kind), kind) == pytest.approx(value, rel=1e-12)
        assert u.to_user(u.to_internal(value, kind), kind) == pytest.approx(value, rel=1e-12)
    assert UnitSystem.from_mass(SOLAR_MASS).to_internal(value, kind) == value


def test_unknown_unit_kind():
    with pytest.raises(ValueError):
        UnitSystem(1.0).scale("mass")


def test_tortoise_values():
    assert tortoise(2.0) == 2.0
    assert tortoise(1 + math.e) == pytest.approx(2 + math.e, rel=1e-15)
    r = 1 + np.logspace(-12, 0, 30)[::-1]
    assert np.all(np.diff(tortoise(r)) < 0)  # decreasing toward the horizon
    with pytest.raises(DomainError):
        tortoise(1.0)


def test_tortoise_derivative():
    r = np.geomspace(1.01, 100, 20)
    h = 1e-6 * r
    fd = (tortoise(r + h) - tortoise(r - h)) / (2 * h)
    assert np.allclose(fd, 1 + 1 / (r - 1), rtol=1e-6)


@pytest.mark.parametrize("r", [1.001, 1.5, 10.0, 1e4])
def test_tortoise_round_trip(r):
    assert tortoise_inverse(tortoise(r)) == pytest.approx(r, abs=1e-10)
    assert tortoise_inverse(2.0) == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("r_star", [-700.0, -20.0, -1.0, 0.5, 3.0, 40.0, 1e8])
def test_horizon_offset(r_star):
    # r - 1 = delta solves delta + ln(delta) = r* - 1 to relative precision
    delta = horizon_offset(r_star)
    assert delta > 0
    assert (delta + math.log(delta)) == pytest.approx(r_star - 1.0, rel=1e-15, abs=1e-13)


def test_deep_near_horizon_against_bisection():
    from scipy.optimize import brentq

    r_star = -20.0
    delta = brentq(lambda d: d + math.log(d) - (r_star - 1), 1e-20, 1.0, xtol=1e-30, rtol=1e-15)
    assert horizon_offset(r_star) == pytest.approx(delta, rel=1e-13)
    assert delta == pytest.approx(math.exp(-21) * (1 - math.exp(-21)), rel=1e-12)
    # r itself is only resolved to one ulp of 1
    assert tortoise_inverse(r_star) - 1 == pytest.approx(delta, abs=2.3e-16)


def test_rindler_acceleration_limits():
    assert rindler_static_acceleration(1e12) == pytest.approx(0.5, rel=1e-11)
    a = rindler_static_acceleration(np.array([1 + 1e-8, 1.01, 1.5, 3.0, 10.0]))
    assert np.all(np.diff(a) < 0)
    assert a[0] > 1e3


@pytest.mark.parametrize("z", [1e-3, 1e-2])
def test_near_horizon_acceleration_first_order(z):
    r_bar = radius_from_rindler_depth(z)
    assert rindler_depth(r_bar) == pytest.approx(z, rel=1e-10)
    exact = rindler_static_acceleration(r_bar)
    approx = rindler_acceleration(z)
    # agreement to first order: relative gap is O(z^2)
    assert abs(exact / approx - 1) < z**2
