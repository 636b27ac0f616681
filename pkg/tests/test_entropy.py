import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import binom

from hbar_sim.constants import SOLAR_MASS
from hbar_sim.entropy import (FluxLedger, FluxMode, area_rate_and_entropy_law,
                              entropy_rate_full, entropy_rate_steady, hbar_entropy_flux,
                              hbar_entropy_flux_xi, mass_budget, von_neumann_entropy)
from hbar_sim.excitation import AtomSpec, ModeSpec
from hbar_sim.geometry import BlackHole
from hbar_sim.master_equation import (FockPopulations, ModeKinetics, evolve, mode_rates, population_rates,
                                      steady_state)

DIMLESS = BlackHole.dimensionless(1.0)


def test_simple_entropies():
    assert von_neumann_entropy(FockPopulations.vacuum()) == 0.0
    assert von_neumann_entropy([0.5, 0.5]) == pytest.approx(math.log(2), rel=1e-15)


@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
def test_thermal_entropy(xi):
    n = 1 / math.expm1(2 * xi)
    expected = (n + 1) * math.log(n + 1) - n * math.log(n)
    assert von_neumann_entropy(steady_state(xi, 1e-16)) == pytest.approx(expected, rel=1e-8)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=30).filter(lambda v: sum(v) > 0))
def test_entropy_non_negative(values):
    p = np.array(values) / sum(values)
    s = von_neumann_entropy(p)
    assert s >= -1e-15
    if s < 1e-12:
        assert np.isclose(p.max(), 1.0)


def test_thermal_is_maximal_at_fixed_mean():
    n_bar = 1.5
    thermal = FockPopulations.thermal(n_bar, 200).p
    binomial = binom.pmf(np.arange(6), 5, n_bar / 5)
    two_point = np.array([0.5, 0.0, 0.0, 0.5])  # mean 1.5
    for other in (binomial, two_point):
        assert np.dot(np.arange(other.size), other) == pytest.approx(n_bar)
        assert von_neumann_entropy(thermal) > von_neumann_entropy(other)


def test_steady_rate_zero_when_stationary():
    p = steady_state(1.0).p
    r = entropy_rate_steady(p, np.zeros_like(p), 1.0)
    assert r.sum_form == 0.0 and r.reduced_form == 0.0 and r.valid


def test_steady_rate_sum_and_reduced_forms():
    rng = np.random.default_rng(1)
    xi = 0.8
    p = steady_state(xi).p
    p_dot = rng.normal(size=p.size) * p
    p_dot -= p_dot.mean()
    assert abs(p_dot.sum()) < 1e-15
    r = entropy_rate_steady(p, p_dot, xi)
    assert r.sum_form == pytest.approx(r.reduced_form, rel=1e-10)


def test_leakage_lowers_cavity_entropy():
    xi = 1.0
    leak_only = ModeKinetics(xi, 1.0, 0.0, 0.0, 1.0, kappa=1.0)
    p = steady_state(xi).p
    p_dot = population_rates(p, leak_only)
    r = entropy_rate_steady(p, p_dot, xi)
    assert r.n_dot < 0
    assert r.reduced_form < 0
    assert r.reduced_form == pytest.approx(2 * xi * r.n_dot)


def test_steady_rate_flags_far_state():
    p = FockPopulations.vacuum().p
    r = entropy_rate_steady(p, np.zeros_like(p), 1.0)
    assert not r.valid


def test_flux_basics():
    assert hbar_entropy_flux([], DIMLESS) == 0.0
    nu, n_dot = 0.37, 2.5
    xi = 2 * math.pi * nu
    assert hbar_entropy_flux([(nu, n_dot)], DIMLESS) == pytest.approx(2 * xi * n_dot, rel=1e-15)
    a, b = [(0.1, 1.0), (0.4, 3.0)], [(1.2, 0.5)]
    assert hbar_entropy_flux(a + b, DIMLESS) == pytest.approx(
        hbar_entropy_flux(a, DIMLESS) + hbar_entropy_flux(b, DIMLESS), rel=1e-15)
    assert hbar_entropy_flux_xi([xi], [n_dot]) == pytest.approx(2 * xi * n_dot, rel=1e-15)


def test_area_law_zero_flux():
    law = area_rate_and_entropy_law(FluxLedger((), DIMLESS))
    assert law.A_dot_p == 0.0 and law.S_dot_from_area == 0.0 and law.holds()


def test_area_law_single_mode_dimensionless():
    nu = 0.5
    law = area_rate_and_entropy_law(FluxLedger([(nu, 1.0)], DIMLESS))
    xi = 2 * math.pi * nu
    assert law.S_dot_p == pytest.approx(2 * xi, rel=1e-14)
    assert law.S_dot_from_area == pytest.approx(2 * xi, rel=1e-14)


@pytest.mark.parametrize("x", [1.0, 4 * math.pi])
def test_area_law_si_solar(x):
    bh = BlackHole(SOLAR_MASS)
    c = bh.constants
    nu = c.k_B * bh.temperature / c.hbar * x
    law = area_rate_and_entropy_law(FluxLedger([FluxMode(nu, 1e20)], bh))
    assert law.residual < 1e-10


def test_mass_budget():
    ledger = FluxLedger([(0.5, 2.0), (1.0, 0.5)], DIMLESS)
    m_p = ledger.m_dot_p
    cancel = mass_budget(-m_p, ledger)
    assert cancel.M_dot == 0.0 and cancel.A_dot_total == 0.0 and cancel.A_dot_p != 0.0
    atom_only = mass_budget(0.3, FluxLedger((), DIMLESS))
    assert atom_only.A_dot_total == atom_only.A_dot_atom
    b = mass_budget(0.3, ledger)
    assert b.A_dot_atom + b.A_dot_p == pytest.approx(b.A_dot_total, rel=1e-12)
    # area rate of the photons agrees with the direct formula
    law = area_rate_and_entropy_law(ledger)
    assert b.A_dot_p == pytest.approx(law.A_dot_p, rel=1e-12)


def _worst_rate_gap(xi, p0, t_relax, samples=401):
    k = mode_rates(AtomSpec(100), ModeSpec.from_xi(xi), 1e4)
    k = k.with_leak(1e-3 * k.gamma_a)
    evo = evolve(p0, k, t_relax / k.relaxation_rate, n_samples=samples)
    ss = steady_state(xi, n_max=evo.p.shape[1] - 1, renormalize=False).p
    worst, used = 0.0, 0
    for row in evo.p[1:]:
        if np.max(np.abs(row - ss)) >= 1e-3:
            continue
        p_dot = population_rates(row, k)
        sd = entropy_rate_steady(row, p_dot, xi).reduced_form
        worst = max(worst, abs(entropy_rate_full(row, p_dot) - sd) / abs(sd))
        used += 1
    assert used > 0
    return worst


@pytest.mark.parametrize("xi", [0.5, 1.0])
def test_full_rate_close_to_reduced_from_vacuum(xi):
    assert _worst_rate_gap(xi, FockPopulations.vacuum(), 40) < 0.01


@pytest.mark.xfail(strict=True, reason="at xi = 2 the mean is 0.019, so an L-inf gap of 1e-3 "
                   "still leaves a 1.3% error in ln p_n slope just after the threshold")
def test_full_rate_close_to_reduced_from_vacuum_xi2():
    assert _worst_rate_gap(2.0, FockPopulations.vacuum(), 40) < 0.01


@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
def test_full_rate_close_to_reduced_quasi_steady(xi):
    assert _worst_rate_gap(xi, steady_state(xi, 1e-14), 20, samples=101) < 1e-3 / (2 * xi) * 1.01
