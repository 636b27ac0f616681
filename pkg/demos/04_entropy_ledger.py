# Photons leaking out of the cavity carry entropy 2 xi k_B each. The same
# number comes out of the horizon-area change their energy causes.
import numpy as np

from hbar_sim.constants import SOLAR_MASS
from hbar_sim.entropy import FluxLedger, FluxMode, area_rate_and_entropy_law, mass_budget
from hbar_sim.excitation import AtomSpec, ModeSpec
from hbar_sim.geometry import BlackHole
from hbar_sim.master_equation import mode_rates

bh = BlackHole(SOLAR_MASS)
to_si = bh.constants.c / bh.r_g  # dimensionless rate -> 1/s

modes = []
for nu in np.linspace(0.05, 1.5, 10):
    k = mode_rates(AtomSpec(100.0), ModeSpec(nu), injection_rate=1e4)
    kappa = 1e-3 * k.gamma_a
    n_dot = kappa * k.with_leak(kappa).mean_steady  # photons per r_g/c
    modes.append(FluxMode(nu * to_si, n_dot * to_si))

for fm in modes:
    law = area_rate_and_entropy_law(FluxLedger((fm,), bh))
    print("nu=%.4e rad/s  n_dot=%.4e /s  S_dot=%.6e  from area %.6e  (resid %.1e)"
          % (fm.nu, fm.n_dot, law.S_dot_p, law.S_dot_from_area, law.residual))

ledger = FluxLedger(tuple(modes), bh)
total = area_rate_and_entropy_law(ledger)
print("summed: S_dot=%.6e J/K/s, A_dot_p=%.6e m^2/s, residual %.1e"
      % (total.S_dot_p, total.A_dot_p, total.residual))

# atoms falling in add mass; the photons' share of the area change is booked apart
budget = mass_budget(1e-20, ledger)
print("M_dot=%.4e kg/s  A_dot=%.4e = atoms %.4e + photons %.4e"
      % (budget.M_dot, budget.A_dot_total, budget.A_dot_atom, budget.A_dot_p))
