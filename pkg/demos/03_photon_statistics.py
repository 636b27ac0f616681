# A beam of atoms drives one field mode. Emission and absorption rates differ
# by e^{2 xi}, so the mode settles into a thermal state at the Hawking temperature.

import numpy as np

from hbar_sim.constants import SOLAR_MASS
from hbar_sim.excitation import AtomSpec, ModeSpec
from hbar_sim.geometry import BlackHole
from hbar_sim.master_equation import (FockPopulations, evolve, hawking_temperature_equivalence,
                                      mean_photon_number_exact, mode_rates, steady_state)

atom = AtomSpec(100.0)
for xi in (0.5, 1.0, 2.0):
    k = mode_rates(atom, ModeSpec.from_xi(xi), injection_rate=1e4)
    evo = evolve(FockPopulations.vacuum(), k, 30 / k.relaxation_rate, n_samples=7)
    print("xi=%g  G_e=%.4e  G_a=%.4e  relaxation time %.3g" %
          (xi, k.gamma_e, k.gamma_a, 1 / k.relaxation_rate))
    exact = mean_photon_number_exact(k, evo.t)
    for t, n, ne, s in zip(evo.t, evo.n_mean(), exact, evo.entropy()):
        print("   t=%10.4g  <n>=%.10f  (moment eq. %.10f)  S/k_B=%.6f" % (t, n, ne, s))
    p = evo.final.p
    ss = steady_state(xi, n_max=p.size - 1, renormalize=False).p
    print("   L-inf distance to Planck state: %.2e" % np.max(np.abs(p - ss)))

# the steady-state Boltzmann exponent 2 xi is hbar nu / k_B T_BH
bh = BlackHole(SOLAR_MASS)
mode = ModeSpec(0.5)
print("solar mass: T_BH = %.6e K, 2xi / (hbar nu / k_B T) - 1 = %.1e"
      % (bh.temperature, hawking_temperature_equivalence(mode, bh) - 1))
