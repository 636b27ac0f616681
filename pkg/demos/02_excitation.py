# Probability that the falling atom gets excited while emitting a photon into
# an outgoing mode: regulated quadrature against the large-omega formula.
import math

from hbar_sim.excitation import (AtomSpec, ModeSpec, absorption_probability,
                                 excitation_probability_closed_form,
                                 excitation_probability_numeric)

print("omega   nu     numeric          closed           rel.diff")
for omega in (50.0, 100.0, 200.0):
    for nu in (0.1, 0.5, 1.0):
        atom, mode = AtomSpec(omega), ModeSpec(nu)
        num = excitation_probability_numeric(atom, mode)
        closed = excitation_probability_closed_form(atom, mode)
        print("%5g  %4g   %.10e   %.10e   %.2e"
              % (omega, nu, num.value, closed, abs(num.value - closed) / closed))

# absorption beats emission by the Boltzmann factor e^{4 pi nu}
atom, mode = AtomSpec(100.0), ModeSpec(0.25)
ratio = (absorption_probability(atom, mode, "numeric").value
         / excitation_probability_numeric(atom, mode).value)
print("P_abs/P_exc at nu=0.25: %.6f   e^pi = %.6f" % (ratio, math.exp(math.pi)))
print("with the (1+2nu/omega)^2/(1-2nu/omega)^2 correction: %.6f"
      % (math.exp(math.pi) * (1.005 / 0.995) ** 2))
