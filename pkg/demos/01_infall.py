# Atom dropped from rest at infinity: closed forms vs. integrating the geodesic.
# Units: r in r_g, times in r_g/c.
import numpy as np

from hbar_sim.geometry import tortoise, tortoise_inverse, horizon_offset
from hbar_sim.trajectory import InfallTrajectory, integrate_geodesic

traj = InfallTrajectory()  # tau(1) = 0, t(4) = 0

r = np.array([50.0, 10.0, 4.0, 2.0, 1.1, 1.01, 1.0001])
for row in traj.sample(r):
    print("r=%-8g tau=%12.6f t=%12.6f r*=%12.6f" % tuple(row))

# proper time stays finite at the horizon; Schwarzschild time does not
print("tau(1)       =", traj.proper_time_at(1.0))
print("t(1 + 1e-12) =", traj.coordinate_time_at(1 + 1e-12))

g = integrate_geodesic(50.0, 1.01, tol=1e-10)
print("steps %d, max |tau - closed| %.2e, max |t - closed| %.2e"
      % (g.r.size - 1, g.tau_residual, g.t_residual))

# inverting r* deep inside the near-horizon region: r - 1 is kept separately
for rs in (5.0, -5.0, -20.0, -60.0):
    print("r*=%6.1f  r-1=%.6e  r=%.17g" % (rs, horizon_offset(rs), tortoise_inverse(rs)))
print("round trip at r = 1.001:", tortoise_inverse(tortoise(1.001)))
