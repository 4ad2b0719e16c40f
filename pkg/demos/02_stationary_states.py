"""
Stationary densities
====================

At rest the pressure gradient balances the force. For a gamma law this
integrates to rho_s**(gamma - 1) = kappa + (gamma - 1)/(A gamma) * F(x), and
the constant kappa is fixed by the total mass.
"""

# ## Imports

import numpy as np

from barotropic1d import FluidParams, ForceField, Grid, StationaryInfeasible, existence_condition, solve_stationary

grid = Grid(200)

# ## A case with a closed-form answer
#
# gamma = 2 and f = 1 give an affine profile 0.75 + 0.5 x.

s = solve_stationary(ForceField.constant(1.0), FluidParams(2.0), mass=1.0, grid=grid)
print("kappa =", s.kappa)
print("k1, k2 =", s.k1, s.k2)
print("max error vs 0.75 + 0.5x:", np.max(np.abs(s.profile - (0.75 + 0.5 * grid.centers))))
print("discrete residual:", s.residual_norm)

# ## When does a positive steady state exist?
#
# The smallest attainable mass is the profile that just touches vacuum where
# F is smallest. A stronger force raises it.

for strength in (1.0, 2.0, 4.0, 10.0):
    c = existence_condition(ForceField.constant(strength), gamma=2.0, mass=1.0)
    print(f"f = {strength:4.1f}: lhs = {c.lhs:.4f}  holds = {c.holds}")

try:
    solve_stationary(ForceField.constant(10.0), FluidParams(2.0), 1.0, grid)
except StationaryInfeasible as exc:
    print("infeasible:", exc)

# ## A periodic force
#
# Residuals fall like dx**2 as the grid is refined.

force = ForceField.sinusoid(1.0, 1.0)
for n in (50, 100, 200, 400):
    r = solve_stationary(force, FluidParams(1.4), 1.0, Grid(n)).residual_norm
    print(f"n = {n:4d}  residual = {r:.3e}")
