"""
Grid convergence
================

Self-differences between solutions on doubled grids. The scheme is first
order, except when the exact answer is a stationary state, where only the
spatial truncation of the steady balance is left.
"""

# ## Imports

from barotropic1d.config import load_config
from barotropic1d.scenarios import convergence_study

# ## A smooth, vacuum-free flow at t = 0.5

rows = convergence_study(load_config("smooth"), [50, 100, 200, 400], write=False)
for r in rows:
    print(f"n = {r.n:4d}  error = {r.error:.3e}  order = {r.order:.3f}")

# ## Holding a steady state
#
# Starting exactly at rho_s, the velocity that develops is a pure
# discretisation artefact and shrinks at second order.

rows = convergence_study(load_config("persist"), [50, 100, 200], write=False)
for r in rows:
    print(f"n = {r.n:4d}  error = {r.error:.3e}  order = {r.order:.3f}")
