"""
Pressure, viscosity and force
=============================

The building blocks of a run: a gamma-law pressure, a viscosity that never
drops below a positive floor, and an external force with its primitive.
"""

# ## Imports

import numpy as np

from barotropic1d import FluidParams, ForceField, ViscosityLaw, pressure, sound_speed, viscosity
from barotropic1d.model import force_primitive

# ## Pressure and sound speed

params = FluidParams(gamma=1.4)
rho = np.array([0.0, 0.5, 1.0, 2.0])
print("P(rho)  =", pressure(rho, params))
print("c(rho)  =", sound_speed(rho, params))

# Vacuum is allowed: both vanish at rho = 0. Negative density is not.
try:
    pressure(-0.1, params)
except ValueError as exc:
    print("rejected:", exc)

# ## Viscosity laws
#
# Every law carries its lower bound. It is computed when omitted and checked
# when given, so a bad table fails at construction rather than mid-run.

laws = {
    "constant": ViscosityLaw.constant(1.0),
    "affine": ViscosityLaw.affine(15.0, 5.0),
    "power": ViscosityLaw.power(0.5, 6.0, 2.0),
    "table": ViscosityLaw.table([0.0, 1.0, 2.0], [2.0, 3.0, 5.0]),
}
for name, law in laws.items():
    print(f"{name:9s} mu_lower={law.mu_lower:5.2f}  mu(0, 1, 3) = {viscosity(np.array([0.0, 1.0, 3.0]), law)}")

try:
    ViscosityLaw.table([0.0, 1.0, 2.0], [1.0, 0.1, 1.0], mu_lower=0.5)
except ValueError as exc:
    print("rejected:", exc)

# ## Forces and primitives
#
# The primitive F(x) = int_0^x f is closed form for every variant.

x = np.linspace(0, 1, 5)
for f in (ForceField.constant(1.0), ForceField.sinusoid(1.0, 1.0), ForceField.table([0.25, 0.75], [1.0, -1.0])):
    print(f.kind, "F(x) =", np.round(force_primitive(f, x), 5), " |f|_inf =", f.sup_norm())
