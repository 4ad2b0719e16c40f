"""
Vacuum and gradient growth
==========================

With rho0 = 2x the density vanishes at the left wall. The density itself
stays bounded, yet its gradient keeps growing near the vacuum point. The
same force with a vacuum-free start shows nothing of the kind.
"""

# ## Imports

from barotropic1d.config import load_config
from barotropic1d.diagnostics import records_to_columns
from barotropic1d.scenarios import run_scenario


def gradient_history(name, n=None, t_end=40.0):
    cfg = load_config(name).with_updates(t_end=t_end)
    if n is not None:
        cfg = cfg.with_updates(n=n)
    cols = records_to_columns(run_scenario(cfg, write=False).records)
    return cols["t"], cols["gradrho_l2"], cols["sup_rho"]


# ## Vacuum at the wall

t, g, sup = gradient_history("vacuum-blowup")
for s in (0, 5, 10, 20, 40):
    k = int(abs(t - s).argmin())
    print(f"t = {t[k]:4.1f}  |rho_x|_2 = {g[k]:7.3f}  sup rho = {sup[k]:.4f}")

# ## Refinement
#
# The growth is carried by a boundary layer, so finer grids resolve more of it.

for n in (100, 200, 400):
    t, g, _ = gradient_history("vacuum-blowup", n)
    print(f"n = {n}: |rho_x|(40) / |rho_x|(5) = {g[int(abs(t - 40).argmin())] / g[int(abs(t - 5).argmin())]:.3f}")

# ## No vacuum, no growth

t, g, _ = gradient_history("control")
print(f"control: |rho_x| ranges over [{g.min():.3f}, {g.max():.3f}], started at {g[0]:.3f}")
