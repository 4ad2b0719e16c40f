"""
Relaxation to equilibrium
=========================

Start from the stationary density plus a bump and watch the flow settle.
The density deviation and the velocity both decay exponentially, and the
Lyapunov functional never increases between samples.
"""

# ## Imports

import numpy as np

from barotropic1d import fit_decay
from barotropic1d.config import load_config
from barotropic1d.diagnostics import records_to_columns
from barotropic1d.scenarios import run_scenario

# ## Run the packaged preset
#
# ``write=False`` keeps everything in memory.

cfg = load_config("relax").with_updates(t_end=30.0)
result = run_scenario(cfg, write=False)
cols = records_to_columns(result.records)

for t in (0, 5, 10, 20, 30):
    k = int(np.argmin(np.abs(cols["t"] - t)))
    print(f"t = {cols['t'][k]:5.1f}  dev_l2 = {cols['dev_l2'][k]:.3e}  u_w12 = {cols['u_w12'][k]:.3e}  "
          f"lyapunov = {cols['lyapunov'][k]:.3e}")

# ## Fitted rates

fit = fit_decay(cols["t"], cols["dev_l2"], window=(10.0, 30.0))
print(f"dev_l2 ~ exp(-{fit.alpha:.4f} t), r^2 = {fit.r_squared:.6f}")
fit = fit_decay(cols["t"], cols["u_l2"], window=(10.0, 30.0))
print(f"u_l2   ~ exp(-{fit.alpha:.4f} t), r^2 = {fit.r_squared:.6f}")

# ## Conservation and bounds

print("mass drift:", np.max(np.abs(cols["mass"] - 1.0)))
print("largest density:", cols["sup_rho"].max())
print("Lyapunov non-increasing between samples:", bool(np.all(np.diff(cols["lyapunov"]) <= 0)))
