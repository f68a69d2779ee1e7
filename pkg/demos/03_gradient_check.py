# %% [markdown]
# # Adjoint gradients against finite differences
#
# One forward solve and one backward costate solve give all six pulse
# gradients.  Central differences need twelve forward solves; the two
# should agree to the accuracy of the differencing.

# %%
import time

import numpy as np

from stirap_pmp.chain import ChainSystem, basis
from stirap_pmp.cli import gradient_check
from stirap_pmp.dynamics import propagate
from stirap_pmp.pmp import CostWeights, backward_costate, parameter_gradient
from stirap_pmp.pulses import PARAM_NAMES
from stirap_pmp.reference import INITIAL_PARAMS, WEIGHTS, reference_setup

setup = reference_setup()
system, grid = setup.system(), setup.grid

start = time.perf_counter()
report = parameter_gradient(system, INITIAL_PARAMS, WEIGHTS, grid)
print(f"J = {report.objective.total:.6f}, |grad J| = {report.norm:.4e} ({time.perf_counter() - start:.2f} s)")

# %%
rows, ok = gradient_check(system, INITIAL_PARAMS, WEIGHTS, grid)
for r in rows:
    print(f"{r['param']:>8}  adjoint {r['analytic']:+.8e}  fd {r['finite_difference']:+.8e}  rel {r['rel_error']:.1e}")
print("all within tolerance:", ok)

# %% [markdown]
# The functional gradient dJ/dOmega(t) shows where in time each pulse
# matters most.

# %%
for ch in ("p", "s"):
    g = report.functional[ch]
    k = int(np.argmax(np.abs(g)))
    print(f"dJ/dOmega_{ch}: largest magnitude {g[k]:+.4f} at t = {grid.times[k]:.1f} ns")

# %% [markdown]
# Without a running cost and without decay the costate norm is conserved.

# %%
closed = ChainSystem(system.detunings, system.links)
terminal_only = CostWeights(1.0, 0.0, 0.0)
traj = propagate(closed, INITIAL_PARAMS, grid, basis(5, 0))
lam = backward_costate(closed, INITIAL_PARAMS, terminal_only, grid, traj).costates
print(f"costate norm spread: {np.ptp(np.linalg.norm(lam, axis=1)):.2e}")
print({k: round(float(v), 6) for k, v in zip(PARAM_NAMES, report.gradient)})
