# %% [markdown]
# # Counterintuitive pulses on a five-level ladder
#
# Stokes before pump moves population from |0> to |2> through the dark
# state.  On a transmon the same pulses also drive 2-3 and 3-4, so some
# population leaks upward.

# %%
import numpy as np

from stirap_pmp.chain import ChainSystem, Link, basis, dark_state, mixing_angle
from stirap_pmp.dynamics import auto_grid, populations, propagate
from stirap_pmp.pulses import GaussianParams, envelope
from stirap_pmp.reference import INITIAL_PARAMS, reference_setup

# %% [markdown]
# Ideal three-level case first: zero detunings, unit couplings.

# %%
three = ChainSystem(np.zeros(3), [Link(0, "p", 1.0), Link(1, "s", 1.0)])
params = GaussianParams(1.0, 1.0, 48.0, 32.0, 10.0, 10.0)
grid = auto_grid(three, params, 80.0)
record = populations(propagate(three, params, grid, basis(3, 0)), target=2)
print(f"three-level transfer: P_2(T) = {record.fidelity:.5f}")

for t in (20.0, 40.0, 60.0):
    env = {ch: float(envelope(params, ch, t)) for ch in "ps"}
    theta, _ = mixing_angle(env["p"], env["s"])
    print(f"t = {t:4.0f} ns  theta = {np.degrees(theta):5.1f} deg  dark = {np.round(dark_state(three, env).vector.real, 3)}")

# %% [markdown]
# Now the reference transmon, with relaxation included.

# %%
setup = reference_setup()
system = setup.system()
traj = propagate(system, INITIAL_PARAMS, setup.grid, basis(5, 0))
record = populations(traj)
print(f"grid: {setup.grid.steps} steps of {setup.grid.step * 1e3:.2f} ps")
print(f"fidelity {record.fidelity:.5f}, max leakage {record.max_leakage:.5f}")
for k in np.linspace(0, setup.grid.steps, 9).astype(int):
    print(f"t = {traj.times[k]:5.1f}  P = {np.round(record.populations[k], 4)}")
