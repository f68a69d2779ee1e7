# %% [markdown]
# # Robustness of the optimised protocol
#
# The improvement factor I = (1 - F_init)/(1 - F_opt) compares the two
# protocols under the same perturbation.  I > 1 means the optimised pulses
# are still better after the device or drive has drifted.

# %%
import numpy as np

from stirap_pmp.optimizer import optimize_pulses
from stirap_pmp.reference import INITIAL_PARAMS, WEIGHTS, reference_setup
from stirap_pmp.robustness import scan_1d, scan_2d

setup = reference_setup()
optimized, _ = optimize_pulses(setup.system(), INITIAL_PARAMS, WEIGHTS, setup.grid)

# %% [markdown]
# Amplitude miscalibration and Raman (two-photon) bias.

# %%
amp = scan_1d(setup, INITIAL_PARAMS, optimized, "eta_omega", np.linspace(0.85, 1.15, 7))
for row in amp.rows():
    print(f"eta_Omega = {row['eta_omega']:.2f}  F_init = {row['F_init']:.4f}  F_opt = {row['F_opt']:.4f}  I = {row['I']:.2f}")

bias = scan_1d(setup, INITIAL_PARAMS, optimized, "delta", 2 * np.pi * np.linspace(-0.01, 0.01, 5))
for row in bias.rows():
    print(f"delta/2pi = {row['delta'] / (2 * np.pi) * 1e3:+.1f} MHz  I = {row['I']:.2f}")

# %% [markdown]
# A small two-dimensional grid over amplitude and timing scale.  The
# second knob varies fastest in the flat arrays.

# %%
grid2 = scan_2d(setup, INITIAL_PARAMS, optimized, ("eta_omega", "eta_t"), ([0.9, 1.0, 1.1], [0.9, 1.0, 1.1]))
print(np.round(grid2.grid("improvement"), 2))
print("fixed knobs:", grid2.metadata["fixed_knobs"])
