# %% [markdown]
# # Transmon levels and the rotating frame
#
# The reference device has E_J/E_C = 50 and a 5 GHz 0-1 transition.  We
# print the level energies, the ladder of transition frequencies and the
# detunings seen by a two-tone drive that is resonant on 0-1 and 1-2.

# %%
import numpy as np

from stirap_pmp.reference import reference_spec
from stirap_pmp.transmon import level_spectrum, resonant_frame, spectrum_coefficients, zpf_amplitudes

spec = reference_spec()
spectrum = level_spectrum(spec)
a, b, c = spectrum_coefficients(spec)
print(f"E_C/2pi = {spec.charging_energy / (2 * np.pi):.4f} GHz, xi = {spec.xi:.4f}")
print(f"E_n = {a:.4f} n + ({b:.5f}) n^2 + ({c:.6f}) n^3   [rad/ns]")

# %% [markdown]
# Transition frequencies shrink by roughly the anharmonicity at every rung.

# %%
w = spectrum.transitions / (2 * np.pi)
for n, f in enumerate(w):
    print(f"omega_{n + 1}{n} / 2pi = {f:.4f} GHz")
print(f"anharmonicity / 2pi = {spectrum.anharmonicity / (2 * np.pi):.4f} GHz")

# %% [markdown]
# In the frame of the pump (on 0-1) and Stokes (on 1-2) tones the first
# three levels are resonant; levels 3 and 4 sit several rad/ns away.

# %%
frame = resonant_frame(spectrum)
print("detunings [rad/ns]:", np.round(frame.detunings, 4))

phi, n = zpf_amplitudes(spec)
print(f"phi_zpf = {phi:.4f}, n_zpf = {n:.4f}, product = {phi * n:.12f}")
