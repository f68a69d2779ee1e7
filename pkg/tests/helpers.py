"""Random five-level instances shared by the gradient and descent tests."""
import numpy as np

from stirap_pmp.chain import ChainSystem, Dissipation, Link
from stirap_pmp.pmp import CostWeights
from stirap_pmp.pulses import GaussianParams

TRANSMON_LINKS = [Link(0, "p", 1.0), Link(1, "s", np.sqrt(2)), Link(2, "p", np.sqrt(3)), Link(3, "s", 2.0)]


def random_system(rng, dissipative=False, n=5):
    det = np.concatenate([[0.0], rng.uniform(-1, 1, n - 1)])
    links = TRANSMON_LINKS[: n - 1]
    diss = [Dissipation(float(rng.uniform(0.005, 0.05)), k, k - 1) for k in range(1, n)] if dissipative else []
    return ChainSystem(det, links, diss)


def random_params(rng, duration=30.0):
    return GaussianParams(
        amp_p=rng.uniform(0.3, 1.2),
        amp_s=rng.uniform(0.3, 1.2),
        t0_p=rng.uniform(0.45, 0.7) * duration,
        t0_s=rng.uniform(0.3, 0.55) * duration,
        sigma_p=rng.uniform(0.12, 0.25) * duration,
        sigma_s=rng.uniform(0.12, 0.25) * duration,
    )


def random_weights(rng):
    return CostWeights(w_f=1.0, w_1=float(rng.uniform(0, 0.05)), w_leak=float(rng.uniform(0, 0.1)))
