"""Monte Carlo check: long-time theta histogram of the phase SDE against the stationary density.

Paths start just after a reinjection (theta = theta_max, phi = 0+), run with
eps = 1 so theta is already the scaled variable, and are sampled every 0.1
time units on [4, 8].
"""

import math
import time

import numpy as np

from qrho.fokker_planck import half_masses, stationary_density
from qrho.stochastic import ComplexPhase, FrequencyProfile, NoiseSpec, theta_histogram

N_TRAJ = 20_000
edges = np.linspace(-40.0, 40.0, 161)
mids = 0.5 * (edges[1:] + edges[:-1])
u, w = np.polynomial.legendre.leggauss(8)

for lam, gam in ((1.0, 1.0), (10.0, 1.0), (1.0, 4.0)):
    prof = FrequencyProfile("step", math.sqrt(lam), math.sqrt(lam * gam), t_c=0.0)
    t = time.perf_counter()
    h = theta_histogram(prof, NoiseSpec(1.0, seed=1), N_TRAJ, 0.0, 8.0, 1e-3, 200.0, edges,
                        sample_from=4.0, sample_every=100,
                        initial=ComplexPhase(theta=200.0, phi=0.0))
    p, under, over = h.probabilities()
    x = 0.5 * (edges[1:, None] - edges[:-1, None]) * u + mids[:, None]
    q = (stationary_density(lam, gam, x.ravel()).reshape(x.shape) * w).sum(axis=1) * 0.25
    pos, neg = half_masses(lam, gam)
    l1 = np.abs(p - q).sum() + abs(under - (neg - q[mids < 0].sum())) \
        + abs(over - (pos - q[mids > 0].sum()))
    print(f"lambda={lam:g} gamma={gam:g}: L1 = {l1:.4f}, "
          f"P(theta>0) = {p[mids > 0].sum() + over:.4f} (stationary {pos:.4f}), "
          f"reinjections per path = {h.reinjections / N_TRAJ:.2f}, "
          f"{time.perf_counter() - t:.1f} s")
