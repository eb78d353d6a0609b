"""Ground-state energy shift, level width and entropy against the out-channel coupling.

Writes ``lambda_plus,e_osc,width,entropy`` to ``demo_output/thermo.csv``.
"""

import os
import sys

import numpy as np

from qrho.thermo import distribution, potentials, thermo_sweep, write_fig3_csv

out = sys.argv[1] if len(sys.argv) > 1 else "demo_output"
os.makedirs(out, exist_ok=True)
pts = thermo_sweep(np.geomspace(0.1, 1e3, 9), omega_as=1.0)
write_fig3_csv(os.path.join(out, "thermo.csv"), pts)

print(" lambda_plus     e_osc        width      decay time    entropy")
for p in pts:
    print(f" {p.lambda_plus:10.4g}  {p.e_osc:+.6f}  {p.level_width:.4e}  {p.decay_time:.4e}"
          f"  {p.entropy:+.6f}")

# occupation of a level and the potentials it implies, at eps_plus = 1
for e in (0.5, 1.0, 2.0):
    pot = potentials(e, 1.0)
    print(f"E = {e}: occupation {distribution(e, 1.0).value:.5f}, U = {pot.internal_energy:+.5f},"
          f" F = {pot.helmholtz:+.5f}, S = {pot.entropy:+.5f}")
