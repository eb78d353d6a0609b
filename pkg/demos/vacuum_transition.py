"""Averaged vacuum-to-vacuum probability across a noisy step barrier.

The curves against the reflection coefficient rho approach the sudden result
sqrt(1 - rho) for strong coupling and bend upward at small rho for weak
coupling.  Writes ``rho,lambda,delta`` to ``demo_output/vacuum_transition.csv``.
"""

import math
import os
import sys

import numpy as np

from qrho.transitions import delta_00, delta_grid, write_fig2_csv

out = sys.argv[1] if len(sys.argv) > 1 else "demo_output"
os.makedirs(out, exist_ok=True)
rhos = np.linspace(0.0, 0.9, 10)
lams = [0.3, 1.0, 3.0, 1e6]
res = delta_grid(lams, rhos)
write_fig2_csv(os.path.join(out, "vacuum_transition.csv"), res)

print("  rho  " + "".join(f"  lambda={lam:<8g}" for lam in lams) + "  sqrt(1-rho)")
for i, rho in enumerate(rhos):
    row = res[i * len(lams):(i + 1) * len(lams)]
    print(f" {rho:4.2f} " + "".join(f"  {r.delta:<15.6f}" for r in row)
          + f"  {math.sqrt(1 - rho):.6f}")

# noisy out channel as well: the double average over both phases
r = delta_00(1.0, 1.0, 0.36)
print(f"two-sided form, lambda = lambda_plus = 1, rho = 0.36: delta = {r.delta:.6f} "
      f"(I1 = {r.i1:.6f}, I2 = {r.i2:.6f})")
