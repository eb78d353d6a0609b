"""Local S-matrix of a sudden frequency step and its unitarity partial sums."""

import numpy as np

from qrho.wavefunc import deterministic_frame, s_closed_forms, s_local, unitarity_defect

fi, fo = deterministic_frame(1.0, 0.0), deterministic_frame(4.0, 0.0)
s = s_local(6, fi, fo)
np.set_printoptions(precision=4, suppress=True, linewidth=110)
print("|S_nm|^2 for omega_in = 1, omega_out = 4 (rows: in level n, columns: out level m)")
print(np.abs(s.entries) ** 2)
cf = s_closed_forms(fi, fo)
print(f"|S_00|^2 = {abs(cf['S00']) ** 2:.12f}  (2 sqrt(1*4) / 5 = 0.8)")
print(f"parity defect {s.parity_defect():.1e}, |S_11 - S_00^3| = {abs(s.entries[1, 1] - cf['S11']):.1e}")
for ratio in (1.5, 2.0, 4.0):
    d = unitarity_defect(deterministic_frame(1.0, 0.0), deterministic_frame(ratio, 0.0), 2, 2, 32)
    print(f"frequency ratio {ratio}: |sum_k |S_k2|^2 - 1| at K = 8, 16, 32: "
          f"{d[8]:.1e}, {d[16]:.1e}, {d[32]:.1e}")
