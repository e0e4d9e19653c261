# One spectrum realization, three reconstructions.
#
# 1000 bins split into always-on bands, 11-bin bands that switch on as a
# whole and a sparse remainder. M = 250 Gaussian measurements, no noise.
import numpy as np

from spectrumcs import ExperimentConfig, run_single_demo

cfg = ExperimentConfig(seed=7)

for solver in ("modified_omp", "modified_bpdn", "mndo"):
    f, res, mse = run_single_demo(cfg, solver, m=250)
    print(f"{solver:>14}: error {mse:.3e}  iterations {res.iterations:5d}  {res.wall_time:.3f} s")

# occupancy at a glance, 50 bins per row
occ = np.asarray(f) != 0
for row in occ.reshape(20, 50):
    print("".join("#" if b else "." for b in row))
print("occupied:", occ.sum(), "of", occ.size)
