# Wall time per reconstruction. Greedy selection with block adds needs a
# handful of least-squares refits; the convex solvers need thousands of
# matrix-vector products.
import numpy as np

from spectrumcs import ExperimentConfig, run_single_demo

cfg = ExperimentConfig(seed=11)
for m in (250, 500):
    for solver in cfg.solvers:
        times = [run_single_demo(cfg, solver, m, trial=t)[1].wall_time for t in range(3)]
        print(f"M={m} {solver:>14}: {np.mean(times):.3f} s")
