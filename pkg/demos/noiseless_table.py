# Mean reconstruction error without noise, M = 250 and 500.
# A few trials keep this quick; the CLI's `sweep --full` runs 500.
import sys

import numpy as np

from spectrumcs import ExperimentConfig, run_monte_carlo, summarize

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 5
rows = summarize(run_monte_carlo(ExperimentConfig(trials=trials, seed=1)))

print(f"{'solver':>14} {'M':>4} {'mean error':>12} {'squared':>10}")
for r in rows:
    print(f"{r['solver']:>14} {r['m']:>4} {r['mean_mse']:12.4g} {r['mean_mse'] ** 2:10.4g}")
