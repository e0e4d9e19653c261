# Error against SNR at M = 250 for the three reconstructions.
import sys

from spectrumcs import ExperimentConfig, run_monte_carlo, summarize

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 5
cfg = ExperimentConfig(m_values=(250,), snr_db_values=(5, 10, 15, 20), trials=trials, seed=3)
rows = summarize(run_monte_carlo(cfg))

snrs = sorted({r["snr_db"] for r in rows})
print("snr_db " + " ".join(f"{s:>8g}" for s in snrs))
for solver in cfg.solvers:
    vals = {r["snr_db"]: r["mean_mse"] for r in rows if r["solver"] == solver}
    print(f"{solver:>14} " + " ".join(f"{vals[s]:8.4f}" for s in snrs))
