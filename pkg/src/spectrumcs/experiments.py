"""Monte Carlo experiments comparing the reconstruction algorithms.

Every random draw is seeded from ``(master seed, trial, stream, ...)`` through
:class:`numpy.random.SeedSequence`, so a record depends only on its own cell
and trial number: adding trials or solvers never changes existing rows, and
records come out identical whether trials run serially or in worker processes.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import convex, greedy
from .errors import ValidationError
from .sensing import add_awgn, gaussian_system, measure, normalized_mse
from .spectrum import CategoryPartition, OccupancyRule, generate_spectrum, load_scenario

__all__ = [
    "SOLVERS",
    "PAPER_SOLVERS",
    "ExperimentConfig",
    "TrialRecord",
    "run_trial",
    "run_single_demo",
    "run_monte_carlo",
    "summarize",
    "write_records",
    "read_records",
    "write_summary",
    "write_spectrum_dat",
    "write_mse_vs_snr",
]

SOLVERS = ("omp", "modified_omp", "bpdn", "mndo", "modified_bpdn")
PAPER_SOLVERS = ("modified_omp", "modified_bpdn", "mndo")
RECORD_FIELDS = ["solver", "m", "snr_db", "trial", "mse", "iterations", "wall_time_s", "flags"]
SUMMARY_FIELDS = ["solver", "m", "snr_db", "mean_mse", "median_mse", "std_mse", "mean_time_s", "trials"]

# seed-stream tags
_SPECTRUM, _PHI, _NOISE = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: scenario, solvers and the (M, SNR) grid to sweep.

    ``snr_db_values`` entries of ``None`` mean noiseless. ``solver_params``
    maps a solver name (or ``"*"`` for all) to keyword overrides such as
    ``gamma``, ``eta``, ``max_iter`` and ``rel_tol``.
    """

    scenario: object = "paper"
    solvers: tuple[str, ...] = PAPER_SOLVERS
    m_values: tuple[int, ...] = (250, 500)
    snr_db_values: tuple[float | None, ...] = (None,)
    trials: int = 100
    seed: int = 0
    solver_params: dict = field(default_factory=dict)
    fixed_phi: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "solvers", tuple(self.solvers))
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(
            self, "snr_db_values", tuple(None if s is None else float(s) for s in self.snr_db_values)
        )
        unknown = [s for s in self.solvers if s not in SOLVERS]
        if unknown:
            raise ValidationError(f"unknown solver(s) {unknown}; choose from {list(SOLVERS)}")
        if not self.solvers:
            raise ValidationError("no solvers selected")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")
        if not self.m_values or not self.snr_db_values:
            raise ValidationError("need at least one M and one SNR value")
        n = self.load()[0].n_bins
        bad = [m for m in self.m_values if not 0 < m < n]
        if bad:
            raise ValidationError(f"measurement counts {bad} must lie in (0, {n})")

    def load(self) -> tuple[CategoryPartition, OccupancyRule]:
        return load_scenario(self.scenario)

    def params_for(self, solver: str) -> dict:
        out = dict(self.solver_params.get("*", {}))
        out.update(self.solver_params.get(solver, {}))
        return out


@dataclass(frozen=True)
class TrialRecord:
    solver: str
    m: int
    snr_db: float | None
    trial_index: int
    normalized_mse: float
    iterations: int
    wall_time_s: float | None
    flags: tuple[str, ...] = ()

    def sort_key(self):
        return _cell_key(self.solver, self.m, self.snr_db) + (self.trial_index,)


def _cell_key(solver, m, snr):
    return (solver, m, snr is not None, -math.inf if snr is None else snr)


def _snr_code(snr_db: float) -> int:
    # SeedSequence wants nonnegative ints; millidecibel resolution is plenty
    return int(round(snr_db * 1000)) + 10**9


def trial_seeds(seed: int, trial: int, m: int, snr_db: float | None, fixed_phi: bool = False):
    """Seed sequences for the spectrum, the sensing matrix and the noise of one trial."""
    spec = np.random.SeedSequence([seed, _SPECTRUM, trial])
    phi = np.random.SeedSequence([seed, _PHI, m] if fixed_phi else [seed, _PHI, m, trial])
    noise = None if snr_db is None else np.random.SeedSequence([seed, _NOISE, m, _snr_code(snr_db), trial])
    return spec, phi, noise


def make_instance(config: ExperimentConfig, m: int, snr_db: float | None, trial: int, scenario=None):
    """Draw (spectrum, system, measurement) for one trial."""
    partition, rule = scenario or config.load()
    s_spec, s_phi, s_noise = trial_seeds(config.seed, trial, m, snr_db, config.fixed_phi)
    f = generate_spectrum(partition, rule, s_spec)
    system = gaussian_system(m, partition.n_bins, s_phi)
    y = measure(system, f)
    if snr_db is not None:
        y = add_awgn(y, snr_db, system, f, s_noise)
    return partition, f, system, y


def _prox_cfg(params: dict) -> convex.ProxConfig:
    kw = {k: params[k] for k in ("max_iter", "rel_tol") if k in params}
    return convex.ProxConfig(**kw)


def solve(solver: str, system, y, partition: CategoryPartition, params: dict | None = None):
    """Run one named solver with optional overrides."""
    p = dict(params or {})
    if solver == "omp":
        return greedy.omp(system, y, max_iter=p.get("max_iter"), eta=p.get("eta"))
    if solver == "modified_omp":
        return greedy.modified_omp(system, y, partition, max_iter=p.get("max_iter"), eta=p.get("eta"))
    if solver == "bpdn":
        return convex.bpdn(system, y, gamma=p.get("gamma"), cfg=_prox_cfg(p))
    if solver == "modified_bpdn":
        return convex.modified_bpdn(system, y, partition, gamma=p.get("gamma"), cfg=_prox_cfg(p))
    if solver == "mndo":
        return convex.mndo(system, y, partition, eta=p.get("eta"), cfg=_prox_cfg(p))
    raise ValidationError(f"unknown solver {solver!r}; choose from {list(SOLVERS)}")


def run_trial(config: ExperimentConfig, m: int, snr_db: float | None, trial: int, scenario=None) -> list[TrialRecord]:
    """All configured solvers on one realization; solver failures become flags."""
    partition, f, system, y = make_instance(config, m, snr_db, trial, scenario)
    out = []
    for name in config.solvers:
        try:
            res = solve(name, system, y, partition, config.params_for(name))
        except Exception as exc:  # recorded, the sweep goes on
            out.append(TrialRecord(name, m, snr_db, trial, math.nan, 0, None, (f"error:{type(exc).__name__}",)))
            continue
        out.append(
            TrialRecord(
                name, m, snr_db, trial, normalized_mse(res.f_hat, f), res.iterations, res.wall_time, res.flags
            )
        )
    return out


def _run_unit(args):
    config, m, snr, trial = args
    return run_trial(config, m, snr, trial)


def run_monte_carlo(config: ExperimentConfig, progress=None) -> list[TrialRecord]:
    """Every (M, SNR, trial) for every solver, returned in canonical order."""
    units = [
        (config, m, snr, t) for m in config.m_values for snr in config.snr_db_values for t in range(config.trials)
    ]
    records: list[TrialRecord] = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for recs in pool.map(_run_unit, units, chunksize=max(1, len(units) // (8 * config.workers))):
                records.extend(recs)
                if progress:
                    progress(len(records))
    else:
        scenario = config.load()
        for _, m, snr, t in units:
            records.extend(run_trial(config, m, snr, t, scenario))
            if progress:
                progress(len(records))
    records.sort(key=TrialRecord.sort_key)
    return records


def run_single_demo(config: ExperimentConfig, solver: str, m: int, snr_db: float | None = None, trial: int = 0):
    """One seeded realization; returns ``(f, result, mse)``."""
    if solver not in SOLVERS:
        raise ValidationError(f"unknown solver {solver!r}; choose from {list(SOLVERS)}")
    partition, f, system, y = make_instance(config, m, snr_db, trial)
    res = solve(solver, system, y, partition, config.params_for(solver))
    return f, res, normalized_mse(res.f_hat, f)


def summarize(records) -> list[dict]:
    """Mean/median/std of the error and mean time per (solver, M, SNR) cell."""
    records = list(records)
    if not records:
        raise ValidationError("no records to summarize")
    cells: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        cells.setdefault((r.solver, r.m, r.snr_db), []).append(r)
    rows = []
    for key in sorted(cells, key=lambda k: _cell_key(*k)):
        recs = cells[key]
        mse = np.array([r.normalized_mse for r in recs], dtype=float)
        ok = mse[np.isfinite(mse)]
        times = [r.wall_time_s for r in recs if r.wall_time_s is not None]
        rows.append(
            {
                "solver": key[0],
                "m": key[1],
                "snr_db": key[2],
                "mean_mse": float(ok.mean()) if ok.size else math.nan,
                "median_mse": float(np.median(ok)) if ok.size else math.nan,
                "std_mse": float(ok.std()) if ok.size else math.nan,
                "mean_time_s": float(np.mean(times)) if times else None,
                "trials": len(recs),
            }
        )
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _fmt_snr(s) -> str:
    return "" if s is None else repr(float(s))


def records_to_csv(records, timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow(
            [
                r.solver,
                r.m,
                _fmt_snr(r.snr_db),
                r.trial_index,
                _fmt(float(r.normalized_mse)),
                r.iterations,
                _fmt(r.wall_time_s) if timing else "",
                ";".join(r.flags),
            ]
        )
    return buf.getvalue()


def write_records(path, records, timing: bool = False) -> Path:
    """Write ``records.csv``. Wall times are left blank unless ``timing`` is set,
    which keeps repeated runs byte-identical."""
    path = Path(path)
    path.write_text(records_to_csv(records, timing))
    return path


def read_records(path) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_FIELDS:
            raise ValidationError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            TrialRecord(
                solver=row["solver"],
                m=int(row["m"]),
                snr_db=float(row["snr_db"]) if row["snr_db"] else None,
                trial_index=int(row["trial"]),
                normalized_mse=float(row["mse"]),
                iterations=int(row["iterations"]),
                wall_time_s=float(row["wall_time_s"]) if row["wall_time_s"] else None,
                flags=tuple(row["flags"].split(";")) if row["flags"] else (),
            )
            for row in reader
        ]


def write_summary(path, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_FIELDS)
        for row in rows:
            w.writerow(
                [
                    row["solver"],
                    row["m"],
                    _fmt_snr(row["snr_db"]),
                    _fmt(row["mean_mse"]),
                    _fmt(row["median_mse"]),
                    _fmt(row["std_mse"]),
                    _fmt(row["mean_time_s"]),
                    row["trials"],
                ]
            )
    return path


def write_spectrum_dat(path, values, label: str = "amplitude") -> Path:
    """Two-column ``bin amplitude`` text file (1-based bins)."""
    v = np.asarray(getattr(values, "values", values), dtype=float)
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# bin {label}\n")
        for i, a in enumerate(v, start=1):
            fh.write(f"{i} {a!r}\n")
    return path


def write_mse_vs_snr(out_dir, rows) -> list[Path]:
    """One ``mse_vs_snr_<m>.dat`` per M: SNR in the first column, one column per solver."""
    out_dir = Path(out_dir)
    written = []
    for m in sorted({r["m"] for r in rows}):
        cell = [r for r in rows if r["m"] == m and r["snr_db"] is not None]
        if not cell:
            continue
        solvers = sorted({r["solver"] for r in cell})
        snrs = sorted({r["snr_db"] for r in cell})
        table = {(r["solver"], r["snr_db"]): r["mean_mse"] for r in cell}
        path = out_dir / f"mse_vs_snr_{m}.dat"
        with open(path, "w") as fh:
            fh.write("# snr_db " + " ".join(solvers) + "\n")
            for s in snrs:
                vals = [_fmt(table.get((name, s), math.nan)) for name in solvers]
                fh.write(f"{s!r} " + " ".join(vals) + "\n")
        written.append(path)
    return written

