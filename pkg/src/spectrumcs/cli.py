"""Command line front end: ``spectrumcs demo|sweep|summarize``.

Exit status is 0 on success, 1 for invalid input and 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ValidationError
from .experiments import (
    PAPER_SOLVERS,
    SOLVERS,
    ExperimentConfig,
    make_instance,
    read_records,
    run_monte_carlo,
    solve,
    summarize,
    write_mse_vs_snr,
    write_records,
    write_spectrum_dat,
    write_summary,
)
from .sensing import normalized_mse

log = logging.getLogger("spectrumcs")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(f"{self.prog}: {message}")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_snr(values: list[str]) -> tuple:
    out = []
    for v in values:
        for item in _csv_list(v):
            if item.lower() in ("noiseless", "none", "inf"):
                out.append(None)
            else:
                try:
                    out.append(float(item))
                except ValueError:
                    raise ValidationError(f"bad SNR value {item!r}") from None
    return tuple(out)


def _parse_m(values: list[str]) -> tuple:
    try:
        return tuple(int(item) for v in values for item in _csv_list(v))
    except ValueError as exc:
        raise ValidationError(f"bad --m value: {exc}") from None


def _solver_params(args) -> dict:
    common = {}
    if args.gamma is not None:
        common["gamma"] = args.gamma
    if args.eta is not None:
        common["eta"] = args.eta
    if args.max_iter is not None:
        common["max_iter"] = args.max_iter
    if args.rel_tol is not None:
        common["rel_tol"] = args.rel_tol
    return {"*": common} if common else {}


def _config(args, default_solvers) -> ExperimentConfig:
    solvers = _csv_list(args.solvers) if args.solvers else list(default_solvers)
    trials = 500 if getattr(args, "full", False) else args.trials
    return ExperimentConfig(
        scenario=args.scenario,
        solvers=tuple(solvers),
        m_values=_parse_m(args.m),
        snr_db_values=_parse_snr(args.snr),
        trials=trials,
        seed=args.seed,
        solver_params=_solver_params(args),
        fixed_phi=args.fixed_phi,
        workers=getattr(args, "workers", 1),
    )


def _add_common(p: argparse.ArgumentParser, m_default, snr_default):
    p.add_argument("--scenario", default="paper", help='scenario JSON file or "paper"')
    p.add_argument("--solvers", default=None, help=f"comma list from {', '.join(SOLVERS)}")
    p.add_argument("--m", action="append", default=None, help="measurement count(s), comma separated")
    p.add_argument("--snr", action="append", default=None, help='SNR(s) in dB, or "noiseless"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--gamma", type=float, default=None, help="l1 weight for the BPDN solvers")
    p.add_argument("--eta", type=float, default=None, help="residual tolerance (OMP stop / MNDO budget)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--rel-tol", type=float, default=None, help="FISTA relative-change tolerance")
    p.add_argument("--fixed-phi", action="store_true", help="share one sensing matrix across trials")
    p.set_defaults(m_default=m_default, snr_default=snr_default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spectrumcs", description="Sparse wideband spectrum reconstruction experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    demo = sub.add_parser("demo", help="reconstruct one realization and export plot data")
    _add_common(demo, ["250"], ["noiseless"])
    demo.add_argument("--trial", type=int, default=0, help="trial index whose seeds to use")

    sweep = sub.add_parser("sweep", help="Monte Carlo sweep over M and SNR")
    _add_common(sweep, ["250,500"], ["noiseless"])
    sweep.add_argument("--trials", type=int, default=100)
    sweep.add_argument("--full", action="store_true", help="use 500 trials per cell")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--timing", action="store_true", help="write wall times into records.csv")

    summ = sub.add_parser("summarize", help="summarize an existing records.csv")
    summ.add_argument("--records", type=Path, default=None, help="defaults to <out>/records.csv")
    summ.add_argument("--out", type=Path, default=Path("out"))
    return parser


def _cmd_demo(args) -> None:
    args.trials = 1
    cfg = _config(args, PAPER_SOLVERS)
    if len(cfg.m_values) != 1 or len(cfg.snr_db_values) != 1:
        raise ValidationError("demo takes a single --m and a single --snr")
    m, snr = cfg.m_values[0], cfg.snr_db_values[0]
    partition, f, system, y = make_instance(cfg, m, snr, args.trial)
    args.out.mkdir(parents=True, exist_ok=True)
    write_spectrum_dat(args.out / "spectrum_true.dat", f)
    with open(args.out / "measurements.dat", "w") as fh:
        fh.write("# row y\n")
        for i, v in enumerate(y.values, start=1):
            fh.write(f"{i} {v!r}\n")
    for name in cfg.solvers:
        res = solve(name, system, y, partition, cfg.params_for(name))
        mse = normalized_mse(res.f_hat, f)
        write_spectrum_dat(args.out / f"spectrum_{name}.dat", res.f_hat)
        print(f"{name}: mse={mse:.6g} iterations={res.iterations} time={res.wall_time:.3f}s"
              + (f" flags={','.join(res.flags)}" if res.flags else ""))


def _cmd_sweep(args) -> None:
    cfg = _config(args, PAPER_SOLVERS)
    total = len(cfg.m_values) * len(cfg.snr_db_values) * cfg.trials * len(cfg.solvers)
    log.info("running %d reconstructions", total)
    records = run_monte_carlo(cfg, progress=lambda k: log.debug("%d/%d", k, total))
    args.out.mkdir(parents=True, exist_ok=True)
    write_records(args.out / "records.csv", records, timing=args.timing)
    rows = summarize(records)
    if not args.timing:
        for row in rows:
            row["mean_time_s"] = None
    write_summary(args.out / "summary.csv", rows)
    write_mse_vs_snr(args.out, rows)
    for row in rows:
        snr = "noiseless" if row["snr_db"] is None else f"{row['snr_db']:g} dB"
        print(f"{row['solver']:>14}  M={row['m']:<4} {snr:>10}  mean mse={row['mean_mse']:.4g}")


def _cmd_summarize(args) -> None:
    path = args.records or args.out / "records.csv"
    if not path.exists():
        raise ValidationError(f"no records file at {path}")
    rows = summarize(read_records(path))
    args.out.mkdir(parents=True, exist_ok=True)
    write_summary(args.out / "summary.csv", rows)
    write_mse_vs_snr(args.out, rows)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        if args.command in ("demo", "sweep"):
            args.m = args.m or args.m_default
            args.snr = args.snr or args.snr_default
        {"demo": _cmd_demo, "sweep": _cmd_sweep, "summarize": _cmd_summarize}[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
