"""Command-line front end: ``porobeam run|converge|decay-fit|sweep``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import load_config, parse_sweep, serialize_config
from .energy import dissipation_check, fit_decay_rate, lyapunov_series
from .errors import PorobeamError, UsageError
from .model import lyapunov_constants
from .output import (FIELDS, read_timeseries_csv, write_field_csv, write_rates_csv,
                     write_report, write_timeseries_csv)
from .timestepper import RunConfig, run
from .verification import FAMILIES, convergence_study

log = logging.getLogger("porobeam")

EXIT_CODES = """\
exit status:
  0   success
  2   command-line usage error
  3   input file missing or unreadable, output not writable
  4   config parse error (malformed line, bad number or profile)
  5   unknown config key
  6   missing config key
  7   non-positive physical parameter (or several parameter problems at once)
  8   ellipticity violated (mu*xi - b^2 <= 0)
  9   too few elements (s < 2)
  10  singular step system
  11  step residual above 1e-10
  12  decay fit on a non-positive energy
  13  vector length does not match the mesh
  14  non-finite value in an initial profile
  15  energy requested before two levels exist
  16  decay-fit window shorter than 3 samples
  17  requested time was not recorded
  1   any other package error
"""


def _out_dir(args) -> Path:
    out = args.out or args.out_dir
    if out is None:
        raise UsageError("an output directory is required (positional or --out)")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_report(cfg: RunConfig, traj, tail: float) -> dict:
    consts = lyapunov_constants(cfg.params)
    diss = dissipation_check(traj)
    fit = fit_decay_rate(traj.times, traj.total_energy, tail)
    lyap = lyapunov_series(traj, consts)
    E = traj.total_energy
    return {
        "run": {"s": cfg.s, "dt": cfg.dt, "t_final": cfg.t_final, "solves": len(traj),
                "max_relative_residual": float(traj.residuals.max())},
        "energy": {"E_first": float(E[0]), "E_last": float(E[-1]),
                   "strictly_decreasing": bool((E[1:] < E[:-1]).all()),
                   "max_dissipation_residual": diss.max_residual,
                   "dissipation_violations": int(diss.violations.size)},
        "decay_fit": {"tail_fraction": tail, "omega_hat": fit.omega_hat,
                      "log_intercept": fit.log_intercept, "r_squared": fit.r_squared},
        "lyapunov_constants": consts.as_dict(),
        "lyapunov_check": {"min_margin_over_E": min(v.margin / v.E for v in lyap if v.E > 0)
                           if any(v.E > 0 for v in lyap) else 0.0,
                           "sandwich_holds": all(v.margin >= 0 for v in lyap)},
    }


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    t0 = time.perf_counter()
    traj = run(cfg)
    log.info("%d solves in %.3f s", len(traj), time.perf_counter() - t0)
    write_timeseries_csv(traj, out / "energy.csv")
    for f in FIELDS:
        write_field_csv(traj, f, out / f"{f}.csv")
    write_report(out / "report.txt", _run_report(cfg, traj, args.tail))
    return 0


def cmd_converge(args) -> int:
    base = load_config(args.config)
    out = _out_dir(args)
    ms = FAMILIES[args.family](base.params.l)
    report = convergence_study(base, ms, args.levels, workers=args.workers)
    write_rates_csv(report, out / "rates.csv")
    for k in report.order_h:
        log.info("%-9s order_h=%.3f order_dt=%.3f", k, report.order_h[k], report.order_dt[k])
    return 0


def cmd_decay_fit(args) -> int:
    t, E = read_timeseries_csv(args.config)
    fit = fit_decay_rate(t, E, args.tail)
    out = _out_dir(args)
    write_report(out / "decay_fit.txt", {"decay_fit": {
        "source": str(args.config), "tail_fraction": args.tail, "omega_hat": fit.omega_hat,
        "log_intercept": fit.log_intercept, "r_squared": fit.r_squared, "samples": fit.n_samples}})
    log.info("omega_hat=%.6g r_squared=%.6f", fit.omega_hat, fit.r_squared)
    return 0


def _sweep_one(job):
    index, overrides, cfg, out_dir, tail = job
    run_dir = Path(out_dir) / f"run_{index:03d}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.cfg").write_text(serialize_config(cfg), encoding="utf-8")
    traj = run(cfg)
    write_timeseries_csv(traj, run_dir / "energy.csv")
    report = _run_report(cfg, traj, tail)
    write_report(run_dir / "report.txt", report)
    return index, overrides, report


def cmd_sweep(args) -> int:
    grid = parse_sweep(Path(args.config).read_text(encoding="utf-8"))
    out = _out_dir(args)
    jobs = [(i, ov, cfg, str(out), args.tail) for i, (ov, cfg) in enumerate(grid)]
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        results = sorted(pool.map(_sweep_one, jobs), key=lambda r: r[0])
    keys = sorted({k for _, ov, _ in results for k in ov})
    lines = [",".join(["run"] + keys + ["E_last", "omega_hat", "r_squared", "max_dissipation_residual"])]
    for i, ov, rep in results:
        lines.append(",".join(
            [f"{i:03d}"] + [ov.get(k, "") for k in keys]
            + [format(rep["energy"]["E_last"], ".17g"), format(rep["decay_fit"]["omega_hat"], ".17g"),
               format(rep["decay_fit"]["r_squared"], ".17g"),
               format(rep["energy"]["max_dissipation_residual"], ".17g")]))
    tmp = out / "sweep.csv.partial"
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(out / "sweep.csv")
    log.info("sweep of %d runs written to %s", len(results), out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="porobeam",
        description="Porous-elastic beam with microtemperature: P1 / implicit Euler simulator.",
        epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help, source, source_help, func):
        p = sub.add_parser(name, help=help)
        p.add_argument("config", metavar=source, help=source_help)
        p.add_argument("out_dir", nargs="?", help="output directory")
        p.add_argument("--out", help="output directory (overrides the positional one)")
        p.add_argument("--quiet", action="store_true", help="only report errors")
        p.add_argument("--tail", type=float, default=0.5,
                       help="fraction of the energy series used by the decay fit (default 0.5)")
        p.set_defaults(func=func)
        return p

    command("run", "simulate one configuration", "config", "key = value configuration file", cmd_run)
    p = command("converge", "manufactured-solution convergence study", "config",
                "base configuration (params, s, dt, t_final of the coarsest level)", cmd_converge)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--family", choices=sorted(FAMILIES), default="sine")
    p.add_argument("--workers", type=int, default=None)
    command("decay-fit", "fit the decay rate of a written energy.csv", "energy_csv",
            "time series written by 'run'", cmd_decay_fit)
    p = command("sweep", "run a parameter grid concurrently", "config",
                "configuration with comma-separated values on swept keys", cmd_sweep)
    p.add_argument("--workers", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PorobeamError as exc:
        print(f"porobeam: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"porobeam: error: no such file: {exc.filename}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"porobeam: error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"porobeam: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
