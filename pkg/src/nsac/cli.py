"""Command line front end: ``nsac run | validate-init | diagnose``.

Output layout of ``run`` (all CSV values written with 17 significant digits)::

    <output>/diagnostics.csv          one row per step, DiagnosticsRecord fields
    <output>/snapshots/t_00000.csv    columns x,rho,u,chi,mu
    <output>/snapshots/index.csv      columns index,step,t
    <output>/run.json                 config echo, exit reason, wall time, Picard stats

Exit status: 0 for a completed run or a blow-up stop, 1 for a solver failure
(rejected step, lower bound breach, any numerical error), 2 for bad input.
"""
import argparse
import json
import logging
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
from filelock import FileLock, Timeout

from . import __version__, diagnostics, solver
from ._kernels import BACKEND
from .config import RunConfig, config_from_dict, config_to_dict, load_config, with_overrides
from .core import Grid
from .diagnostics import CSV_FIELDS, Snapshot
from .errors import ConfigError, NSACError
from .initial import make_profile, read_initial_csv, validate_initial

log = logging.getLogger("nsac")

SNAPSHOT_COLUMNS = ("x", "rho", "u", "chi", "mu")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


def diagnostics_header():
    return ",".join(CSV_FIELDS) + "\n"


def diagnostics_row(record):
    return ",".join(_fmt(getattr(record, name)) for name in CSV_FIELDS) + "\n"


def write_snapshot(path, grid, state):
    cols = np.column_stack([grid.nodes, state.rho, state.u, state.chi, state.mu])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SNAPSHOT_COLUMNS) + "\n")
        for row in cols:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_snapshot(path, t):
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if arr.shape[1] != len(SNAPSHOT_COLUMNS):
        raise ValueError(f"{path}: expected columns {','.join(SNAPSHOT_COLUMNS)}")
    x, rho, u, chi, mu = (np.ascontiguousarray(arr[:, k]) for k in range(5))
    return x, Snapshot(t, rho, u, chi, mu)


def read_diagnostics_csv(path):
    """Rows of a diagnostics CSV as a dict of float arrays keyed by column."""
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with open(path) as fh:
        names = fh.readline().strip().split(",")
    return {name: arr[:, k] for k, name in enumerate(names)}


class _RunWriter:
    """Observer streaming diagnostics rows and snapshot files as the run goes."""

    def __init__(self, out, grid, every, quiet):
        self.out = out
        self.grid = grid
        self.every = every
        self.quiet = quiet
        self.snap_dir = out / "snapshots"
        self.snap_dir.mkdir(parents=True, exist_ok=True)
        for old in self.snap_dir.glob("t_*.csv"):
            old.unlink()
        self.diag = open(out / "diagnostics.csv", "w", newline="")
        self.diag.write(diagnostics_header())
        self.index = open(self.snap_dir / "index.csv", "w", newline="")
        self.index.write("index,step,t\n")
        self.n_snap = 0
        self.last_state = None
        self.last_record = None
        self.last_written = -1
        self.iters = []
        self.factors = []

    def __call__(self, state, record, report):
        self.diag.write(diagnostics_row(record))
        if report is not None:
            self.iters.append(report.picard_iters)
            if report.contraction_factor is not None:
                self.factors.append(report.contraction_factor)
        self.last_state, self.last_record = state, record
        if record.step % self.every == 0:
            self._snapshot(state, record)

    def _snapshot(self, state, record):
        write_snapshot(self.snap_dir / f"t_{self.n_snap:05d}.csv", self.grid, state)
        self.index.write(f"{self.n_snap},{record.step},{'%.17g' % state.t}\n")
        self.n_snap += 1
        self.last_written = record.step
        if not self.quiet:
            print(f"step {record.step:6d}  t={state.t:.6g}  E={record.energy:.10g}  "
                  f"res={record.energy_residual:.3e}  rho_min={record.rho_min:.4g}  "
                  f"J={record.blowup_functional:.4g}", flush=True)

    def close(self):
        # the final state is always on disk, whatever snapshot_every says
        if self.last_record is not None and self.last_written != self.last_record.step:
            self._snapshot(self.last_state, self.last_record)
        self.diag.close()
        self.index.close()

    def picard_stats(self):
        if not self.iters:
            return {"steps": 0}
        return {
            "steps": len(self.iters),
            "max_iters": int(max(self.iters)),
            "mean_iters": float(np.mean(self.iters)),
            "total_iters": int(sum(self.iters)),
            "mean_contraction": float(np.mean(self.factors)) if self.factors else None,
            "max_contraction": float(np.max(self.factors)) if self.factors else None,
        }


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    return obj


def cmd_run(cfg, quiet=False):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        lock = FileLock(str(out / ".nsac.lock"), timeout=0)
        lock.acquire()
    except Timeout:
        print(f"error: another run is writing to {out}", file=sys.stderr)
        return EXIT_FAIL
    try:
        return _run_locked(cfg, out, quiet)
    finally:
        lock.release()


def _run_locked(cfg, out, quiet):
    info = {"version": __version__, "backend": BACKEND, "config": config_to_dict(cfg)}
    start = time.perf_counter()
    writer = None
    status = EXIT_OK
    try:
        grid = Grid(cfg.n)
        writer = _RunWriter(out, grid, cfg.snapshot_every, quiet)
        result = solver.run(cfg, observer=writer, keep_snapshots=False)
        info["exit_reason"] = result.exit_reason
        info["steps_done"] = result.steps_done
        info["error"] = None
        if result.exit_reason in (solver.EXIT_REJECTED, solver.EXIT_BOUND):
            status = EXIT_FAIL
        last = writer.last_record
        if last is not None:
            info["final"] = {"t": last.t, "energy": last.energy, "energy_residual": last.energy_residual,
                             "mass": last.mass, "rho_min": last.rho_min, "rho_bound": last.rho_bound,
                             "J1": last.J1, "J2": last.J2, "J3": last.J3, "phi": last.phi}
    except Exception as exc:  # every failure is recorded before exiting
        info["exit_reason"] = "error"
        info["error"] = {"class": type(exc).__name__, "message": str(exc)}
        status = EXIT_USAGE if isinstance(exc, (ConfigError, FileNotFoundError)) else EXIT_FAIL
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    finally:
        if writer is not None:
            writer.close()
            info["picard"] = writer.picard_stats()
            info["snapshots"] = writer.n_snap
    info["wall_time_s"] = time.perf_counter() - start
    with open(out / "run.json", "w") as fh:
        json.dump(_json_safe(info), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not quiet:
        print(f"exit_reason: {info['exit_reason']}  wall time {info['wall_time_s']:.2f} s  -> {out}")
    return status


def _load_init_data(source, n):
    if source.lower().endswith(".csv") or Path(source).is_file():
        return read_initial_csv(source)
    return make_profile(source, Grid(n))


def cmd_validate_init(source, cfg, tol=1e-3):
    try:
        data = _load_init_data(source, cfg.n)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read initial data {source!r}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = validate_initial(data, tol=tol)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_FAIL


def _find_run_dir(path):
    path = Path(path)
    if (path / "snapshots").is_dir():
        return path, path / "snapshots"
    return path.parent if (path.parent / "run.json").exists() else path, path


def load_snapshots(snap_dir):
    """Snapshots listed in index.csv (or every t_*.csv file), in time order."""
    index = snap_dir / "index.csv"
    entries = []
    if index.exists():
        arr = np.loadtxt(index, delimiter=",", skiprows=1, ndmin=2)
        for idx, step, t in arr:
            entries.append((int(step), float(t), snap_dir / f"t_{int(idx):05d}.csv"))
    files = sorted(snap_dir.glob("t_*.csv"))
    if not entries and files:
        raise ValueError(f"{snap_dir} has snapshot files but no index.csv with their times")
    if not entries:
        raise FileNotFoundError(f"no snapshots in {snap_dir}")
    x = None
    snaps, steps = [], []
    for step, t, f in entries:
        xs, snap = read_snapshot(f, t)
        if x is None:
            x = xs
        elif xs.shape != x.shape:
            raise ValueError(f"{f} has a different grid")
        snaps.append(snap)
        steps.append(step)
    return x, snaps, steps


def cmd_diagnose(target, cfg=None, output=None):
    run_dir, snap_dir = _find_run_dir(target)
    try:
        x, snaps, steps = load_snapshots(snap_dir)
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if cfg is None:
        meta = run_dir / "run.json"
        cfg = config_from_dict(json.loads(meta.read_text())["config"]) if meta.exists() else RunConfig()
    grid = Grid(x.size - 1)
    records = diagnostics.recompute(snaps, cfg.params, grid)
    dest = Path(output) if output else run_dir
    dest.mkdir(parents=True, exist_ok=True)
    with open(dest / "diagnostics_posthoc.csv", "w", newline="") as fh:
        fh.write(diagnostics_header())
        for step, rec in zip(steps, records):
            fh.write(diagnostics_row(replace(rec, step=step)))
    print(f"{len(records)} records -> {dest / 'diagnostics_posthoc.csv'}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="TOML run configuration")
    common.add_argument("--output", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="nsac", parents=[common],
                                description="Spectral-Galerkin solver for 1D compressible Navier-Stokes/Allen-Cahn.")
    sub = p.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", parents=[common], help="run a simulation")
    r.add_argument("--integrator", choices=("rk4", "gauss2"), help="override the momentum integrator")
    v = sub.add_parser("validate-init", parents=[common], help="check initial data hypotheses")
    v.add_argument("source", nargs="?", help="profile name or CSV path (default: config 'initial')")
    v.add_argument("--tol", type=float, default=1e-3)
    d = sub.add_parser("diagnose", parents=[common], help="recompute diagnostics from snapshots")
    d.add_argument("run_dir", help="run output directory or its snapshots/ directory")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    config_path = getattr(args, "config", None)
    try:
        cfg = load_config(config_path) if config_path else RunConfig()
        if args.verb == "run":
            changes = {}
            if getattr(args, "output", None):
                changes["output_dir"] = args.output
            if args.integrator:
                changes["integrator"] = args.integrator
            if changes:
                cfg = with_overrides(cfg, **changes)
    except (ConfigError, NSACError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.verb == "run":
        return cmd_run(cfg, quiet=quiet)
    if args.verb == "validate-init":
        return cmd_validate_init(args.source or cfg.initial, cfg, tol=args.tol)
    explicit = cfg if config_path else None
    return cmd_diagnose(args.run_dir, explicit, getattr(args, "output", None))


if __name__ == "__main__":
    sys.exit(main())
