"""Command line entry point: ``converge``, ``marshak``, ``two-wave``, ``stats``, ``defaults``.

Every CSV starts with one ``# {json}`` line holding the run manifest
(subcommand, config, seed, strategy, version).  The output location and
worker count are kept out of it so a replay elsewhere, or with another
number of workers, gives identical bytes; they go to ``manifest.json``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CellPopError, DegenerateReference
from .harness import ExperimentConfig, run_experiment
from .imc import config as slabcfg
from .imc.config import STRATEGIES, ConfigError, SlabConfig
from .imc.simulation import STEP_FIELDS, run_realization
from .stats import FomReport, RealizationMatrix, fom_report, summarize

RUN_FIELDS = ("cell", "x", "T_matter", "T_rad", "E_r", "n_census")


def atomic_write(path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def manifest_line(manifest: dict) -> str:
    return "# " + json.dumps(manifest, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def csv_text(header: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> tuple[dict | None, list[str], list[list[str]]]:
    """Return (manifest, column names, rows) of a file written by this tool."""
    with open(path, newline="") as fh:
        first = fh.readline()
        manifest = None
        if first.startswith("#"):
            manifest = json.loads(first[1:])
        else:
            fh.seek(0)
        r = csv.reader(fh)
        cols = next(r)
        return manifest, cols, [row for row in r]


# ---------------------------------------------------------------- converge

def cmd_converge(args) -> int:
    cfg = ExperimentConfig(n0=args.n0, n_obj=args.nobj, source=args.source, mode=args.mode,
                           iterations=args.iters, runs=args.runs, seed=args.seed)
    trace = run_experiment(cfg, workers=args.workers)
    manifest = {
        "subcommand": "converge", "config": None, "seed": args.seed, "strategy": cfg.mode.value,
        "version": __version__,
        "params": {"n0": cfg.n0, "n_obj": cfg.n_obj, "source": cfg.source,
                   "mode": cfg.mode.value, "iterations": cfg.iterations, "runs": cfg.runs},
    }
    atomic_write(args.out, trace.to_csv(manifest_line(manifest).rstrip("\n")))
    _side_manifest(Path(args.out).with_suffix(".manifest.json"), manifest, args)
    return 0


def _side_manifest(path, manifest, args):
    full = dict(manifest, output=str(args.out), workers=args.workers)
    atomic_write(path, json.dumps(full, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- slab runs

def build_slab_config(args, base: SlabConfig) -> SlabConfig:
    if args.config is not None:
        base = slabcfg.load(args.config)
    changes = {}
    if args.strategy is not None:
        changes["strategy"] = args.strategy
    if args.runs is not None:
        changes["runs"] = args.runs
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.nobj is not None:
        if args.nobj < 1:
            raise ConfigError("objective count must be ≥ 1")
        changes["n_obj"] = args.nobj
    if args.ntotal is not None:
        changes["n_total"] = args.ntotal
    strategy = changes.get("strategy", base.strategy)
    if strategy == "alg3":
        if args.ntotal is not None and args.nobj is None:
            changes["n_obj"] = None
        elif args.nobj is not None and args.ntotal is None:
            changes["n_total"] = None
    elif args.ntotal is not None:
        # alg2 takes a global budget as an even per-cell objective
        n_cells = base.n_cells
        if args.ntotal < n_cells:
            raise ConfigError(f"n_total must be at least n_cells = {n_cells} for {strategy}")
        changes["n_obj"] = args.ntotal // n_cells
        changes["n_total"] = None
    try:
        return base.replace(**changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _one_run(payload):
    cfg, run, n_steps = payload
    return run_realization(cfg, run, n_steps=n_steps)


def _map_runs(cfg, runs, n_steps, workers, on_done):
    payloads = [(cfg, r, n_steps) for r in runs]
    if workers > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for res in ex.map(_one_run, payloads):
                on_done(res)
    else:
        for p in payloads:
            on_done(_one_run(p))


def cmd_slab(args, base: SlabConfig, name: str) -> int:
    cfg = build_slab_config(args, base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n_steps = args.steps if args.steps is not None else cfg.n_steps
    if n_steps < 1:
        raise ConfigError("steps must be >= 1")
    manifest = {
        "subcommand": name, "config": args.config if args.config is not None else f"builtin:{name}",
        "seed": cfg.seed, "strategy": cfg.strategy, "version": __version__,
        "params": cfg.to_dict(), "steps": n_steps,
    }
    header = manifest_line(manifest)
    step_rows = {}
    timing = {}
    split = {}

    def on_done(res):
        rows = zip(range(cfg.n_cells), res.x_centers, res.T_matter, res.T_rad, res.e_r, res.n_census)
        atomic_write(out / f"run_{res.run}.csv", csv_text(header, RUN_FIELDS, rows))
        step_rows[res.run] = [[res.run] + r.row() for r in res.reports]
        timing[res.run] = res.cpu_seconds
        tracked = sum(r.n_tracked for r in res.reports)
        split[res.run] = sum(r.split_events + r.clones for r in res.reports) / max(tracked, 1)
        if not args.quiet:
            print(f"{name}: run {res.run} done in {res.cpu_seconds:.1f} s, "
                  f"balance {res.cumulative_balance():.2e}, split fraction {100 * split[res.run]:.3f}%",
                  file=sys.stderr)

    t0 = time.perf_counter()
    _map_runs(cfg, list(range(cfg.runs)), n_steps, args.workers, on_done)
    rows = [row for r in sorted(step_rows) for row in step_rows[r]]
    atomic_write(out / "steps.csv", csv_text(header, ("run",) + STEP_FIELDS, rows))
    atomic_write(out / "timing.json", json.dumps(
        {"cpu_seconds": {str(r): timing[r] for r in sorted(timing)},
         "wall_seconds_total": time.perf_counter() - t0}, indent=2) + "\n")
    full = dict(manifest, output=str(out), workers=args.workers)
    atomic_write(out / "manifest.json", json.dumps(full, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------- stats

def load_runs(directory):
    """Per-run CSVs of a slab output directory as (manifest, x, fields, cpu_seconds)."""
    d = Path(directory)
    if not d.is_dir():
        raise ConfigError(f"input directory not found: {d}")
    files = sorted(d.glob("run_*.csv"), key=lambda p: int(p.stem.split("_")[1]))
    if not files:
        raise ConfigError(f"no run_<i>.csv files in {d}")
    manifest = None
    fields = {"T_matter": [], "T_rad": []}
    x = None
    runs = []
    for f in files:
        manifest, cols, rows = read_csv(f)
        arr = np.array(rows, dtype=float)
        x = arr[:, cols.index("x")]
        for k in fields:
            fields[k].append(arr[:, cols.index(k)])
        runs.append(int(f.stem.split("_")[1]))
    cpu = None
    timing = d / "timing.json"
    if timing.exists():
        secs = json.loads(timing.read_text())["cpu_seconds"]
        if all(str(r) in secs for r in runs):
            cpu = np.array([float(secs[str(r)]) for r in runs])
    return manifest, x, {k: np.vstack(v) for k, v in fields.items()}, cpu


def cmd_stats(args) -> int:
    manifest, x, fields, cpu = load_runs(args.input)
    reports = {}
    for k, v in fields.items():
        try:
            reports[k] = fom_report(RealizationMatrix(v, cpu))
        except DegenerateReference:
            # e.g. no census radiation anywhere: per-cell columns are still defined
            s = summarize(v)
            reports[k] = FomReport(s.mean, s.var, s.std, s.ci99, math.nan, None, None, s.n)
    cols = ["cell", "x"]
    for k in fields:
        cols += [f"{k}_mean", f"{k}_var", f"{k}_std", f"{k}_ci99"]
    rows = []
    for m in range(x.size):
        row = [m, x[m]]
        for r in reports.values():
            row += [r.mean[m], r.var[m], r.std[m], r.ci99_halfwidth[m]]
        rows.append(row)
    n_runs = next(iter(reports.values())).n_runs
    head = {"subcommand": "stats", "source": manifest, "n_runs": n_runs, "version": __version__}
    atomic_write(args.out, csv_text(manifest_line(head), cols, rows))

    # timing dependent numbers go to a separate file
    summary = [[k, r.n_runs, "" if math.isnan(r.re2) else r.re2,
                "" if r.cpu_seconds is None else r.cpu_seconds, r.fom_text]
               for k, r in reports.items()]
    out = Path(args.out)
    atomic_write(out.with_name(out.stem + "_summary.csv"),
                 csv_text(manifest_line(head), ("field", "n_runs", "re2", "cpu_seconds", "fom"),
                          summary))
    if not args.quiet:
        for row in summary:
            print(f"{row[0]}: RE2={_fmt(row[2])} cpu={_fmt(row[3])} FOM={row[4]}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- defaults

def cmd_defaults(args) -> int:
    cfg = slabcfg.default_configs()[args.name]
    if args.out is None:
        sys.stdout.write(slabcfg.dumps(cfg, "json" if args.json else "toml"))
    else:
        path = Path(args.out)
        fmt = "json" if path.suffix.lower() == ".json" else "toml"
        atomic_write(path, slabcfg.dumps(cfg, fmt))
    return 0


# ---------------------------------------------------------------- parser

def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _workers(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cellpop", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cellpop {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("converge", help="iterate RR+S on weight vectors and record N^l, d^l")
    c.add_argument("--n0", type=int, required=True)
    c.add_argument("--nobj", type=int, required=True)
    c.add_argument("--source", type=float, default=0.0)
    c.add_argument("--mode", choices=("c", "nc"), default="nc")
    c.add_argument("--iters", type=int, default=100)
    c.add_argument("--runs", type=int, default=1000)
    c.add_argument("--seed", type=_u64, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--workers", type=_workers, default=1)
    c.set_defaults(func=cmd_converge)

    for name, base in (("marshak", slabcfg.marshak_config), ("two-wave", slabcfg.two_wave_config)):
        s = sub.add_parser(name, help=f"run the {name} slab benchmark")
        s.add_argument("--config", default=None, help="TOML or JSON file (default: built-in)")
        s.add_argument("--strategy", choices=STRATEGIES, default=None)
        s.add_argument("--nobj", type=int, default=None)
        s.add_argument("--ntotal", type=int, default=None)
        s.add_argument("--runs", type=int, default=None)
        s.add_argument("--seed", type=_u64, default=None)
        s.add_argument("--steps", type=int, default=None, help="stop after this many steps")
        s.add_argument("--out", required=True)
        s.add_argument("--workers", type=_workers, default=1)
        s.add_argument("--quiet", action="store_true")
        s.set_defaults(func=lambda a, _b=base, _n=name: cmd_slab(a, _b(), _n))

    st = sub.add_parser("stats", help="mean/variance/RE2/FOM across run_<i>.csv files")
    st.add_argument("--in", dest="input", required=True)
    st.add_argument("--out", required=True)
    st.add_argument("--quiet", action="store_true")
    st.set_defaults(func=cmd_stats)

    d = sub.add_parser("defaults", help="print or save a built-in slab config")
    d.add_argument("name", choices=sorted(slabcfg.default_configs()))
    d.add_argument("--out", default=None)
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_defaults)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CellPopError, ValueError, OSError) as exc:
        print(f"cellpop {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
