"""Scenario runs, sweeps and lab runs with their on-disk artifacts."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import csv
import math
import os
from pathlib import Path
import sys
import time
import traceback
import warnings

import numpy as np

from . import lab
from .diagnostics import csv_header, csv_row, monitor_ode_inequality, windowed_integral
from .elliptic import EllipticConfig, solve_helmholtz
from .errors import ChemologError, InsufficientDataError
from .grid import Grid, write_field
from .simulator import initial_condition, parse_initial, run

OUTPUT_ROOT_ENV = "CHEMOLOG_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BLOWUP = 2
EXIT_DT_UNDERFLOW = 3
EXIT_BUDGET = 4

STATUS_BY_KIND = {
    "completed": EXIT_OK,
    "blowup": EXIT_BLOWUP,
    "dt_underflow": EXIT_DT_UNDERFLOW,
    "budget_exhausted": EXIT_BUDGET,
}


def resolve_directory(directory):
    """Relative output directories live under ``$CHEMOLOG_OUTPUT_ROOT`` (default: cwd)."""
    p = Path(directory)
    if p.is_absolute():
        return p
    return Path(os.environ.get(OUTPUT_ROOT_ENV, ".")) / p


def _snapshot_name(prefix, t):
    return f"{prefix}_t{t:.6g}.txt"


def build_initial_fields(cfg):
    kind, kw = parse_initial(cfg.u0)
    u0 = initial_condition(kind, cfg.grid, **kw)
    vkind, vkw = parse_initial(cfg.v0)
    if vkind == "elliptic":
        v0 = solve_helmholtz(u0, cfg.grid, cfg.solver.elliptic)
    else:
        v0 = initial_condition(vkind, cfg.grid, **vkw)
    return u0, v0


@dataclass
class ScenarioResult:
    status: int
    directory: Path
    trajectory: object = None
    summary: dict = None
    error: str = None


def write_timeseries(path, records, ks, ps):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(ks, ps))
        for rec in records:
            w.writerow(csv_row(rec, ks, ps))


def summarize(cfg, traj):
    """Key-value summary of a finished trajectory."""
    term = traj.termination
    recs = traj.records
    finite = [r for r in recs if math.isfinite(r.sup_u)]
    out = {
        "termination": term.kind,
        "final_t": term.t,
        "final_sup_u": term.sup_u,
        "steps": traj.steps,
        "records": len(recs),
        "sup_u_max": max(r.sup_u for r in finite) if finite else math.inf,
        "sup_v_max": max(r.sup_v for r in finite) if finite else math.inf,
        "sup_grad_v_max": max(r.sup_grad_v for r in finite) if finite else math.inf,
        "min_u_min": min(r.min_u for r in finite) if finite else math.nan,
        "mass_initial": recs[0].mass,
        "mass_final": recs[-1].mass,
        "k": list(cfg.ks),
        "p": list(cfg.ps),
        "tau": cfg.tau,
    }
    if term.kind == "blowup":
        out["blowup_time"] = term.t
    for k in cfg.ks:
        for name in ("I", "y"):
            try:
                rep = monitor_ode_inequality(finite, name, k)
                out[f"c_star_{name}_k{k:g}"] = rep.c_star
                out[f"gronwall_{name}_k{k:g}"] = rep.passed
            except InsufficientDataError:
                out[f"c_star_{name}_k{k:g}"] = math.nan
                out[f"gronwall_{name}_k{k:g}"] = False
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                wi = windowed_integral(finite, k, cfg.tau)
            out[f"windowed_sup_k{k:g}"] = wi.sup
            out[f"windowed_truncated_k{k:g}"] = wi.truncated
            out[f"windowed_underresolved_k{k:g}"] = bool(caught)
        except InsufficientDataError:
            out[f"windowed_sup_k{k:g}"] = math.nan
            out[f"windowed_truncated_k{k:g}"] = True
    out["theorem_regime"] = cfg.params.theorem_regime
    out["warnings"] = list(cfg.warnings)
    return out


def format_summary(summary):
    lines = []
    for key, val in summary.items():
        lines.append(f"{key} = {val!r}" if not isinstance(val, bool) else f"{key} = {str(val).lower()}")
    return "\n".join(lines) + "\n"


def run_scenario(cfg, directory=None):
    """Run one scenario, writing ``timeseries.csv``, ``snapshots/``,
    ``summary.txt`` and ``config.cfg`` into its directory.

    Status codes: 0 completed, 2 blowup, 3 dt underflow, 4 budget exhausted,
    1 error (I/O or numerical failure).
    """
    from .config import serialize_config

    out = Path(directory) if directory is not None else resolve_directory(cfg.directory)
    snapdir = out / "snapshots"
    try:
        snapdir.mkdir(parents=True, exist_ok=True)
        (out / "config.cfg").write_text(serialize_config(cfg))
    except OSError as exc:
        msg = f"cannot write to output directory {out}: {exc}"
        print(msg, file=sys.stderr)
        return ScenarioResult(EXIT_ERROR, out, error=msg)

    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)

    def on_snapshot(state):
        for prefix, f in (("u", state.u), ("v", state.v)):
            write_field(snapdir / _snapshot_name(prefix, state.t), f, cfg.grid, state.t)

    try:
        u0, v0 = build_initial_fields(cfg)
        traj = run(u0, v0, cfg.params, cfg.solver, cfg.t_end, cfg.grid, cfg.ks, cfg.ps,
                   snapshot_times=cfg.snapshot_times, on_snapshot=on_snapshot)
        # the last on_snapshot call is the final state
        final_t = traj.termination.t
        for prefix in ("u", "v"):
            src = snapdir / _snapshot_name(prefix, final_t)
            (snapdir / f"{prefix}_final.txt").write_bytes(src.read_bytes())
        write_timeseries(out / "timeseries.csv", traj.records, cfg.ks, cfg.ps)
        summary = summarize(cfg, traj)
        (out / "summary.txt").write_text(format_summary(summary))
    except OSError as exc:
        msg = f"I/O failure under {out}: {exc}"
        print(msg, file=sys.stderr)
        return ScenarioResult(EXIT_ERROR, out, error=msg)
    except (ChemologError, ValueError, FloatingPointError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        print(msg, file=sys.stderr)
        try:
            (out / "summary.txt").write_text(format_summary({"termination": "error", "error": msg}))
        except OSError:
            pass
        return ScenarioResult(EXIT_ERROR, out, error=msg)

    if cfg.plots:
        from .plotting import emit_plots
        emit_plots(out)
    return ScenarioResult(STATUS_BY_KIND[traj.termination.kind], out, traj, summary)


# --- sweeps ----------------------------------------------------------------

SWEEP_COLUMNS = ["index", "termination", "status", "final_t", "final_sup_u", "sup_I_k", "runtime"]


def _sweep_point(args):
    idx, values, cfg, directory = args
    start = time.perf_counter()
    row = {"index": idx, **values}
    try:
        res = run_scenario(cfg, directory)
        row["status"] = res.status
        if res.trajectory is not None:
            term = res.trajectory.termination
            k = cfg.ks[0]
            row["termination"] = term.kind
            row["final_t"] = term.t
            row["final_sup_u"] = term.sup_u
            vals = [r.entropy_k[k] for r in res.trajectory.records if math.isfinite(r.entropy_k[k])]
            row["sup_I_k"] = max(vals) if vals else math.nan
        else:
            row.update(termination="error", final_t=math.nan, final_sup_u=math.nan,
                       sup_I_k=math.nan, error=res.error)
    except Exception as exc:  # a failing point must not stop the sweep
        row.update(status=EXIT_ERROR, termination="error", final_t=math.nan,
                   final_sup_u=math.nan, sup_I_k=math.nan,
                   error=f"{type(exc).__name__}: {exc}")
        traceback.print_exc()
    row["runtime"] = time.perf_counter() - start
    return row


def run_sweep(sweep, directory=None, parallelism=None):
    """Run every grid point; returns rows in Cartesian-product order and writes
    ``sweep_summary.csv``.  Rows never depend on the worker count except for
    the ``runtime`` column."""
    root = Path(directory) if directory is not None else resolve_directory(sweep.base.directory)
    root.mkdir(parents=True, exist_ok=True)
    jobs = [(i, values, cfg, root / f"run_{i:04d}") for i, (values, cfg) in enumerate(sweep.points())]
    workers = parallelism if parallelism is not None else sweep.parallelism
    if workers <= 1 or len(jobs) == 1:
        rows = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    axis_names = [a for a, _ in sweep.axes]
    cols = ["index"] + axis_names + SWEEP_COLUMNS[1:] + ["error"]
    with open(root / "sweep_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_cell(row.get(c, "")) for c in cols])
    return rows


def _cell(x):
    return repr(x) if isinstance(x, float) else str(x)


# --- lab -------------------------------------------------------------------

def run_lab(labcfg, directory=None):
    """Run the configured inequality checks on every resolution; writes one
    CSV per experiment and ``summary.txt``.  Returns the summary dict."""
    root = Path(directory) if directory is not None else resolve_directory(labcfg.directory)
    root.mkdir(parents=True, exist_ok=True)
    ecfg = EllipticConfig(tol=labcfg.elliptic_tol)
    summary = {}
    lgn_rows, green_rows, linf_rows = [], [], []
    for n in labcfg.resolutions:
        grid = Grid(n, n, labcfg.lx, labcfg.ly)
        if "lgn" in labcfg.experiments:
            corpus = lab.default_corpus(grid, labcfg.seed)
            rows = lab.lgn_sweep(corpus, labcfg.ps, labcfg.gammas)
            lgn_rows += [(n, *r) for r in rows]
            for (p, g), c in sorted(lab.empirical_constants(rows).items()):
                summary[f"lgn_C_n{n}_p{p:g}_gamma{g:g}"] = c
        if "green" in labcfg.experiments:
            fit = lab.green_bound_fit(grid, labcfg.sample_sources, ecfg)
            for (j, i), k_src in zip(fit.sources, fit.per_source_K):
                green_rows.append((n, f"{j}:{i}", k_src))
            summary[f"green_K_hat_n{n}"] = fit.K_hat
            summary[f"green_violations_n{n}"] = fit.violations
            summary[f"green_mass_error_n{n}"] = fit.mass_error
            summary[f"green_symmetry_error_n{n}"] = fit.symmetry_error
        if "linfty" in labcfg.experiments:
            rep = lab.linfty_under_LlnL(grid, labcfg.M, labcfg.sharpness, ecfg, labcfg.base_width)
            linf_rows += [(n, s, w) for s, w in zip(rep.sharpness, rep.sup_w)]
            summary[f"linfty_growth_n{n}"] = rep.growth
            summary[f"linfty_monotone_n{n}"] = rep.monotone

    def dump(name, header, rows):
        with open(root / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_cell(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])

    if lgn_rows:
        dump("lgn.csv", ["resolution", "member_id", "p", "gamma", "ratio"], lgn_rows)
    if green_rows:
        dump("green.csv", ["resolution", "source", "K_hat"], green_rows)
    if linf_rows:
        dump("linfty.csv", ["resolution", "sharpness", "sup_w"], linf_rows)
    (root / "summary.txt").write_text(format_summary(summary))
    return summary
