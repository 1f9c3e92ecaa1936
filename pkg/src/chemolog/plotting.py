"""Static figures for a finished run directory."""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .grid import read_field  # noqa: E402


def read_timeseries(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path} has no records")
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}


def emit_plots(run_dir):
    """Write functionals.png, sup_u.png and final-state heatmaps; returns the paths."""
    run_dir = Path(run_dir)
    csv_path = run_dir / "timeseries.csv"
    if not csv_path.exists():
        raise FileNotFoundError(f"no time series at {csv_path}")
    ts = read_timeseries(csv_path)
    t = ts["t"]
    out = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, col in ts.items():
        if name in ("t", "dt", "sup_u", "sup_v", "sup_grad_v"):
            continue
        ax.plot(t, col, label=name)
    ax.set_xlabel("t")
    ax.set_title("functionals")
    ax.legend(fontsize="small")
    path = run_dir / "functionals.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    out.append(path)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    sup = np.where(np.isfinite(ts["sup_u"]) & (ts["sup_u"] > 0), ts["sup_u"], np.nan)
    ax.semilogy(t, sup, label="sup u")
    ax.semilogy(t, np.where(ts["sup_v"] > 0, ts["sup_v"], np.nan), label="sup v")
    ax.set_xlabel("t")
    ax.legend()
    path = run_dir / "sup_u.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    out.append(path)

    for name in ("u", "v"):
        snap = run_dir / "snapshots" / f"{name}_final.txt"
        if not snap.exists():
            continue
        f, grid, ts_final = read_field(snap)
        fig, ax = plt.subplots(figsize=(5, 4.5))
        im = ax.imshow(np.where(np.isfinite(f), f, np.nan), origin="lower",
                       extent=(0, grid.lx, 0, grid.ly), cmap="viridis")
        fig.colorbar(im, ax=ax)
        ax.set_title(f"{name} at t = {ts_final:.4g}")
        path = run_dir / f"{name}_final.png"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        out.append(path)
    return out
