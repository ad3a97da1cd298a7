"""Matplotlib figures for suite tables (Agg backend, files only)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _col(header, rows, name, kind=float):
    i = list(header).index(name)
    return np.array([kind(r[i]) for r in rows])


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_convergence(header, rows, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    names = sorted({r[list(header).index("datum_id")] for r in rows})
    g = _col(header, rows, "grid")
    e = _col(header, rows, "rel_err")
    d = [r[list(header).index("datum_id")] for r in rows]
    for nm in names:
        sel = np.array([x == nm for x in d])
        ax.loglog(g[sel], np.maximum(e[sel], 1e-17), "o-", ms=3, label=nm)
    h = np.array(sorted(set(g)))
    if len(h) and np.max(e) > 1e-10:
        ref = np.max(e) * (h / h[0]) ** -2.0
        ax.loglog(h, ref, "k--", lw=1, label="slope -2")
    ax.set_xlabel("grid points per axis")
    ax.set_ylabel("relative L2 discrepancy")
    ax.legend(fontsize=6, ncol=2)
    return _save(fig, path)


def plot_spectrum(header, rows, path, density=None):
    mu2, nu2 = _col(header, rows, "mu2"), _col(header, rows, "nu2")
    ncols = 2 if density is not None else 1
    fig, axes = plt.subplots(1, ncols, figsize=(4.5 * ncols, 4))
    axes = np.atleast_1d(axes)
    axes[0].plot(mu2, nu2, ".", ms=3)
    axes[0].set_xlabel("mu^2")
    axes[0].set_ylabel("nu^2")
    if density is not None:
        dh, dr = density
        axes[1].plot(_col(dh, dr, "radius"), _col(dh, dr, "N_over_r2"), "o-")
        axes[1].set_xlabel("r")
        axes[1].set_ylabel("N(r)/r^2")
    return _save(fig, path)


def plot_cam_fan(header, rows, path):
    w = _col(header, rows, "omega")
    t = _col(header, rows, "theta")
    v = _col(header, rows, "absF_times_omega")
    fig, ax = plt.subplots(figsize=(5, 4))
    for th in np.unique(t):
        sel = t == th
        ax.semilogx(w[sel], v[sel], lw=1, label=f"theta={th:.2f}")
    ax.set_xlabel("omega")
    ax.set_ylabel("|F(iy,iy')| omega")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_recovery(header, rows, path):
    mu2, nu2, M = _col(header, rows, "mu2"), _col(header, rows, "nu2"), _col(header, rows, "M")
    fig, ax = plt.subplots(figsize=(5, 4))
    k = np.sqrt(mu2 + nu2)
    ax.plot(k, -M, ".", ms=4)
    ax.set_xlabel("sqrt(mu^2 + nu^2)")
    ax.set_ylabel("-M")
    return _save(fig, path)


def plot_bars(header, rows, path, label_col=0, value_cols=None):
    labels = [str(r[label_col]) for r in rows]
    value_cols = value_cols or [i for i in range(len(header)) if i != label_col]
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.arange(len(rows))
    wd = 0.8 / max(1, len(value_cols))
    for j, c in enumerate(value_cols):
        vals = np.array([float(r[c]) for r in rows])
        vals = np.where(np.isfinite(vals), np.maximum(np.abs(vals), 1e-17), np.nan)
        ax.bar(x + j * wd, vals, wd, label=header[c])
    ax.set_yscale("log")
    ax.set_xticks(x + 0.4 - wd / 2)
    ax.set_xticklabels(labels, rotation=20, fontsize=7, ha="right")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_series(header, rows, path, logy=True):
    x = _col(header, rows, header[0])
    y = _col(header, rows, header[1])
    fig, ax = plt.subplots(figsize=(5, 4))
    (ax.loglog if logy else ax.plot)(x, np.maximum(np.abs(y), 1e-17) if logy else y, "o-")
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])
    return _save(fig, path)


def plot_tables(tables: dict, outdir, prefix: str = "") -> list:
    """Render every known table of a suite report; returns the written paths."""
    outdir = Path(outdir)
    out = []
    for name, (header, rows) in tables.items():
        if not rows:
            continue
        path = outdir / f"{prefix}{name}.png"
        if name == "convergence":
            out.append(plot_convergence(header, rows, path))
        elif name == "spectrum":
            out.append(plot_spectrum(header, rows, path, tables.get("density")))
        elif name == "cam_fan":
            out.append(plot_cam_fan(header, rows, path))
        elif name == "recovery":
            out.append(plot_recovery(header, rows, path))
        elif name == "gauge":
            out.append(plot_bars(header, rows, path))
        elif name in ("alpha", "commutator"):
            out.append(plot_series(header, rows, path))
    return out
