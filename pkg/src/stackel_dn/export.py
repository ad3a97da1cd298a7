"""Deterministic CSV/JSON writers for spectra, radial tables and suite reports."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SPECTRUM_HEADER = ("m", "mu2", "nu2", "multiplicity", "residual_v", "residual_w")
WT_HEADER = ("re_mu", "im_mu", "re_nu", "im_nu", "re_Delta", "im_Delta", "re_M", "im_M",
             "re_N", "im_N", "is_pole")


def fmt(v) -> str:
    """Fixed formatting so that repeated runs write byte-identical files."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return f"{v:.12e}" if np.isfinite(v) else str(v).lower()
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_json(path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def spectrum_rows(pairs):
    return [(m, p.mu2, p.nu2, p.multiplicity, p.residual_v, p.residual_w)
            for m, p in enumerate(pairs)]


def export_spectrum(pairs, path) -> Path:
    return write_csv(path, SPECTRUM_HEADER, spectrum_rows(pairs))


def wt_rows(mu, nu, table):
    out = []
    for m, n, w in zip(mu, nu, table):
        out.append((m.real, m.imag, n.real, n.imag, w.Delta.real, w.Delta.imag,
                    w.M.real, w.M.imag, w.N.real, w.N.imag, w.is_pole))
    return out


def export_wt(mu, nu, table, path) -> Path:
    return write_csv(path, WT_HEADER, wt_rows(mu, nu, table))
