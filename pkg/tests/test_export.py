import numpy as np

from stackel_dn.export import (SPECTRUM_HEADER, WT_HEADER, export_spectrum, export_wt, fmt, read_csv,
                               write_json)
from stackel_dn.plotting import plot_tables
from stackel_dn.radial import wt_batch


def test_fmt():
    assert fmt(3) == "3" and fmt(True) == "1" and fmt(0.5) == "5.000000000000e-01"
    assert fmt(float("nan")) == "nan"


def test_spectrum_export_deterministic(f1, tmp_path):
    from stackel_dn.angular import joint_spectrum_shooting

    pairs = joint_spectrum_shooting(f1.angular(), target_count=6)
    a = export_spectrum(pairs, tmp_path / "a.csv").read_bytes()
    b = export_spectrum(pairs, tmp_path / "b.csv").read_bytes()
    assert a == b
    header, rows = read_csv(tmp_path / "a.csv")
    assert tuple(header) == SPECTRUM_HEADER and len(rows) == 6


def test_wt_export(f1, tmp_path):
    mu = np.array([1.0, 2.0, np.pi / np.sqrt(2) * 1j]) + 0j
    nu = np.zeros(3) + 0j
    table = wt_batch(f1.radial_row(), mu**2, nu)
    header, rows = read_csv(export_wt(mu, nu, table, tmp_path / "wt.csv"))
    assert tuple(header) == WT_HEADER and rows[0][-1] == "0"


def test_json_numpy(tmp_path):
    p = write_json(tmp_path / "r.json", {"b": np.float64(1.5), "a": np.arange(2)})
    assert p.read_text().startswith('{\n  "a": [\n')


def test_plots_written(tmp_path):
    tables = {
        "spectrum": (SPECTRUM_HEADER, [(0, 0.0, 0.0, 1, 0.0, 0.0), (1, 1.0, 1.0, 2, 0.0, 0.0)]),
        "density": (("radius", "count", "N_over_r2"), [(1.0, 1, 1.0), (2.0, 3, 0.75)]),
        "convergence": (("grid", "datum_id", "rel_err", "fitted_order"),
                        [(16, "m1", 1e-3, 2.0), (24, "m1", 4.4e-4, 2.0)]),
        "commutator": (("grid", "norm"), [(16, 1e-3), (32, 2.5e-4)]),
    }
    out = plot_tables(tables, tmp_path, prefix="t_")
    assert sorted(p.name for p in out) == ["t_commutator.png", "t_convergence.png",
                                           "t_spectrum.png"]
    assert all(p.read_bytes()[:4] == b"\x89PNG" for p in out)
