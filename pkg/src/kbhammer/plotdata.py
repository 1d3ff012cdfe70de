"""Plot-ready data derived from a campaign directory (no rendering)."""

import csv
import json
from pathlib import Path

import numpy as np

from .campaign import ESTIMATORS, RunRow, _write_csv, summarize, SUMMARY_HEADER
from .datagen import INPUT_RANGE
from .errors import DatasetError
from .nonlinearity import apply_nonlinearity, polynomial_basis

GRID_POINTS = 200


def load_rows(campaign_dir):
    path = Path(campaign_dir) / "runs.csv"
    if not path.is_file():
        raise DatasetError(f"{path}: campaign results not found")
    rows = []
    with path.open(newline="") as fh:
        for rec in csv.DictReader(fh):
            opt = lambda s: float(s) if s else None
            rows.append(RunRow(int(rec["experiment"]), int(rec["nu"]), float(rec["snr"]),
                               int(rec["run"]), int(rec["seed"]), rec["estimator"],
                               opt(rec["fit_g"]), opt(rec["fit_f"]), int(rec["iterations"]),
                               rec["status"]))
    return rows


def overlay_tables(payload, grid_points: int = GRID_POINTS):
    """Impulse-response and nonlinearity overlays for one run.

    Returns (g_header, g_rows, f_header, f_rows); f is evaluated on
    ``grid_points`` uniform points of the input interval.
    """
    names = [n for n in ESTIMATORS if n in payload["estimates"]]
    g_true = np.asarray(payload["g"])
    c_true = np.asarray(payload["c"])
    basis = polynomial_basis(c_true.size)
    g_cols = [g_true] + [np.asarray(payload["estimates"][n]["g"]) for n in names]
    g_rows = [(k + 1, *(float(col[k]) for col in g_cols)) for k in range(g_true.size)]
    grid = np.linspace(-INPUT_RANGE, INPUT_RANGE, grid_points)
    f_cols = [apply_nonlinearity(basis, c_true, grid)] + [
        apply_nonlinearity(basis, payload["estimates"][n]["c"], grid) for n in names]
    f_rows = [(float(x), *(float(col[i]) for col in f_cols)) for i, x in enumerate(grid)]
    return (["k", "g_true", *[f"g_{n}" for n in names]], g_rows,
            ["u", "f_true", *[f"f_{n}" for n in names]], f_rows)


def emit_plotdata(campaign_dir, out_dir=None, runs=None):
    """Write boxplot.csv and overlay CSVs; returns the list of written paths.

    ``runs`` selects run indices for overlays (default: run 0 of each
    experiment that has one).
    """
    campaign_dir = Path(campaign_dir)
    out = Path(out_dir) if out_dir else campaign_dir / "plotdata"
    rows = load_rows(campaign_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "boxplot.csv"]
    _write_csv(written[0], SUMMARY_HEADER,
               [(e, nu, float(snr), est, m, *rest) for e, nu, snr, est, m, *rest in summarize(rows)])
    runs = [0] if runs is None else list(runs)
    for exp in sorted({r.experiment for r in rows}):
        for run in runs:
            est_path = campaign_dir / "estimates" / f"exp{exp}_run{run:03d}.json"
            if not est_path.is_file():
                if any(r.experiment == exp and r.run == run for r in rows):
                    raise DatasetError(f"{est_path}: estimate file missing")
                continue
            g_head, g_rows, f_head, f_rows = overlay_tables(json.loads(est_path.read_text()))
            for kind, head, body in (("g", g_head, g_rows), ("f", f_head, f_rows)):
                path = out / f"overlay_{kind}_exp{exp}_run{run:03d}.csv"
                _write_csv(path, head, body)
                written.append(path)
    return written
