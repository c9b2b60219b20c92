"""Run-directory output: the round CSV, tidy series and figures."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import InputError  # noqa: E402

REPORT_HEADER = ["round", "method", "proved", "total_theorems", "total_proofs", "new_proofs", "wall_s"]
SERIES_HEADER = ["method", "round", "metric", "value"]
SWEEP_HEADER = ["parameter", "value", "method", "proved", "total_theorems", "proved_pct"]


def report_rows(reports, label=None):
    for r in reports:
        wall = "NA" if r.wall_s is None else f"{r.wall_s:.3f}"
        yield [r.round, label or r.method, r.proved, r.total_theorems, r.total_proofs, r.new_proofs, wall]


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_report(run_dir) -> list[dict]:
    path = Path(run_dir) / "report.csv"
    if not path.is_file():
        raise InputError(f"{run_dir}: no report.csv (not a completed run directory)")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REPORT_HEADER:
            raise InputError(f"{path}: unexpected header {reader.fieldnames}")
        rows = list(reader)
    try:
        for row in rows:
            for key in ("round", "proved", "total_theorems", "total_proofs", "new_proofs"):
                row[key] = int(row[key])
    except (TypeError, ValueError):
        raise InputError(f"{path}: corrupt row") from None
    if (Path(run_dir) / "PARTIAL").exists():
        raise InputError(f"{run_dir}: run did not complete (PARTIAL marker present)")
    return rows


def series(rows) -> dict:
    """``{method: [(round, proved, total_proofs), ...]}`` in round order."""
    out = defaultdict(list)
    for row in rows:
        out[row["method"]].append((row["round"], row["proved"], row["total_proofs"]))
    return {m: sorted(v) for m, v in out.items()}


def plot_progress(by_method, path) -> None:
    fig, (ax_thm, ax_prf) = plt.subplots(1, 2, figsize=(10, 4))
    for method, points in by_method.items():
        rounds = [p[0] for p in points]
        ax_thm.plot(rounds, [p[1] for p in points], marker="o", ms=3, label=method)
        ax_prf.plot(rounds, [p[2] for p in points], marker="o", ms=3, label=method)
    ax_thm.set_xlabel("round")
    ax_thm.set_ylabel("proved theorems")
    ax_prf.set_xlabel("round")
    ax_prf.set_ylabel("distinct proofs")
    ax_thm.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(path_csv, path_png) -> None:
    with open(path_csv, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    by_method = defaultdict(list)
    for row in rows:
        by_method[row["method"]].append((float(row["value"]), float(row["proved_pct"])))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for method, pts in by_method.items():
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
    ax.set_xscale("log", base=2)
    ax.set_xlabel(rows[0]["parameter"] if rows else "value")
    ax.set_ylabel("proved (%)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path_png, dpi=120)
    plt.close(fig)


def make_report(run_dir) -> list[Path]:
    """Write ``series.csv`` and figures next to a run's ``report.csv``."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise InputError(f"{run_dir}: not a directory")
    rows = read_report(run_dir)
    if not rows:
        raise InputError(f"{run_dir}: report.csv has no rows")
    by_method = series(rows)
    out = []
    tidy = []
    for method, points in by_method.items():
        for rnd, proved, proofs in points:
            tidy.append([method, rnd, "proved", proved])
            tidy.append([method, rnd, "total_proofs", proofs])
    write_csv(run_dir / "series.csv", SERIES_HEADER, tidy)
    out.append(run_dir / "series.csv")
    plot_progress(by_method, run_dir / "progress.png")
    out.append(run_dir / "progress.png")
    if (run_dir / "sweep.csv").is_file():
        plot_sweep(run_dir / "sweep.csv", run_dir / "sweep.png")
        out.append(run_dir / "sweep.png")
    return out
