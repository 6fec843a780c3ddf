"""Turn benchmark CSV into per-(structure, workload) panels of
scheme-vs-threads series, written as PNG and SVG.

The input contract is the harness's CSV column set; the coupling between
the two packages is this file format only.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

REQUIRED_COLUMNS = (
    "scheme", "structure", "workload", "threads", "duration_s",
    "ops_total", "throughput_ops_s", "unreclaimed_avg_per_op",
    "unreclaimed_final", "frees_min_thread", "frees_max_thread",
    "reader_free_fraction", "seed",
)

METRIC_COLUMNS = {
    "throughput": "throughput_ops_s",
    "unreclaimed": "unreclaimed_avg_per_op",
}

METRIC_LABELS = {
    "throughput": "throughput (ops/s, higher is better)",
    "unreclaimed": "unreclaimed nodes per operation (lower is better)",
}


class InputError(ValueError):
    pass


@dataclass
class ChartSpec:
    csv_paths: list
    metric: str = "throughput"
    out_dir: str = "."
    basename: str | None = None  # defaults to the metric name

    def __post_init__(self):
        if self.metric not in METRIC_COLUMNS:
            raise InputError(
                f"unknown metric {self.metric!r}; "
                f"expected one of {sorted(METRIC_COLUMNS)}")


def load_rows(paths):
    """Parse CSV files, enforcing the column contract.

    Returns a list of dict rows with numeric fields converted.
    """
    rows = []
    for path in paths:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise InputError(
                    f"{path}: missing columns {', '.join(missing)}")
            for row in reader:
                rows.append({
                    "scheme": row["scheme"],
                    "structure": row["structure"],
                    "workload": row["workload"],
                    "threads": int(row["threads"]),
                    "throughput_ops_s": float(row["throughput_ops_s"]),
                    "unreclaimed_avg_per_op":
                        float(row["unreclaimed_avg_per_op"]),
                })
    if not rows:
        raise InputError("empty input")
    return rows


def build_panels(rows, metric):
    """Group rows into {(structure, workload): {scheme: [(threads, y)]}}.

    Repeated (scheme, threads) measurements within a panel are averaged;
    series points are sorted by ascending thread count.
    """
    column = METRIC_COLUMNS[metric]
    acc = {}
    for row in rows:
        panel = acc.setdefault((row["structure"], row["workload"]), {})
        series = panel.setdefault(row["scheme"], {})
        series.setdefault(row["threads"], []).append(row[column])
    panels = {}
    for key, schemes in sorted(acc.items()):
        panels[key] = {
            scheme: [(t, sum(vs) / len(vs)) for t, vs in sorted(pts.items())]
            for scheme, pts in sorted(schemes.items())
        }
    return panels


def render(spec):
    """Write one figure (PNG + SVG) with one panel per (structure,
    workload) pair and one line per scheme; returns the output paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = load_rows(spec.csv_paths)
    panels = build_panels(rows, spec.metric)

    n = len(panels)
    ncols = min(n, 2)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols,
                             figsize=(6 * ncols, 4.5 * nrows),
                             squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax in flat[n:]:
        ax.set_visible(False)

    for ax, ((structure, workload), schemes) in zip(flat, panels.items()):
        for scheme, points in schemes.items():
            xs = [t for t, _ in points]
            ys = [y for _, y in points]
            ax.plot(xs, ys, marker="o", label=scheme)
        ax.set_title(f"{structure} / {workload}")
        ax.set_xlabel("threads")
        ax.set_ylabel(METRIC_LABELS[spec.metric])
        ax.legend()
    fig.tight_layout()

    os.makedirs(spec.out_dir, exist_ok=True)
    base = spec.basename or spec.metric
    outputs = []
    for ext in ("png", "svg"):
        path = os.path.join(spec.out_dir, f"{base}.{ext}")
        fig.savefig(path)
        outputs.append(path)
    plt.close(fig)
    return outputs
