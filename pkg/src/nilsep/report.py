"""CSV / JSON / gnuplot output for growth measurements.

Output is a pure function of the inputs: fixed column order, sorted JSON
keys, ``\\n`` line endings and fixed float formatting.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

from .growth import FitReport, GrowthSample

CSV_COLUMNS = ("n", "value", "witness_count", "restricted")


def _fit_dict(f: FitReport) -> dict:
    d = asdict(f)
    for key in ("exponent", "constant", "residual"):
        d[key] = float(f"{d[key]:.12g}")
    d["n_range"] = list(f.n_range)
    return d


def write_csv(samples: list[GrowthSample], path: Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in samples:
            w.writerow([s.n, s.value, s.witness_count, s.restricted])


def gnuplot_script(csv_name: str, fits: list[FitReport], title: str) -> str:
    lines = [
        "set datafile separator ','",
        "set key left top",
        "set logscale xy",
        "set xlabel 'n'",
        "set ylabel 'value'",
        f"set title '{title}'",
        "set terminal pngcairo size 800,600",
        f"set output '{Path(csv_name).stem}.png'",
    ]
    plots = [f"'{csv_name}' using 1:2 skip 1 with linespoints title 'measured'"]
    for i, f in enumerate(fits):
        x = "x" if f.model == "power" else "log(x)"
        lines.append(f"f{i}(x) = {f.constant:.12g} * {x}**{f.exponent:.12g}")
        plots.append(f"f{i}(x) title '{f.model} e={f.exponent:.3f}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def emit_report(samples: list[GrowthSample], fits: list[FitReport], path, stem: str = "report",
                meta: dict | None = None, gnuplot: bool = True) -> list[Path]:
    """Write ``stem.csv``, ``stem.json`` and (optionally) ``stem.gp`` under ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    write_csv(samples, csv_path)
    summary = {
        "meta": meta or {},
        "samples": len(samples),
        "max_value": max((s.value for s in samples), default=None),
        "fits": [_fit_dict(f) for f in fits],
    }
    json_path = out / f"{stem}.json"
    json_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    paths = [csv_path, json_path]
    if gnuplot:
        gp_path = out / f"{stem}.gp"
        title = str((meta or {}).get("title", stem))
        gp_path.write_text(gnuplot_script(csv_path.name, fits, title))
        paths.append(gp_path)
    return paths
