"""Result tables and their CSV / JSON / gnuplot renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


def fmt(v) -> str:
    """12 significant digits for floats, plain text for everything else."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.12g}"
    return str(v)


def _json_value(v):
    if isinstance(v, float):
        if not math.isfinite(v):
            return None
        return float(f"{v:.12g}")
    return v


@dataclass
class Table:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, **row):
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(row)

    def column(self, name):
        return [r.get(name) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}: {fmt(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": {k: _json_value(v) for k, v in self.metadata.items()},
            "columns": self.columns,
            "rows": [{c: _json_value(r.get(c)) for c in self.columns} for r in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def render(self, format: str) -> str:
        return self.to_json() if format == "json" else self.to_csv()


def gnuplot_script(table: Table, data_path: str, x: str, ys: list[str],
                   logy: bool = False, title: str = "") -> str:
    """A plain gnuplot script plotting ``ys`` against ``x`` from a CSV file."""
    idx = {c: i + 1 for i, c in enumerate(table.columns)}
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{x}'",
        "set grid",
    ]
    if logy:
        lines.append("set logscale y")
    plots = [f"'{data_path}' using {idx[x]}:{idx[y]} with linespoints title '{y}'" for y in ys]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
