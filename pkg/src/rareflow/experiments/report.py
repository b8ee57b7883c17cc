"""Experiment reports: canonical serialization and convergence tables.

Emitted files are a pure function of (config, seed): wall-clock time is
carried on the in-memory report only and never written, so reruns are
byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ExperimentReport", "emit_report", "convergence_table"]

CSV_COLUMNS = ("ladder", "probe", "distance", "stderr", "pass")


@dataclass
class ExperimentReport:
    kind: str
    seed: int
    config: dict
    rows: list
    summary: dict
    coverage: list
    passed: bool
    incomplete: bool = False
    wall_seconds: float = 0.0  # informational only; excluded from files
    version: str = "0.1.0"

    def to_canonical_dict(self) -> dict:
        return {
            "scenario": self.kind,
            "seed": self.seed,
            "config": self.config,
            "rows": self.rows,
            "summary": self.summary,
            "coverage": self.coverage,
            "passed": self.passed,
            "incomplete": self.incomplete,
            "version": self.version,
            "seed_scheme": "replication i draws from spawn key (seed, ..., i)",
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_canonical_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, obj) -> "ExperimentReport":
        if isinstance(obj, (str, Path)):
            with open(obj) as fh:
                obj = json.load(fh)
        return cls(
            kind=obj["scenario"],
            seed=obj["seed"],
            config=obj["config"],
            rows=obj["rows"],
            summary=obj["summary"],
            coverage=obj["coverage"],
            passed=obj["passed"],
            incomplete=obj.get("incomplete", False),
            version=obj.get("version", ""),
        )


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: ExperimentReport, out_dir, formats=("json", "csv")) -> list:
    """Write the report; file names embed scenario kind and master seed.

    Returns the written paths.  Identical (config, seed) re-runs produce
    byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"report_{report.kind}_seed{report.seed}"
    written = []
    for fmt in formats:
        if fmt == "json":
            path = out / f"{stem}.json"
            path.write_text(report.to_json_text())
        elif fmt == "csv":
            path = out / f"{stem}.csv"
            lines = [",".join(CSV_COLUMNS)]
            for row in report.rows:
                lines.append(",".join(_csv_cell(row.get(col, "")) for col in CSV_COLUMNS))
            path.write_text("\n".join(lines) + "\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
        written.append(path)
    return written


def convergence_table(report: ExperimentReport) -> dict:
    """Ladder-by-probe table of distances with monotone-trend flags.

    Requires at least two distinct ladder points; cells show
    distance +/- stderr.
    """
    ladders: list = []
    columns: list = []
    cells: dict = {}
    for row in report.rows:
        lad, probe = row.get("ladder"), row.get("probe")
        if lad is None or probe is None or "distance" not in row:
            continue
        if lad not in ladders:
            ladders.append(lad)
        if probe not in columns:
            columns.append(probe)
        cells[(lad, probe)] = (row["distance"], row.get("stderr", 0.0))
    if len(ladders) < 2:
        raise ValueError("convergence table requires at least two ladder points")
    if not columns:
        raise ValueError("no probe columns present")

    monotone = {}
    for probe in columns:
        series = [cells[(lad, probe)][0] for lad in ladders if (lad, probe) in cells]
        monotone[probe] = all(b < a for a, b in zip(series, series[1:]))

    width = 14
    head = "ladder".ljust(10) + "".join(str(c).rjust(width) for c in columns)
    lines = [head]
    for lad in ladders:
        cols = []
        for probe in columns:
            if (lad, probe) in cells:
                d, se = cells[(lad, probe)]
                cols.append(f"{d:.4f}±{se:.4f}".rjust(width))
            else:
                cols.append("-".rjust(width))
        lines.append(f"{lad:<10g}" + "".join(cols))
    lines.append(
        "monotone↓ ".ljust(10)
        + "".join(("yes" if monotone[c] else "no").rjust(width) for c in columns)
    )
    return {
        "ladder": ladders,
        "columns": columns,
        "cells": {f"{lad}|{probe}": cells[(lad, probe)] for lad, probe in cells},
        "monotone_decreasing": monotone,
        "text": "\n".join(lines),
    }
