"""Serialization of scan reports: canonical JSON, CSV and gnuplot grid data."""

from __future__ import annotations

import csv
import io
import json

from . import __version__
from .spectral import SpectrumReport

CSV_COLUMNS = ["mode_k", "mode_l", "mode_m", "delta", "det_re", "det_im", "flagged"]


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def report_payload(report: SpectrumReport, config: dict | None = None) -> dict:
    return {
        "artifact": {"name": "inoue-spectrum", "version": __version__},
        "config": config or {},
        "report": report.to_dict(),
    }


def to_json(report: SpectrumReport, config: dict | None = None) -> str:
    return canonical_json(report_payload(report, config))


def to_csv(report: SpectrumReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.results:
        w.writerow([*r.mode, repr(r.delta), repr(r.det.real), repr(r.det.imag), int(r.flagged)])
    return buf.getvalue()


def plot_data(report: SpectrumReport) -> str:
    """|det| over (orbit index, delta); one block per orbit representative."""
    lines = ["# orbit_index delta abs_det"]
    index = {m: i for i, m in enumerate(report.modes)}
    current = None
    for r in report.results:
        i = index[tuple(r.mode)]
        if current is not None and i != current:
            lines.append("")
        current = i
        lines.append(f"{i} {r.delta!r} {abs(r.det)!r}")
    return "\n".join(lines) + "\n"
