"""Report emission: CSV, versioned JSON and static SVG plots.

CSV and JSON are byte-deterministic: floats are written with ``repr`` and
JSON keys are sorted.  Wall-clock times go to a separate ``timings.json``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..errors import ConfigError, IoError
from .experiments import Record, Report

FORMATS = ("csv", "json", "svg", "all")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _clean(x):
    """JSON has no NaN/inf: write them as null."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.generic):
        return _clean(x.item())
    return x


def to_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(Record.FIELDS)
    for r in records:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r.row()])
    return buf.getvalue()


def table_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0])
    w.writerow(keys)
    for row in rows:
        w.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in keys])
    return buf.getvalue()


# ---------------------------------------------------------------- SVG

def _svg(width, height, body) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n' + "".join(body) + "</svg>\n")


def scatter_svg(zeros, critical, title="", size=480) -> str:
    """Zeros (hollow circles) overlaid with derivative zeros (dots)."""
    z = np.asarray(zeros, np.complex128)
    c = np.asarray(critical, np.complex128)
    allp = np.concatenate([z, c])
    ext = float(max(np.abs(allp.real).max(), np.abs(allp.imag).max(), 1e-12)) * 1.05
    pad = 30
    s = (size - 2 * pad) / (2 * ext)

    def xy(p):
        return pad + (p.real + ext) * s, size - pad - (p.imag + ext) * s

    body = [f'<text x="{pad}" y="18">{title}</text>\n',
            f'<rect x="{pad}" y="{pad}" width="{size - 2 * pad}" height="{size - 2 * pad}" '
            f'fill="none" stroke="#999"/>\n']
    for p in z:
        x, y = xy(p)
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="none" stroke="{PALETTE[0]}"/>\n')
    for p in c:
        x, y = xy(p)
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.5" fill="{PALETTE[1]}"/>\n')
    return _svg(size, size, body)


def curves_svg(aggregates, key="w1_parent", title="", width=520, height=380) -> str:
    """Median of ``key`` against n on log-log axes, one curve per k."""
    pts = [(a["n"], a["k"], a[key]["median"]) for a in aggregates
           if a[key]["median"] is not None and math.isfinite(a[key]["median"]) and a[key]["median"] > 0]
    pad = 50
    body = [f'<text x="{pad}" y="20">{title}</text>\n']
    if pts:
        lx = [math.log10(p[0]) for p in pts]
        ly = [math.log10(p[2]) for p in pts]
        x0, x1 = min(lx), max(lx) + 1e-9
        y0, y1 = min(ly), max(ly) + 1e-9
        if x1 - x0 < 1e-6:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 - y0 < 1e-6:
            y0, y1 = y0 - 0.5, y1 + 0.5

        def xy(n, v):
            return (pad + (math.log10(n) - x0) / (x1 - x0) * (width - 2 * pad),
                    height - pad - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * pad))

        body.append(f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
                    f'height="{height - 2 * pad}" fill="none" stroke="#999"/>\n')
        body.append(f'<text x="{width / 2:.0f}" y="{height - 12}">n (log scale)</text>\n')
        body.append(f'<text x="8" y="{pad - 8}">median {key} (log scale)</text>\n')
        for i, k in enumerate(sorted(set(p[1] for p in pts))):
            curve = sorted((p[0], p[2]) for p in pts if p[1] == k)
            col = PALETTE[i % len(PALETTE)]
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in (xy(n, v) for n, v in curve))
            body.append(f'<polyline points="{path}" fill="none" stroke="{col}" stroke-width="2"/>\n')
            for n, v in curve:
                x, y = xy(n, v)
                body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{col}"/>\n')
            body.append(f'<text x="{width - pad + 5}" y="{pad + 15 * (i + 1)}" fill="{col}">k={k}</text>\n')
    return _svg(width, height, body)


# ---------------------------------------------------------------- emit

def _formats(fmt: str) -> set:
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    return {"csv", "json", "svg"} if fmt == "all" else {fmt}


def write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return path


def emit(report: Report, out_dir, fmt: str = "all", stem: str = "report") -> list[Path]:
    out = Path(out_dir)
    want = _formats(fmt)
    written = []
    if "csv" in want:
        written.append(write_text(out / f"{stem}.csv", records_csv(report.records)))
    if "json" in want:
        written.append(write_text(out / f"{stem}.json", to_json(report.as_dict())))
    if "svg" in want:
        written.append(write_text(out / f"{stem}_w1.svg",
                              curves_svg(report.aggregates, "w1_parent", "W1(M(P^(k)), M(P))")))
        if report.showcase is not None:
            sc = report.showcase
            written.append(write_text(out / f"{stem}_scatter.svg",
                                  scatter_svg(sc["zeros"], sc["critical"],
                                              f"zeros and zeros of P^({sc['k']}), n={sc['n']}")))
    if report.timings:
        written.append(write_text(out / f"{stem}_timings.json", to_json(report.timings)))
    return written


def emit_table(rows: list[dict], out_dir, fmt: str, stem: str, meta: dict | None = None) -> list[Path]:
    """Write a flat table (probe output, coulomb summary, ...) as CSV and/or JSON.

    Tables have no plot; ``svg`` alone writes nothing here.
    """
    out = Path(out_dir)
    want = _formats(fmt)
    written = []
    if "csv" in want:
        written.append(write_text(out / f"{stem}.csv", table_csv(rows)))
    if "json" in want:
        doc = {"schema_version": "derivzeros-table/1", "rows": rows, "meta": meta or {}}
        written.append(write_text(out / f"{stem}.json", to_json(doc)))
    return written
