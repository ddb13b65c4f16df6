"""Writers for study tables: CSV, JSON and a small self-contained SVG plotter."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from ..errors import ConfigError
from .studies import Table

WIDTH, HEIGHT, MARGIN = 640, 420, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def to_json(table: Table) -> str:
    return json.dumps({"columns": table.columns, "rows": table.rows, "metadata": table.metadata},
                      indent=2, default=float)


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _frame(x_range: tuple[float, float], y_range: tuple[float, float], xlabel: str, ylabel: str) -> list[str]:
    x0, x1 = x_range
    y0, y1 = y_range
    parts = [
        f'<rect x="{MARGIN}" y="{MARGIN // 2}" width="{WIDTH - 1.5 * MARGIN}" '
        f'height="{HEIGHT - 1.5 * MARGIN}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 8}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" transform="rotate(-90 14 {HEIGHT / 2})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
    ]
    for t in _ticks(x0, x1):
        px = _px(t, x0, x1)
        parts.append(f'<text x="{px:.1f}" y="{HEIGHT - MARGIN + 16}" font-size="10" '
                     f'text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        py = _py(t, y0, y1)
        parts.append(f'<text x="{MARGIN - 4}" y="{py + 3:.1f}" font-size="10" text-anchor="end">{t:.4g}</text>')
    return parts


def _px(x: float, lo: float, hi: float) -> float:
    span = hi - lo or 1.0
    return MARGIN + (x - lo) / span * (WIDTH - 1.5 * MARGIN)


def _py(y: float, lo: float, hi: float) -> float:
    span = hi - lo or 1.0
    return HEIGHT - MARGIN - (y - lo) / span * (HEIGHT - 1.5 * MARGIN)


def _wrap(parts: list[str]) -> str:
    body = "\n".join(parts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'font-family="sans-serif" font-size="12">\n{body}\n</svg>\n')


def line_plot(table: Table, logy: bool = False) -> str:
    """First column on x, every other numeric column as a polyline."""
    xs = [float(v) for v in table.column(table.columns[0])]
    series = {c: [float(v) for v in table.column(c)] for c in table.columns[1:]}
    f = (lambda v: math.log10(v)) if logy else (lambda v: v)
    ys = [f(v) for s in series.values() for v in s]
    xr = (min(xs), max(xs))
    yr = (min(ys), max(ys))
    parts = _frame(xr, yr, table.columns[0], ("log10 " if logy else "") + "value")
    for k, (name, vals) in enumerate(series.items()):
        pts = " ".join(f"{_px(x, *xr):.2f},{_py(f(y), *yr):.2f}" for x, y in zip(xs, vals))
        color = COLORS[k % len(COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14 * k}" fill="{color}" '
                     f'text-anchor="end">{escape(name)}</text>')
    return _wrap(parts)


def _color(v: float, lo: float, hi: float) -> str:
    s = 0.0 if hi == lo else (v - lo) / (hi - lo)
    r, g, b = int(255 * s), int(80 + 100 * (1 - abs(2 * s - 1))), int(255 * (1 - s))
    return f"#{r:02x}{g:02x}{b:02x}"


def heat_map(table: Table) -> str:
    """One heat map per scenario over (theta, gamma), stacked vertically."""
    scenarios = list(dict.fromkeys(table.column("scenario")))
    vals = [float(v) for v in table.column("F2")]
    lo, hi = min(vals), max(vals)
    docs = []
    idx = {c: table.columns.index(c) for c in table.columns}
    for name in scenarios:
        rows = [r for r in table.rows if r[idx["scenario"]] == name]
        th = sorted({r[idx["theta"]] for r in rows})
        gm = sorted({r[idx["gamma"]] for r in rows})
        xr, yr = (min(th), max(th)), (min(gm), max(gm))
        cw = (WIDTH - 1.5 * MARGIN) / len(th)
        ch = (HEIGHT - 1.5 * MARGIN) / len(gm)
        parts = _frame(xr, yr, "theta", "gamma")
        for r in rows:
            i, j = th.index(r[idx["theta"]]), gm.index(r[idx["gamma"]])
            x = MARGIN + i * cw
            y = HEIGHT - MARGIN - (j + 1) * ch
            parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw:.2f}" height="{ch:.2f}" '
                         f'fill="{_color(float(r[idx["F2"]]), lo, hi)}"/>')
        mu = rows[0][idx["mu"]]
        parts.append(f'<text x="{WIDTH / 2}" y="16" text-anchor="middle">{escape(name)} mu={mu:g} '
                     f'F2 in [{lo:.3f}, {hi:.3f}]</text>')
        docs.append(_wrap(parts))
    if len(docs) == 1:
        return docs[0]
    # stack the maps into one document
    inner = "\n".join(f'<g transform="translate(0 {HEIGHT * k})">{d[d.index(">") + 1:d.rindex("</svg>")]}</g>'
                      for k, d in enumerate(docs))
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT * len(docs)}" '
            f'font-family="sans-serif" font-size="12">\n{inner}\n</svg>\n')


def to_svg(table: Table) -> str:
    if table.kind == "heatmap":
        return heat_map(table)
    if table.kind == "lines":
        return line_plot(table, logy=table.metadata.get("study") == "threshold")
    raise ConfigError(f"no SVG rendering for {table.metadata.get('study', 'this table')}")


WRITERS = {"csv": to_csv, "json": to_json, "svg": to_svg}


def render(table: Table, fmt: str) -> str:
    return WRITERS[fmt](table)


def write(table: Table, fmt: str, path: str | Path | None) -> str:
    text = render(table, fmt)
    if path is not None:
        Path(path).write_text(text)
    return text
