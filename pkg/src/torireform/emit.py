"""CSV, SVG and manifest writers. Output bytes depend only on their inputs."""

from __future__ import annotations

import csv
import io
import json
import math
from functools import singledispatch
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .chaos import TWO_PI, SectionPoint
from .sweep import SectionSet, SweepReport, SweepRow
from .system import PhaseState

CANVAS_W, CANVAS_H = 800, 600
MARGIN_X, MARGIN_Y = 70, 60


class EmissionError(OSError):
    pass


def fmt(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


def _write_text(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EmissionError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    _write_text(path, buf.getvalue())


@singledispatch
def emit_csv(obj, path) -> None:
    raise TypeError(f"don't know how to write {type(obj).__name__} as CSV")


@emit_csv.register
def _(report: SweepReport, path) -> None:
    write_csv(path, ["epsilon", "fraction_chaotic", "mean_exponent"],
              [(r.epsilon, r.fraction_chaotic, r.mean_exponent) for r in report.rows])


@emit_csv.register
def _(sections: SectionSet, path) -> None:
    rows = []
    for orbit_index, orbit in enumerate(sections.orbits):
        for n, (t, q, p, u) in enumerate(orbit, start=1):
            rows.append((orbit_index, n, float(t), float(q), float(p), float(u)))
    write_csv(path, ["orbit", "period", "t", "q", "p", "u"], rows)


@emit_csv.register
def _(trajectory: list, path) -> None:
    if trajectory and not isinstance(trajectory[0], PhaseState):
        raise TypeError("list trajectories must hold PhaseState values")
    write_csv(path, ["t", "q", "p"], [(s.t, s.q, s.p) for s in trajectory])


@emit_csv.register
def _(trajectory: np.ndarray, path) -> None:
    arr = np.asarray(trajectory, dtype=float).reshape(-1, 3)
    write_csv(path, ["t", "q", "p"], [tuple(float(x) for x in row) for row in arr])


def emit_jobs_csv(report: SweepReport, path) -> None:
    write_csv(path, ["epsilon", "ic_index", "q0", "p0", "exponent", "label", "renorm_count", "diagnostic"],
              [(j.epsilon, j.ic_index, j.q0, j.p0, j.exponent, j.label.value, j.renorm_count, j.diagnostic)
               for j in report.jobs])


def read_report_csv(path) -> SweepReport:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise EmissionError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows or rows[0] != ["epsilon", "fraction_chaotic", "mean_exponent"]:
        raise ValueError(f"{path}: not a sweep report")
    return SweepReport(rows=[SweepRow(float(e), float(f), float(m)) for e, f, m in rows[1:]])


def _points_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]
    pts = list(points)
    return (np.array([pt.u for pt in pts], dtype=float),
            np.array([pt.p for pt in pts], dtype=float))


def default_bounds(p: np.ndarray) -> tuple[float, float, float, float]:
    if p.size == 0:
        return (0.0, TWO_PI, -1.0, 1.0)
    lo, hi = float(p.min()), float(p.max())
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    return (0.0, TWO_PI, lo - pad, hi + pad)


def render_svg_scatter(points, bounds: Optional[Sequence[float]] = None, title: str = "",
                       allow_empty: bool = False) -> str:
    u, p = _points_arrays(points)
    if u.size == 0 and not allow_empty:
        raise ValueError("no points to plot (pass allow_empty=True to emit an empty frame)")
    x0, x1, y0, y1 = [float(b) for b in (bounds if bounds is not None else default_bounds(p))]
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate bounds {bounds}")
    pw, ph = CANVAS_W - 2 * MARGIN_X, CANVAS_H - 2 * MARGIN_Y
    inside = (u >= x0) & (u <= x1) & (p >= y0) & (p <= y1)
    clipped = int(u.size - np.count_nonzero(inside))
    cx = MARGIN_X + (u[inside] - x0) / (x1 - x0) * pw
    cy = MARGIN_Y + (y1 - p[inside]) / (y1 - y0) * ph

    def esc(s: str) -> str:
        return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" height="{CANVAS_H}" '
        f'viewBox="0 0 {CANVAS_W} {CANVAS_H}">',
        f"<!-- points: {u.size} clipped: {clipped} -->",
        f'<rect x="0" y="0" width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>',
        f'<rect x="{MARGIN_X}" y="{MARGIN_Y}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{CANVAS_W / 2:.1f}" y="{MARGIN_Y / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{esc(title)}</text>',
        f'<text x="{CANVAS_W / 2:.1f}" y="{CANVAS_H - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">u</text>',
        f'<text x="20" y="{CANVAS_H / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14" transform="rotate(-90 20 {CANVAS_H / 2:.1f})">p</text>',
    ]
    for value, x in ((x0, MARGIN_X), (x1, MARGIN_X + pw)):
        out.append(f'<text x="{x}" y="{MARGIN_Y + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{value:.4g}</text>')
    for value, y in ((y0, MARGIN_Y + ph), (y1, MARGIN_Y)):
        out.append(f'<text x="{MARGIN_X - 6}" y="{y + 4}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{value:.4g}</text>')
    out.append('<g fill="#1f3b73" stroke="none">')
    out.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.2"/>' for x, y in zip(cx, cy))
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_scatter(points, path, bounds: Optional[Sequence[float]] = None, title: str = "",
                     allow_empty: bool = False) -> None:
    """Standalone 800x600 scatter of section points in the (u, p) plane."""
    _write_text(path, render_svg_scatter(points, bounds, title, allow_empty))


def section_points(sections: SectionSet) -> list[SectionPoint]:
    arr = sections.stacked()
    return [SectionPoint(float(u), float(p)) for u, p in zip(arr[:, 3], arr[:, 2])]


def emit_manifest(path, config: dict, files: Sequence[str], extra: Optional[dict] = None) -> None:
    data = {"config": config, "seed": config.get("seed"), "files": sorted(files)}
    if extra:
        data.update(extra)
    _write_text(path, json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n")


def eps_label(epsilon: float) -> str:
    if math.isfinite(epsilon) and float(epsilon).is_integer():
        return str(int(epsilon))
    return format(epsilon, "g")
