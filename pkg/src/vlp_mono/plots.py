"""Plot-ready exports of simulation results: CSV data plus bare SVG renderings."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .io import CDF_COLUMNS, CDF_FILE, RESULTS_COLUMNS, RESULTS_FILE, fmt, read_table

KINDS = ("scatter3d", "scatter2d_xy", "scatter2d_yz", "cdf")
_AXES = {"scatter3d": ("x", "y", "z"), "scatter2d_xy": ("x", "y"), "scatter2d_yz": ("y", "z")}


@dataclass
class PlotSeries:
    kind: str
    truth: list[tuple[float, ...]] = field(default_factory=list)
    calculated: list[tuple[float, ...]] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}")
        if self.kind != "cdf" and len(self.truth) != len(self.calculated):
            raise ValueError("truth and calculated series must have equal length")


def load_plot_series(results_dir: Path) -> dict[str, PlotSeries]:
    """Build all four series from the tables in ``results_dir``.

    Raises ``FileNotFoundError`` or ``ValueError`` when tables are missing or
    malformed.
    """
    rows = read_table(results_dir / RESULTS_FILE, RESULTS_COLUMNS)
    truth, calc = [], []
    for row in rows:
        if row["status"] != "ok":
            continue
        truth.append(tuple(float(row[c]) for c in ("gx", "gy", "gz")))
        calc.append(tuple(float(row[c]) for c in ("est_x", "est_y", "est_z")))
    cdf_rows = read_table(results_dir / CDF_FILE, CDF_COLUMNS)
    cdf = [(float(r["error"]), float(r["probability"])) for r in cdf_rows]
    if not truth or not cdf:
        raise ValueError(f"{results_dir}: no successful trials to plot")
    return {
        "scatter3d": PlotSeries("scatter3d", truth, calc),
        "scatter2d_xy": PlotSeries("scatter2d_xy", [t[:2] for t in truth], [c[:2] for c in calc]),
        "scatter2d_yz": PlotSeries("scatter2d_yz", [t[1:] for t in truth], [c[1:] for c in calc]),
        "cdf": PlotSeries("cdf", calculated=cdf),
    }


def write_plot_data(series: PlotSeries, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if series.kind == "cdf":
            w.writerow(["error", "probability"])
            w.writerows([fmt(v), fmt(p)] for v, p in series.calculated)
            return
        axes = _AXES[series.kind]
        w.writerow([f"truth_{a}" for a in axes] + [f"calc_{a}" for a in axes])
        for t, c in zip(series.truth, series.calculated):
            w.writerow([fmt(v) for v in (*t, *c)])


class _Canvas:
    """Maps data coordinates into a fixed-size SVG viewport."""

    W, H, PAD = 480, 400, 50

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        self.x0, self.x1 = _span(xs)
        self.y0, self.y1 = _span(ys)
        self.parts: list[str] = []

    def sx(self, x: float) -> float:
        return self.PAD + (x - self.x0) / (self.x1 - self.x0) * (self.W - 2 * self.PAD)

    def sy(self, y: float) -> float:
        return self.H - self.PAD - (y - self.y0) / (self.y1 - self.y0) * (self.H - 2 * self.PAD)

    def frame(self, title: str, xlabel: str, ylabel: str) -> None:
        p, w, h = self.PAD, self.W, self.H
        self.parts.append(f'<rect x="{p}" y="{p}" width="{w - 2 * p}" height="{h - 2 * p}" fill="none" stroke="black"/>')
        self.text(w / 2, p / 2, title, size=14)
        self.text(w / 2, h - 12, xlabel)
        self.parts.append(f'<text x="14" y="{h / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {h / 2})">{escape(ylabel)}</text>')
        for frac in (0.0, 0.5, 1.0):
            xv = self.x0 + frac * (self.x1 - self.x0)
            yv = self.y0 + frac * (self.y1 - self.y0)
            self.text(self.sx(xv), h - p + 16, f"{xv:.3g}", size=10)
            self.text(p - 18, self.sy(yv) + 4, f"{yv:.3g}", size=10)

    def text(self, x: float, y: float, s: str, size: int = 12) -> None:
        self.parts.append(f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="middle">{escape(s)}</text>')

    def svg(self) -> str:
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.W}" height="{self.H}" '
            f'viewBox="0 0 {self.W} {self.H}">\n{body}\n</svg>\n'
        )


def _span(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if math.isclose(lo, hi, abs_tol=1e-12):
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _oblique(p: Sequence[float]) -> tuple[float, float]:
    # cabinet projection; good enough to show the z=2 sheet under the ceiling
    return p[0] + 0.5 * p[1] * math.cos(math.radians(30)), p[2] + 0.5 * p[1] * math.sin(math.radians(30))


def render_svg(series: PlotSeries) -> str:
    if series.kind == "cdf":
        pts = series.calculated
        c = _Canvas([v for v, _ in pts] + [0.0], [0.0, 1.0])
        c.frame("CDF of per-point RMSE", "RMSE (m)", "probability")
        path, prev = [f"M {c.sx(0.0):.2f} {c.sy(0.0):.2f}"], 0.0
        for v, p in pts:
            path.append(f"L {c.sx(v):.2f} {c.sy(prev):.2f} L {c.sx(v):.2f} {c.sy(p):.2f}")
            prev = p
        c.parts.append(f'<path d="{" ".join(path)}" fill="none" stroke="navy"/>')
        return c.svg()

    if series.kind == "scatter3d":
        truth = [_oblique(p) for p in series.truth]
        calc = [_oblique(p) for p in series.calculated]
        labels = ("x + y/2 (oblique)", "z + y/2 (oblique)")
    else:
        truth, calc = series.truth, series.calculated
        labels = tuple(f"{a} (m)" for a in _AXES[series.kind])
    c = _Canvas([p[0] for p in truth + calc], [p[1] for p in truth + calc])
    c.frame(f"Known vs calculated points ({series.kind})", *labels)
    for x, y in truth:
        c.parts.append(f'<circle cx="{c.sx(x):.2f}" cy="{c.sy(y):.2f}" r="4" fill="none" stroke="black"/>')
    for x, y in calc:
        c.parts.append(f'<circle cx="{c.sx(x):.2f}" cy="{c.sy(y):.2f}" r="1.5" fill="red"/>')
    return c.svg()


def export_plots(results_dir: Path, out_dir: Path | None = None) -> list[Path]:
    """Write ``plot_<kind>.csv`` and ``plot_<kind>.svg`` for every kind."""
    results_dir = Path(results_dir)
    out_dir = Path(out_dir) if out_dir is not None else results_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for kind, series in load_plot_series(results_dir).items():
        data_path = out_dir / f"plot_{kind}.csv"
        write_plot_data(series, data_path)
        svg_path = out_dir / f"plot_{kind}.svg"
        svg_path.write_text(render_svg(series))
        written += [data_path, svg_path]
    return written
