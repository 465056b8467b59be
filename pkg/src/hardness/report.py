"""Sweep summaries, trend statistics and SVG boxplots."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .models import spearman


def five_number(values) -> dict:
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
    return {
        "min": float(v.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(v.max()),
        "mean": math.fsum(v.tolist()) / v.size,
    }


@dataclass(frozen=True)
class BoxStats:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple


def tukey_box(values) -> BoxStats:
    """Quartiles (linear interpolation) with whiskers at the most extreme
    points within 1.5 IQR of the box; everything beyond is an outlier."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = (float(q) for q in np.quantile(v, [0.25, 0.5, 0.75]))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = tuple(float(x) for x in v[(v < lo_fence) | (v > hi_fence)])
    return BoxStats(q1, med, q3, float(inside.min()), float(inside.max()), outliers)


def _fmt(x):
    return f"{x:.2f}"


def boxplot_svg(title: str, labels, groups, width: int = 640, height: int = 360) -> str:
    """One box per group, drawn left to right in the given order."""
    stats = [tukey_box(g) for g in groups]
    lo = min(min(s.whisker_low, *s.outliers) if s.outliers else s.whisker_low for s in stats)
    hi = max(max(s.whisker_high, *s.outliers) if s.outliers else s.whisker_high for s in stats)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    left, right, top, bottom = 60, 20, 40, 50
    plot_w = width - left - right
    plot_h = height - top - bottom

    def ypos(v):
        return top + plot_h * (hi - v) / (hi - lo)

    slot = plot_w / len(stats)
    box_w = slot * 0.5
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{width / 2:.2f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for t in np.linspace(lo, hi, 5):
        y = ypos(t)
        parts.append(f'<line x1="{left - 4}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" stroke="black"/>')
        parts.append(f'<text x="{left - 6}" y="{_fmt(y + 4)}" text-anchor="end">{t:.3g}</text>')
    for k, (label, s) in enumerate(zip(labels, stats)):
        cx = left + slot * (k + 0.5)
        x0 = cx - box_w / 2
        parts.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(ypos(s.whisker_high))}" x2="{_fmt(cx)}" '
                     f'y2="{_fmt(ypos(s.q3))}" stroke="black"/>')
        parts.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(ypos(s.q1))}" x2="{_fmt(cx)}" '
                     f'y2="{_fmt(ypos(s.whisker_low))}" stroke="black"/>')
        for w in (s.whisker_low, s.whisker_high):
            parts.append(f'<line x1="{_fmt(cx - box_w / 4)}" y1="{_fmt(ypos(w))}" x2="{_fmt(cx + box_w / 4)}" '
                         f'y2="{_fmt(ypos(w))}" stroke="black"/>')
        parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(ypos(s.q3))}" width="{_fmt(box_w)}" '
                     f'height="{_fmt(ypos(s.q1) - ypos(s.q3))}" fill="#9ecae1" stroke="black"/>')
        parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(ypos(s.median))}" x2="{_fmt(x0 + box_w)}" '
                     f'y2="{_fmt(ypos(s.median))}" stroke="#d62728" stroke-width="2"/>')
        for o in s.outliers:
            parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(ypos(o))}" r="2" fill="none" stroke="black"/>')
        parts.append(f'<text x="{_fmt(cx)}" y="{top + plot_h + 16}" text-anchor="middle">{escape(str(label))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass
class SweepEntry:
    name: str
    parameter: float | None
    measures: dict  # measure name -> per-instance values (IH included under "IH")


@dataclass
class SweepReport:
    datasets: list = field(default_factory=list)
    trend: dict = field(default_factory=dict)
    ih_correlation: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"datasets": self.datasets, "trend": self.trend, "ih_correlation": self.ih_correlation}

    def summary_rows(self):
        for d in self.datasets:
            for measure, s in d["summary"].items():
                yield [d["name"], d["parameter"], measure, s["min"], s["q1"], s["median"], s["q3"], s["max"],
                       s["mean"]]


def build_report(entries) -> SweepReport:
    """Summaries per dataset, Spearman(parameter, median) per measure and the
    instance-level Spearman of each measure with IH pooled over the sweep.

    The trend section is empty unless at least two datasets carry a parameter.
    """
    report = SweepReport()
    names = []
    for e in entries:
        for m in e.measures:
            if m not in names:
                names.append(m)
        report.datasets.append({
            "name": e.name,
            "parameter": e.parameter,
            "summary": {m: five_number(v) for m, v in e.measures.items()},
        })
    with_param = [e for e in entries if e.parameter is not None]
    if len(with_param) >= 2:
        params = [e.parameter for e in with_param]
        for m in names:
            if all(m in e.measures for e in with_param):
                meds = [float(np.median(e.measures[m])) for e in with_param]
                report.trend[m] = spearman(params, meds)
    if entries and all("IH" in e.measures for e in entries):
        ih = np.concatenate([e.measures["IH"] for e in entries])
        for m in names:
            if m != "IH" and all(m in e.measures for e in entries):
                pooled = np.concatenate([e.measures[m] for e in entries])
                report.ih_correlation[m] = spearman(pooled, ih)
    return report
