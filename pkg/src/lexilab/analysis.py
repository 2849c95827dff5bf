"""Learning-curve analysis and report exports.

Turns per-checkpoint accuracy records into fitted learning curves (degree-5
least squares over log10 of the step), tie-corrected Spearman correlations
between the averaged lexical trajectories and each syntactic phenomenon,
and per-checkpoint surprisal-delta curves.  Everything exports as CSV;
line plots are optional hand-rolled SVG so that re-exports are
byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .evaluation import EvalRecord

LEXICAL_PROTOCOLS = ("lexdec", "surprisal", "anti")


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=np.float64)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Tie-corrected Spearman rho: Pearson correlation of average ranks.
    Returns None when either list has zero rank variance."""
    if len(xs) != len(ys):
        raise ValueError("inputs must have equal length")
    if len(xs) < 3:
        raise ValueError("need at least 3 observations")
    rx = average_ranks(xs)
    ry = average_ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    vx = float(rx @ rx)
    vy = float(ry @ ry)
    if vx == 0.0 or vy == 0.0:
        return None
    return float((rx @ ry) / np.sqrt(vx * vy))


def polyfit_logx(
    points: Sequence[tuple[float, float]], degree: int = 5
) -> tuple[np.ndarray, float]:
    """Least-squares polynomial over x' = log10(x), solved via the normal
    equations with unit-norm column scaling.  Returns (coefficients
    ascending by power, sum of squared residuals)."""
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    if np.any(xs <= 0):
        raise ValueError("x values must be positive (log10 axis)")
    if len(np.unique(xs)) < degree + 1:
        raise ValueError(f"need at least {degree + 1} points with distinct x")
    t = np.log10(xs)
    V = np.vander(t, degree + 1, increasing=True)
    scale = np.linalg.norm(V, axis=0)
    scale[scale == 0] = 1.0
    Vs = V / scale
    gram = Vs.T @ Vs
    rhs = Vs.T @ ys
    coeffs = np.linalg.solve(gram, rhs) / scale
    residual = float(np.sum((V @ coeffs - ys) ** 2))
    return coeffs, residual


def polyfit_quintic(points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, float]:
    """Degree-5 fit over log10(x); see :func:`polyfit_logx`."""
    return polyfit_logx(points, degree=5)


def evaluate_fit(coeffs: np.ndarray, xs: Sequence[float]) -> np.ndarray:
    t = np.log10(np.asarray(xs, dtype=np.float64))
    return np.polyval(coeffs[::-1], t)


@dataclass
class LearningCurve:
    label: str
    points: list[tuple[int, float]]  # (step, value) sorted by step
    coeffs: np.ndarray | None = None
    residual: float | None = None
    x_values: list[float] = field(default_factory=list)  # fit axis (step or index)

    @property
    def steps(self) -> list[int]:
        return [s for s, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    def fitted(self) -> np.ndarray | None:
        if self.coeffs is None:
            return None
        return evaluate_fit(self.coeffs, self.x_values)


def fit_curve(
    label: str, points: Sequence[tuple[int, float]], x_mode: str = "log-step"
) -> LearningCurve:
    """Build a curve and fit the quintic when enough distinct points exist.
    ``x_mode``: 'log-step' fits over log10(step); 'index' fits over log10 of
    the 1-based checkpoint index."""
    pts = sorted(points)
    if x_mode == "log-step":
        xs = [float(s) for s, _ in pts]
    elif x_mode == "index":
        xs = [float(i + 1) for i in range(len(pts))]
    else:
        raise ValueError(f"unknown x_mode {x_mode!r}")
    curve = LearningCurve(label=label, points=list(pts), x_values=xs)
    paired = list(zip(xs, (v for _, v in pts)))
    try:
        curve.coeffs, curve.residual = polyfit_quintic(paired)
    except ValueError:
        pass  # fewer than 6 distinct x: keep raw points only
    return curve


def delta_curve(grouped: Mapping[int, Iterable]) -> list[tuple[int, float]]:
    """Per-checkpoint mean of (non-word surprisal - word surprisal).
    Values may be floats or objects with a ``delta`` attribute."""
    out = []
    for step in sorted(grouped):
        deltas = [
            float(getattr(item, "delta", item)) for item in grouped[step]
        ]
        if not deltas:
            raise ValueError(f"checkpoint {step} has no probe results")
        out.append((step, float(np.mean(deltas))))
    return out


def lexical_average_series(
    records: Sequence[EvalRecord], band: str
) -> list[tuple[int, float]]:
    """Accuracy averaged over the three lexical protocols, per checkpoint."""
    by_step: dict[int, list[float]] = {}
    for r in records:
        if r.protocol in LEXICAL_PROTOCOLS and r.band_or_phenomenon == band:
            by_step.setdefault(r.step, []).append(r.accuracy)
    return [
        (step, float(np.mean(vals)))
        for step, vals in sorted(by_step.items())
        if len(vals) == len(LEXICAL_PROTOCOLS)
    ]


def correlation_table(
    lexical_records: Sequence[EvalRecord],
    blimp_records: Sequence[EvalRecord],
    bands: Sequence[str] = ("high", "low"),
) -> list[tuple[str, str, float | None]]:
    """Spearman correlation between the averaged lexical accuracy series and
    each syntactic phenomenon's series, per frequency band."""
    rows: list[tuple[str, str, float | None]] = []
    phenomena = sorted({r.band_or_phenomenon for r in blimp_records})
    for phenomenon in phenomena:
        phen_by_step = {
            r.step: r.accuracy
            for r in blimp_records
            if r.band_or_phenomenon == phenomenon
        }
        for band in bands:
            lex = lexical_average_series(lexical_records, band)
            steps = [s for s, _ in lex if s in phen_by_step]
            if len(steps) < 3:
                continue
            xs = [dict(lex)[s] for s in steps]
            ys = [phen_by_step[s] for s in steps]
            rows.append((phenomenon, band, spearman(xs, ys)))
    return rows


def export_curves_csv(path: str | Path, curves: Sequence[LearningCurve]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "step", "value", "fitted"])
        for curve in curves:
            fitted = curve.fitted()
            for i, (step, value) in enumerate(curve.points):
                fit_str = f"{fitted[i]:.6f}" if fitted is not None else "NA"
                writer.writerow([curve.label, step, f"{value:.6f}", fit_str])


def export_correlations_csv(
    path: str | Path, rows: Sequence[tuple[str, str, float | None]]
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phenomenon", "band", "spearman_rho"])
        for phenomenon, band, rho in rows:
            writer.writerow([phenomenon, band, "NA" if rho is None else f"{rho:.6f}"])


def export_deltas_csv(path: str | Path, records: Sequence[EvalRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "protocol", "band", "mean_delta"])
        for r in sorted(records, key=lambda r: (r.protocol, r.band_or_phenomenon, r.step)):
            if r.protocol in LEXICAL_PROTOCOLS:
                writer.writerow(
                    [r.step, r.protocol, r.band_or_phenomenon, f"{r.mean_delta:.6f}"]
                )


def render_curves_svg(path: str | Path, curves: Sequence[LearningCurve]) -> None:
    """Deterministic standalone SVG: raw points plus the fitted curve on a
    log10-x axis."""
    width, height, margin = 640, 400, 50
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    all_x = [x for c in curves for x in c.x_values]
    all_y = [v for c in curves for v in c.values]
    if not all_x:
        raise ValueError("nothing to plot")
    lo_x, hi_x = np.log10(min(all_x)), np.log10(max(all_x))
    lo_y, hi_y = min(0.0, min(all_y)), max(1.0, max(all_y))
    span_x = (hi_x - lo_x) or 1.0
    span_y = (hi_y - lo_y) or 1.0

    def px(x: float) -> float:
        return margin + (np.log10(x) - lo_x) / span_x * (width - 2 * margin)

    def py(y: float) -> float:
        return height - margin - (y - lo_y) / span_y * (height - 2 * margin)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
    ]
    for ci, curve in enumerate(curves):
        color = palette[ci % len(palette)]
        fitted = curve.fitted()
        if fitted is not None:
            grid = np.logspace(lo_x, np.log10(max(curve.x_values)), 100)
            ys = evaluate_fit(curve.coeffs, grid)
            pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(grid, ys))
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
            )
        for x, (_, v) in zip(curve.x_values, curve.points):
            parts.append(
                f'<circle cx="{px(x):.2f}" cy="{py(v):.2f}" r="3" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{width - margin + 4}" y="{margin + 14 * ci}" font-size="11" '
            f'fill="{color}">{_xml_escape(curve.label)}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")


def _xml_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def analyze(
    lexical_records: Sequence[EvalRecord],
    blimp_records: Sequence[EvalRecord],
    out_dir: str | Path,
    x_mode: str = "log-step",
    svg: bool = False,
) -> dict[str, Path]:
    """Produce curves.csv, correlations.csv, deltas.csv (and optional SVG)
    from evaluation records."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves: list[LearningCurve] = []
    seen = sorted(
        {
            (r.protocol, r.band_or_phenomenon)
            for r in lexical_records
            if r.protocol in LEXICAL_PROTOCOLS
        }
    )
    for protocol, band in seen:
        points = [
            (r.step, r.accuracy)
            for r in lexical_records
            if r.protocol == protocol and r.band_or_phenomenon == band
        ]
        curves.append(fit_curve(f"{protocol}-{band}", points, x_mode=x_mode))
    for phenomenon in sorted({r.band_or_phenomenon for r in blimp_records}):
        points = [
            (r.step, r.accuracy)
            for r in blimp_records
            if r.band_or_phenomenon == phenomenon
        ]
        curves.append(fit_curve(f"blimp-{phenomenon}", points, x_mode=x_mode))

    outputs: dict[str, Path] = {}
    outputs["curves"] = out_dir / "curves.csv"
    export_curves_csv(outputs["curves"], curves)
    outputs["correlations"] = out_dir / "correlations.csv"
    export_correlations_csv(
        outputs["correlations"], correlation_table(lexical_records, blimp_records)
    )
    outputs["deltas"] = out_dir / "deltas.csv"
    export_deltas_csv(outputs["deltas"], lexical_records)
    if svg and curves:
        outputs["svg"] = out_dir / "curves.svg"
        render_curves_svg(outputs["svg"], curves)
    return outputs
