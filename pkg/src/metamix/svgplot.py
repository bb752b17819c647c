"""Hand-emitted SVG density comparison: the exact mixture posterior, the
frequentist normal approximation, and the moment-matched normal (dashed), with
estimate/interval whiskers along the bottom.

Output is deterministic: fixed viewbox, fixed sampling, fixed number formats.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from . import bayes, freq
from .analysis import AnalysisConfig, AnalysisReport, run_analysis
from .data import Dataset
from .errors import DataError, SpecError
from .numerics import normal_pdf

WIDTH, HEIGHT = 800, 500
PLOT_LEFT, PLOT_RIGHT = 60.0, 770.0
CURVE_TOP, CURVE_BASE = 40.0, 330.0
WHISKER_TOP = 370.0
WHISKER_STEP = 24.0
N_SAMPLES = 257
X_RANGE_SDS = 4.0
HEADROOM = 1.05

CURVE_IDS = ("mixture", "freq-normal", "moment-normal")
METHOD_COLORS = {
    "bayes": "#1f77b4",
    "common": "#d62728",
    "dl": "#ff7f0e",
    "reml": "#2ca02c",
    "hksj": "#9467bd",
}
FREQ_CURVE_PRIORITY = ("reml", "dl", "common", "hksj")

_FMT = "{:.9f}"


def x_to_px(x: float, x0: float, x1: float) -> float:
    return PLOT_LEFT + (x - x0) / (x1 - x0) * (PLOT_RIGHT - PLOT_LEFT)


def density_to_px(d: float, d_max: float) -> float:
    return CURVE_BASE - d / (HEADROOM * d_max) * (CURVE_BASE - CURVE_TOP)


def sample_xs(x0: float, x1: float) -> list[float]:
    step = (x1 - x0) / (N_SAMPLES - 1)
    return [x0 + i * step for i in range(N_SAMPLES)]


def freq_curve_for(report: AnalysisReport, dataset: Dataset) -> tuple[float, float]:
    """(mean, sd) of the red frequentist curve: the first frequentist method in
    priority order, falling back to a common-effect fit when none was run."""
    blocks = {b.method: b for b in report.results}
    for method in FREQ_CURVE_PRIORITY:
        if method in blocks:
            return blocks[method].estimate, blocks[method].se_or_sd
    res = freq.common_effect(dataset, report.config.level)
    return res.mu_hat, res.se_mu


def render_density_svg(report: AnalysisReport, freq_curve: tuple[float, float]) -> str:
    """Render the comparison plot for a report that includes a Bayesian block."""
    mixture = report.mu_mixture
    if mixture is None:
        raise SpecError("density plot requires the bayes method in the analysis")
    mm_mean, mm_sd = bayes.moment_matched_normal(mixture)
    x0 = mm_mean - X_RANGE_SDS * mm_sd
    x1 = mm_mean + X_RANGE_SDS * mm_sd
    xs = sample_xs(x0, x1)
    f_mean, f_sd = freq_curve

    curves = {
        "mixture": [bayes.mixture_density(mixture, x) for x in xs],
        "freq-normal": [normal_pdf((x - f_mean) / f_sd) / f_sd for x in xs],
        "moment-normal": [normal_pdf((x - mm_mean) / mm_sd) / mm_sd for x in xs],
    }
    d_max = max(max(vals) for vals in curves.values())

    def path(values: list[float]) -> str:
        pts = []
        for x, d in zip(xs, values):
            px = _FMT.format(x_to_px(x, x0, x1))
            py = _FMT.format(density_to_px(d, d_max))
            pts.append(f"{px},{py}")
        return "M" + " L".join(pts)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<line x1="{PLOT_LEFT}" y1="{CURVE_BASE}" x2="{PLOT_RIGHT}" y2="{CURVE_BASE}" '
        'stroke="#000000" stroke-width="1"/>',
    ]
    for i in range(5):
        x = x0 + i * (x1 - x0) / 4.0
        px = _FMT.format(x_to_px(x, x0, x1))
        lines.append(f'<line x1="{px}" y1="{CURVE_BASE}" x2="{px}" y2="{CURVE_BASE + 5}" '
                     'stroke="#000000" stroke-width="1"/>')
        lines.append(f'<text x="{px}" y="{CURVE_BASE + 18}" text-anchor="middle" '
                     f'font-size="11" font-family="sans-serif">{x:.2f}</text>')

    styles = {
        "mixture": ('stroke="#1f77b4" stroke-width="2" fill="none"', ""),
        "freq-normal": ('stroke="#d62728" stroke-width="2" fill="none"', ""),
        "moment-normal": ('stroke="#555555" stroke-width="2" fill="none"',
                          ' stroke-dasharray="6,4"'),
    }
    for cid in CURVE_IDS:
        style, dash = styles[cid]
        lines.append(f'<path id="{cid}" {style}{dash} d="{path(curves[cid])}"/>')

    legend_y = CURVE_TOP
    for cid, label in (("mixture", "posterior (normal mixture)"),
                       ("freq-normal", "frequentist normal approximation"),
                       ("moment-normal", "moment-matched normal")):
        color = styles[cid][0].split('"')[1]
        dash = ' stroke-dasharray="6,4"' if cid == "moment-normal" else ""
        lines.append(f'<line x1="{PLOT_RIGHT - 250}" y1="{legend_y}" x2="{PLOT_RIGHT - 220}" '
                     f'y2="{legend_y}" stroke="{color}" stroke-width="2"{dash}/>')
        lines.append(f'<text x="{PLOT_RIGHT - 212}" y="{legend_y + 4}" font-size="12" '
                     f'font-family="sans-serif">{label}</text>')
        legend_y += 18.0

    y = WHISKER_TOP
    for block in report.results:
        color = METHOD_COLORS[block.method]
        lo_px = _FMT.format(x_to_px(block.interval.lo, x0, x1))
        hi_px = _FMT.format(x_to_px(block.interval.hi, x0, x1))
        est_px = _FMT.format(x_to_px(block.estimate, x0, x1))
        lines.append(f'<line x1="{lo_px}" y1="{y}" x2="{hi_px}" y2="{y}" '
                     f'stroke="{color}" stroke-width="2"/>')
        for end_px in (lo_px, hi_px):
            lines.append(f'<line x1="{end_px}" y1="{y - 5}" x2="{end_px}" y2="{y + 5}" '
                         f'stroke="{color}" stroke-width="2"/>')
        lines.append(f'<circle cx="{est_px}" cy="{y}" r="3.5" fill="{color}"/>')
        lines.append(f'<text x="{PLOT_LEFT - 52}" y="{y + 4}" font-size="12" '
                     f'font-family="sans-serif">{block.method}</text>')
        y += WHISKER_STEP
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def plot_density_comparison(dataset: Dataset, config: AnalysisConfig,
                            out_path: str | Path,
                            report: Optional[AnalysisReport] = None) -> None:
    """Run the analysis (unless a report is supplied) and write the SVG."""
    if "bayes" not in config.methods:
        raise SpecError("density plot requires the bayes method in the analysis")
    if report is None:
        report = run_analysis(dataset, config)
    svg = render_density_svg(report, freq_curve_for(report, dataset))
    try:
        Path(out_path).write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write plot to {out_path}: {exc.strerror or exc}") from exc
