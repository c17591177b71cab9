"""
Regret and trajectory charts.

One figure with two panels: cumulative regret over time (with the 10-90%
band for replicated runs) and the (μ, p) path against x*. Figures are
saved as HTML always and as SVG when a static export engine is available.
"""

from pathlib import Path
from typing import Optional

import numpy as np
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from src.harness.regret import RegretReport
from src.harness.replicate import ReplicationReport
from src.queue_sim.trace import Policy
from src.utils.console import get_logger

logger = get_logger(__name__)

LINE_COLOR = "#10B981"
BAND_COLOR = "rgba(16, 185, 129, 0.15)"
TARGET_COLOR = "#EF4444"
GRID_COLOR = "rgba(55, 65, 81, 0.3)"


def regret_figure(
    times: np.ndarray,
    regret: np.ndarray,
    band_lo: Optional[np.ndarray] = None,
    band_hi: Optional[np.ndarray] = None,
    trajectory: Optional[np.ndarray] = None,
    x_star: Optional[Policy] = None,
    title: str = "",
) -> go.Figure:
    """
    Build the two-panel chart.

    Args:
        times: Time axis
        regret: Cumulative regret (mean for replicated runs)
        band_lo: Lower band edge, drawn together with ``band_hi``
        band_hi: Upper band edge
        trajectory: (n, 2) array of (μ, p) iterates
        x_star: Optimal policy, marked on the trajectory panel
        title: Figure title
    """
    fig = make_subplots(rows=1, cols=2, subplot_titles=("Cumulative regret", "Policy trajectory"))

    if band_lo is not None and band_hi is not None:
        fig.add_trace(go.Scatter(
            x=np.concatenate([times, times[::-1]]),
            y=np.concatenate([band_hi, band_lo[::-1]]),
            fill="toself",
            fillcolor=BAND_COLOR,
            line=dict(width=0),
            name="10-90% band",
            hoverinfo="skip",
        ), row=1, col=1)
    fig.add_trace(go.Scatter(
        x=times, y=regret, mode="lines", line=dict(color=LINE_COLOR, width=2), name="regret",
    ), row=1, col=1)

    if trajectory is not None:
        fig.add_trace(go.Scatter(
            x=trajectory[:, 0], y=trajectory[:, 1], mode="lines+markers",
            marker=dict(size=3), line=dict(color=LINE_COLOR, width=1), name="(μ, p)",
        ), row=1, col=2)
    if x_star is not None:
        fig.add_trace(go.Scatter(
            x=[x_star.mu], y=[x_star.p], mode="markers",
            marker=dict(color=TARGET_COLOR, size=10, symbol="x"), name="x*",
        ), row=1, col=2)

    fig.update_xaxes(title_text="time", gridcolor=GRID_COLOR, row=1, col=1)
    fig.update_yaxes(title_text="R(t)", gridcolor=GRID_COLOR, row=1, col=1)
    fig.update_xaxes(title_text="μ", gridcolor=GRID_COLOR, row=1, col=2)
    fig.update_yaxes(title_text="p", gridcolor=GRID_COLOR, row=1, col=2)
    fig.update_layout(
        title=dict(text=title, x=0.5),
        height=420,
        width=1000,
        margin=dict(l=40, r=20, t=60, b=40),
        font=dict(family="IBM Plex Mono, monospace", size=11),
        showlegend=True,
    )
    return fig


def replication_figure(report: ReplicationReport, title: str = "") -> go.Figure:
    return regret_figure(
        report.times, report.cumulative, report.band_lo, report.band_hi,
        trajectory=report.mean_trajectory(), x_star=report.optimum.policy, title=title,
    )


def run_figure(report: RegretReport, trajectory: Optional[np.ndarray], x_star: Policy, title: str = "") -> go.Figure:
    return regret_figure(report.times, report.cumulative, trajectory=trajectory, x_star=x_star, title=title)


def save_figure(fig: go.Figure, directory: Path, stem: str = "regret") -> Path:
    """
    Write ``<stem>.html`` and, if static export works, ``<stem>.svg``.

    Returns:
        Path of the SVG, or of the HTML file when static export failed
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    html_path = directory / f"{stem}.html"
    fig.write_html(str(html_path), include_plotlyjs="cdn")
    svg_path = directory / f"{stem}.svg"
    try:
        fig.write_image(str(svg_path), format="svg")
    except Exception as e:
        logger.warning(f"Static export unavailable ({type(e).__name__}: {e}); kept {html_path.name}")
        return html_path
    return svg_path
