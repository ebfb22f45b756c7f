"""Deterministic matplotlib figures: solution maps and benchmark timing plots.

Figures are rendered to SVG with a pinned hash salt and no date metadata, so
identical inputs produce byte-identical documents.
"""

from __future__ import annotations

import io
import math

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .errors import InputError
from .geometry import NormSpec, Point
from .model import Instance, Solution, evaluate

_HASH_SALT = "hybridcover"

COVERED_STYLE = dict(color="tab:red", marker="o", s=18, zorder=5)
UNCOVERED_STYLE = dict(color="black", marker="o", s=14, zorder=4)
DISCRETE_STYLE = dict(color="tab:green", marker="s", s=70, zorder=6)
CONTINUOUS_STYLE = dict(color="tab:blue", marker="^", s=80, zorder=6)


def ball_outline(center: Point, rho: float, norm: NormSpec, samples: int = 256) -> list[Point]:
    """Polygon tracing the boundary of a planar norm ball.  The sample count
    is divisible by 8 so L1/LInf corners are hit exactly."""
    pts = []
    for s in range(samples):
        theta = 2.0 * math.pi * s / samples
        dx, dy = math.cos(theta), math.sin(theta)
        kind = norm.canonical().kind
        if kind == "L2":
            scale = 1.0
        elif kind == "L1":
            scale = abs(dx) + abs(dy)
        elif kind == "LInf":
            scale = max(abs(dx), abs(dy))
        else:
            scale = (abs(dx) ** norm.tau + abs(dy) ** norm.tau) ** (1.0 / norm.tau)
        r = rho / scale
        pts.append((center[0] + r * dx, center[1] + r * dy))
    return pts


def solution_figure(instance: Instance, solution: Solution | None = None) -> Figure:
    """Demand points (covered vs uncovered), discrete facilities as squares,
    continuous facilities as triangles, each with its coverage region."""
    if instance.dimension != 2:
        raise InputError("figures require planar instances (d = 2)")
    fig = Figure(figsize=(6.0, 6.0))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(111)
    ax.set_aspect("equal")

    covered = [False] * instance.n
    if solution is not None:
        covered = evaluate(instance, solution).covered
        for t, spec in enumerate(instance.discrete_types):
            for j in solution.assignment.open_sites[t]:
                site = spec.sites[j]
                ring = ball_outline(site, spec.radii[j], NormSpec("L2"))
                ax.fill(*zip(*ring), facecolor="tab:green", alpha=0.15,
                        edgecolor="tab:green", linewidth=0.8, zorder=1)
                ax.scatter([site[0]], [site[1]], **DISCRETE_STYLE)
        for t, spec in enumerate(instance.continuous_types):
            for center in solution.continuous_centers[t]:
                ring = ball_outline(center, spec.radius, spec.norm)
                ax.fill(*zip(*ring), facecolor="0.5", alpha=0.2,
                        edgecolor="0.4", linewidth=0.8, zorder=2)
                ax.scatter([center[0]], [center[1]], **CONTINUOUS_STYLE)

    xs_cov = [p[0] for p, c in zip(instance.points, covered) if c]
    ys_cov = [p[1] for p, c in zip(instance.points, covered) if c]
    xs_unc = [p[0] for p, c in zip(instance.points, covered) if not c]
    ys_unc = [p[1] for p, c in zip(instance.points, covered) if not c]
    if xs_unc:
        ax.scatter(xs_unc, ys_unc, label="uncovered demand", **UNCOVERED_STYLE)
    if xs_cov:
        ax.scatter(xs_cov, ys_cov, label="covered demand", **COVERED_STYLE)
    ax.set_title(instance.name or "instance")
    ax.legend(loc="upper right", fontsize=8)
    return fig


def figure_to_svg(fig: Figure) -> str:
    buf = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": _HASH_SALT}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue().decode("utf-8")


def emit_svg(instance: Instance, solution: Solution | None = None) -> str:
    """Render the instance/solution map as an SVG document."""
    return figure_to_svg(solution_figure(instance, solution))


def benchmark_figure(aggregate_rows: list[dict]) -> Figure:
    """Mean total time per configuration, one line per method."""
    fig = Figure(figsize=(7.0, 4.5))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(111)
    methods = sorted({row["method"] for row in aggregate_rows})
    configs = sorted({(row["n"], row["rho"], row["p"]) for row in aggregate_rows})
    labels = [f"n={n} rho={rho} p={p}" for n, rho, p in configs]
    for method in methods:
        by_config = {
            (row["n"], row["rho"], row["p"]): row["Total"]
            for row in aggregate_rows
            if row["method"] == method
        }
        ys = [by_config.get(cfg, float("nan")) for cfg in configs]
        ax.plot(range(len(configs)), ys, marker="o", label=method)
    ax.set_xticks(range(len(configs)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("mean total time (s)")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    return fig
