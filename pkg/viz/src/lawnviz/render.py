"""Raster renderers: lawn site maps in Mollweide or orthographic
projection, and probability/gap curves from a sweep CSV.

Rendering is a pure function of the input files: no randomness, fixed
figure geometry, Agg backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .formats import FormatError, read_grid, read_lawn, read_sweep

PROJECTIONS = ("mollweide", "orthographic")

# Exact region fills. The two-lawn overlap colors are chosen so that no
# antialiased blend of the other figure colors (red/blue dots, black rim
# and text, white background) can reproduce them bit-exactly: any such
# blend satisfies R >= G, B >= G, and R+B-G <= 255, which the purple
# violates on the sum and the green-tinted gray violates on R >= G. That
# makes "no overlap regions drawn" checkable on the output pixels.
REGION_COLORS = {
    "lawn": "#ff0000",        # one-lawn: colored sites
    "off": "#0000ff",         # one-lawn: complement sites
    "lawn1_only": "#ff0000",
    "lawn2_only": "#0000ff",
    "both": "#a020f0",
    "neither": "#808c80",
}


@dataclass
class RenderSpec:
    """What to draw and where to write it."""

    lawn_path: str
    grid_path: str
    out_path: str
    projection: str = "mollweide"
    dpi: int = 150
    dot_size: float | None = None  # points^2; default scales with site count


def site_colors(lawn) -> np.ndarray:
    """Per-site fill colors under the one-lawn or four-region rules."""
    if lawn.setup == "one":
        return np.where(lawn.bits[0] == 1,
                        REGION_COLORS["lawn"], REGION_COLORS["off"])
    b1, b2 = lawn.bits
    out = np.empty(b1.shape[0], dtype=object)
    out[(b1 == 1) & (b2 == 0)] = REGION_COLORS["lawn1_only"]
    out[(b1 == 0) & (b2 == 1)] = REGION_COLORS["lawn2_only"]
    out[(b1 == 1) & (b2 == 1)] = REGION_COLORS["both"]
    out[(b1 == 0) & (b2 == 0)] = REGION_COLORS["neither"]
    return out


def render_lawn(spec: RenderSpec) -> str:
    """Draw every grid site as a colored dot; returns the image path."""
    if spec.projection not in PROJECTIONS:
        raise FormatError(f"projection must be one of {PROJECTIONS}, "
                          f"got {spec.projection!r}")
    points = read_grid(spec.grid_path)
    lawn = read_lawn(spec.lawn_path)
    if lawn.n_sites != points.shape[0]:
        raise FormatError(
            f"{spec.lawn_path} was written for N={lawn.n_sites}, "
            f"grid file has {points.shape[0]} sites")
    colors = site_colors(lawn)
    size = spec.dot_size if spec.dot_size is not None \
        else max(0.5, 36000.0 / points.shape[0])

    title = f"{lawn.setup}-lawn, theta = {lawn.theta:.6g}"
    if lawn.probability is not None:
        title += f", P = {lawn.probability:.6g}"

    if spec.projection == "mollweide":
        fig = plt.figure(figsize=(8.0, 4.5))
        ax = fig.add_subplot(projection="mollweide")
        lon = np.arctan2(points[:, 1], points[:, 0])
        lat = np.arcsin(np.clip(points[:, 2], -1.0, 1.0))
        ax.scatter(lon, lat, s=size, c=colors, linewidths=0)
        ax.grid(False)
        ax.set_xticklabels([])
        ax.set_yticklabels([])
    else:
        # pole-on view from +z: the z >= 0 hemisphere onto the xy disk
        fig, ax = plt.subplots(figsize=(6.0, 6.0))
        near = points[:, 2] >= 0.0
        ax.scatter(points[near, 0], points[near, 1], s=size,
                   c=colors[near], linewidths=0)
        rim = plt.Circle((0.0, 0.0), 1.0, fill=False, color="black",
                         linewidth=0.8)
        ax.add_patch(rim)
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
        ax.set_aspect("equal")
        ax.axis("off")
    ax.set_title(title)
    fig.savefig(spec.out_path, dpi=spec.dpi, facecolor="white")
    plt.close(fig)
    return spec.out_path


def render_curve(csv_path, out_path, dpi: int = 150) -> str:
    """Success probabilities and reference curves vs theta, with a
    quantum-classical gap inset; returns the image path."""
    data = read_sweep(csv_path)
    order = np.argsort(data["theta"])
    theta = data["theta"][order]

    fig, ax = plt.subplots(figsize=(7.5, 5.0))
    for q in range(2, 11):
        ax.axvline(math.pi / q, color="0.82", linewidth=0.8, zorder=0)
    ax.plot(theta, data["q"][order], color="black", linewidth=1.2,
            label="quantum cos^2(theta/2)")
    ax.plot(theta, data["hemisphere"][order], color="black", linewidth=1.0,
            linestyle="--", label="hemisphere 1 - theta/pi")
    for column, label, color in (("p_one", "one lawn", "#d62728"),
                                 ("p_two", "two lawns", "#1f77b4")):
        values = data[column][order]
        if np.any(np.isfinite(values)):
            ax.plot(theta, values, marker="o", markersize=3.0,
                    linewidth=1.0, color=color, label=label)
    ax.set_xlabel("jump angle theta (rad)")
    ax.set_ylabel("success probability")
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="lower left", fontsize=8)

    inset = ax.inset_axes([0.62, 0.62, 0.35, 0.33])
    for column, color in (("gap_one", "#d62728"), ("gap_two", "#1f77b4")):
        values = data[column][order]
        if np.any(np.isfinite(values)):
            inset.plot(theta, values, linewidth=1.0, color=color)
    inset.set_title("gap Q - P", fontsize=8)
    inset.tick_params(labelsize=7)

    fig.savefig(out_path, dpi=dpi, facecolor="white")
    plt.close(fig)
    return out_path
