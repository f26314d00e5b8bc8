"""Deterministic SVG rendering of action-plane projections and reduced
phase portraits.

Output is plain SVG text with a fixed element order and all coordinates
formatted to six decimal places, so identical inputs produce identical
bytes; golden-file regressions diff cleanly and no imaging library is
needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import Orbit
from .errors import ConfigurationError
from .pendulum import PendulumModel, _turning_points

__all__ = ["PlotSpec", "render_action_projection", "render_phase_portrait"]

# fixed palette: orbit series cycle through these
_COLORS = ("#1f4e79", "#a63603", "#2a7a2a", "#6a3d9a", "#b15928", "#006d6d")
_OVERLAY_COLOR = "#d01c8b"
_SHADE_COLOR = "#c8c8c8"
_CURVE_COLOR = "#505050"


@dataclass(frozen=True)
class PlotSpec:
    """Render options shared by both figure kinds."""

    width: int = 800
    height: int = 800
    point_radius: float = 1.2
    axes: tuple | None = None  # (xmin, xmax, ymin, ymax); None = auto
    title: str | None = None
    axis_indices: tuple = (0, 1)


def _fmt(value: float) -> str:
    if not np.isfinite(value):
        raise ConfigurationError("non-finite coordinate in plot data")
    out = f"{value:.6f}"
    return "0.000000" if out == "-0.000000" else out


def _auto_axes(groups) -> tuple:
    pts = np.vstack([g for g in groups if len(g)])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo = lo - 0.05 * span
    hi = hi + 0.05 * span
    return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])


class _Canvas:
    def __init__(self, spec: PlotSpec, axes: tuple):
        self.spec = spec
        self.axes = axes
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
            f'height="{spec.height}" '
            f'viewBox="0 0 {spec.width} {spec.height}">\n'
            f'<rect width="{spec.width}" height="{spec.height}" fill="#ffffff"/>\n'
        ]
        if spec.title:
            self.parts.append(
                f'<text x="{spec.width // 2}" y="20" text-anchor="middle" '
                f'font-family="monospace" font-size="14">{spec.title}</text>\n'
            )

    def to_pixel(self, xy: np.ndarray) -> np.ndarray:
        x0, x1, y0, y1 = self.axes
        px = (xy[:, 0] - x0) / (x1 - x0) * self.spec.width
        py = (1.0 - (xy[:, 1] - y0) / (y1 - y0)) * self.spec.height
        return np.column_stack([px, py])

    def circles(self, xy: np.ndarray, color: str, radius: float):
        pix = self.to_pixel(np.asarray(xy, dtype=float))
        r = _fmt(radius)
        self.parts.append(f'<g fill="{color}">\n')
        for px, py in pix:
            self.parts.append(
                f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{r}"/>\n'
            )
        self.parts.append("</g>\n")

    def polyline(self, xy: np.ndarray, color: str, width: float = 1.0,
                 closed: bool = False):
        pix = self.to_pixel(np.asarray(xy, dtype=float))
        coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pix)
        tag = "polygon" if closed else "polyline"
        self.parts.append(
            f'<{tag} points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"/>\n'
        )

    def polygon_filled(self, xy: np.ndarray, color: str):
        pix = self.to_pixel(np.asarray(xy, dtype=float))
        coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pix)
        self.parts.append(f'<polygon points="{coords}" fill="{color}"/>\n')

    def document(self) -> str:
        return "".join(self.parts) + "</svg>\n"


def render_action_projection(
    orbits,
    spec: PlotSpec = PlotSpec(),
    overlay_points=None,
) -> str:
    """Scatter of recorded actions (two selected components) per orbit.

    ``overlay_points`` (an (M, 2) array, e.g. a predicted first-order
    torus shape) is drawn after the orbits in a distinct style.  Output
    bytes depend only on the inputs.
    """
    if isinstance(orbits, Orbit):
        orbits = [orbits]
    if not orbits:
        raise ConfigurationError("no orbits to render")
    i, j = spec.axis_indices
    groups = []
    for orbit in orbits:
        if len(orbit.ys) == 0:
            raise ConfigurationError("empty orbit")
        if orbit.dimension < 2:
            raise ConfigurationError("action projection needs dimension >= 2")
        groups.append(orbit.ys[:, (i, j)])
    if overlay_points is not None:
        overlay_points = np.asarray(overlay_points, dtype=float)
        if len(overlay_points) == 0:
            raise ConfigurationError("empty overlay")
        groups.append(overlay_points[:, (i, j)])
    if not all(np.isfinite(g).all() for g in groups):
        raise ConfigurationError("non-finite coordinate in plot data")
    axes = spec.axes if spec.axes is not None else _auto_axes(groups)
    canvas = _Canvas(spec, axes)
    n_orbits = len(orbits)
    for idx in range(n_orbits):
        canvas.circles(groups[idx], _COLORS[idx % len(_COLORS)],
                       spec.point_radius)
    if overlay_points is not None:
        canvas.circles(groups[-1], _OVERLAY_COLOR, 0.75 * spec.point_radius)
    return canvas.document()


def _level_curve(model: PendulumModel, energy: float, n_points: int = 256):
    """Closed libration curve of A p^2/2 + u(q) = E, or a rotation pair."""
    if model.E_min < energy < model.E_top:
        q1, q2 = _turning_points(model, energy)
        q = np.linspace(q1, q2, n_points)
        p = np.sqrt(np.maximum(2.0 * (energy - model.u(q)) / model.stiffness, 0.0))
        top = np.column_stack([q, p])
        bottom = np.column_stack([q[::-1], -p[::-1]])
        return [np.vstack([top, bottom])], True
    q = np.linspace(model.q_lo, model.q_hi, n_points)
    excess = 2.0 * (energy - model.u(q)) / model.stiffness
    if np.any(excess < 0.0):
        raise ConfigurationError(
            f"energy {energy} is neither librating nor rotating over the well"
        )
    p = np.sqrt(excess)
    return [np.column_stack([q, p]), np.column_stack([q, -p])], False


def render_phase_portrait(
    model: PendulumModel,
    reduced_points=None,
    spec: PlotSpec = PlotSpec(),
    energies=None,
    shade: bool = True,
) -> str:
    """Level curves of the reduced Hamiltonian with the oscillatory domain
    shaded and an optional (p, q) orbit trace overlaid.

    The shaded region is bounded by the separatrix curve
    p = +- sqrt(2 (E_sep - u(q)) / A) over the potential well; curves are
    drawn at the configured energies (by default eight librating levels
    plus two rotations).
    """
    depth = model.E_sep - model.E_min
    if energies is None:
        energies = [model.E_min + f * depth for f in
                    (0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 0.96, 0.995)]
        energies += [model.E_sep + 0.3 * depth, model.E_sep + 0.8 * depth]
    q_grid = np.linspace(model.q_lo, model.q_hi, 512)
    p_sep = np.sqrt(
        np.maximum(2.0 * (model.E_sep - model.u(q_grid)) / model.stiffness, 0.0)
    )
    p_max = max(
        float(p_sep.max()),
        max(
            (
                np.sqrt(2.0 * max(e - model.E_min, 0.0) / model.stiffness)
                for e in energies
            ),
            default=0.0,
        ),
    )
    axes = spec.axes
    if axes is None:
        if reduced_points is not None and len(reduced_points):
            pts = np.asarray(reduced_points, dtype=float)
            p_max = max(p_max, float(np.abs(pts[:, 0]).max()))
        axes = (float(model.q_lo), float(model.q_hi), -1.1 * p_max, 1.1 * p_max)
    canvas = _Canvas(spec, axes)
    if shade:
        boundary = np.vstack(
            [
                np.column_stack([q_grid, p_sep]),
                np.column_stack([q_grid[::-1], -p_sep[::-1]]),
            ]
        )
        canvas.polygon_filled(boundary, _SHADE_COLOR)
    for energy in energies:
        try:
            curves, closed = _level_curve(model, float(energy))
        except (ConfigurationError, ValueError):
            continue
        for curve in curves:
            canvas.polyline(curve, _CURVE_COLOR, width=1.0, closed=closed)
    # separatrix on top of the shade
    canvas.polyline(np.column_stack([q_grid, p_sep]), "#000000", width=1.2)
    canvas.polyline(np.column_stack([q_grid, -p_sep]), "#000000", width=1.2)
    if reduced_points is not None and len(reduced_points):
        pts = np.asarray(reduced_points, dtype=float)
        qp = np.column_stack(
            [np.remainder(pts[:, 1] - model.q_lo, 2.0 * np.pi) + model.q_lo,
             pts[:, 0]]
        )
        canvas.circles(qp, _COLORS[0], spec.point_radius)
    return canvas.document()
