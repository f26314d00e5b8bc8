"""Resonant averaging, the cohomological equation, and first-order torus shapes.

The averaging projector keeps exactly the Fourier harmonics whose wave
vector lies in a given resonance module.  The cohomological solver removes
the complementary harmonics termwise, dividing by <nu0, k> (flow
convention) or by the distance of <nu0, k> to the nearest multiple of
2 pi (map convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SmallDivisorError
from .resonance import ResonanceModule
from .trig import TWO_PI, TrigSeries

__all__ = [
    "project_resonant",
    "CohomologySolution",
    "solve_cohomological",
    "first_order_projection",
]


def project_resonant(f: TrigSeries, module: ResonanceModule) -> TrigSeries:
    """Keep exactly the harmonics of f whose wave vector lies in the module.

    The constant term always survives (0 belongs to every module).  The
    projector is linear and idempotent.
    """
    if f.dimension != module.dimension:
        raise ConfigurationError("series and module dimensions differ")
    terms = [(k, a, phi) for k, a, phi in f.terms() if module.contains(k)]
    return TrigSeries.from_terms(f.dimension, terms)


@dataclass(frozen=True)
class CohomologySolution:
    """Solution S of <nu0, S_x> + H1 = <H1>_g with <S>_g = 0."""

    series: TrigSeries
    resonant_part: TrigSeries
    residual_norm: float
    smallest_divisor: float
    omitted_terms: int


def _divisor(nu0, k, convention: str) -> float:
    raw = float(np.asarray(k, dtype=float) @ nu0)
    if convention == "flow":
        return raw
    return raw - TWO_PI * round(raw / TWO_PI)


def solve_cohomological(
    h1: TrigSeries,
    nu0,
    module: ResonanceModule,
    divisor_floor: float = 1e-6,
    convention: str = "flow",
    grid_points: int = 64,
) -> CohomologySolution:
    """Solve the averaging equation termwise.

    Every non-resonant harmonic ``a cos(<k,x> + phi)`` of h1 contributes
    ``-(a / d) sin(<k,x> + phi)`` to S, where d is the divisor of k in the
    chosen convention.  Resonant harmonics pass untouched into the average
    v = <h1>_g.  The returned residual is the sup-norm of
    <nu0, S_x> + h1 - v on a uniform verification grid (``grid_points``
    per angle); for the flow convention this identity is exact for finite
    series, so the residual is pure roundoff.

    Raises
    ------
    SmallDivisorError
        If any non-resonant harmonic has |divisor| < divisor_floor; silent
        omission would corrupt the residual contract.
    """
    nu0 = np.asarray(nu0, dtype=float).ravel()
    if h1.dimension != nu0.size or h1.dimension != module.dimension:
        raise ConfigurationError("dimension mismatch between h1, nu0, module")
    if convention not in ("flow", "map"):
        raise ConfigurationError("convention must be 'flow' or 'map'")
    v_terms = []
    s_terms = []
    smallest = np.inf
    omitted = 0
    for k, a, phi in h1.terms():
        if module.contains(k):
            v_terms.append((k, a, phi))
            omitted += 1
            continue
        d = _divisor(nu0, k, convention)
        if abs(d) < divisor_floor:
            raise SmallDivisorError(k, abs(d), divisor_floor)
        smallest = min(smallest, abs(d))
        # -(a/d) sin(t) == (a/d) cos(t + pi/2)
        s_terms.append((k, a / d, phi + np.pi / 2.0))
    series = TrigSeries.from_terms(h1.dimension, s_terms)
    v = TrigSeries.from_terms(h1.dimension, v_terms)

    axes = [np.linspace(0.0, TWO_PI, grid_points, endpoint=False)] * h1.dimension
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    residual = series.gradient(mesh) @ nu0 + h1(mesh) - v(mesh)
    return CohomologySolution(
        series=series,
        resonant_part=v,
        residual_norm=float(np.abs(residual).max()),
        smallest_divisor=float(smallest),
        omitted_terms=omitted,
    )


def first_order_projection(
    y0,
    s: TrigSeries,
    eps: float,
    module: ResonanceModule,
    samples: int = 64,
    oscillation_window=None,
) -> np.ndarray:
    """Predicted action-space shape {Y0 + sqrt(eps) S_x(X)} of a torus.

    ``samples`` is the number of grid points per angle.  With a window
    (q_lo, q_hi) the grid is restricted to points whose resonant phase
    <K0, X> mod 2 pi falls inside it (single resonance only), which cuts
    the full torus shape down to the ribbon carried by an oscillating
    phase.
    """
    y0 = np.asarray(y0, dtype=float).ravel()
    if s.dimension != y0.size:
        raise ConfigurationError("series and Y0 dimensions differ")
    if eps < 0:
        raise ConfigurationError("eps must be >= 0")
    if samples < 1:
        raise ConfigurationError("samples must be >= 1")
    axes = [np.linspace(0.0, TWO_PI, samples, endpoint=False)] * s.dimension
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, s.dimension)
    if oscillation_window is not None:
        if module.rank != 1:
            raise ConfigurationError(
                "an oscillation window requires a rank-1 resonance module"
            )
        lo, hi = (float(v) for v in oscillation_window)
        q = np.remainder(mesh @ module.generators[:, 0].astype(float), TWO_PI)
        lo_m, hi_m = np.remainder(lo, TWO_PI), np.remainder(hi, TWO_PI)
        if lo_m <= hi_m:
            keep = (q >= lo_m) & (q <= hi_m)
        else:
            keep = (q >= lo_m) | (q <= hi_m)
        mesh = mesh[keep]
    return y0 + np.sqrt(eps) * s.gradient(mesh)
