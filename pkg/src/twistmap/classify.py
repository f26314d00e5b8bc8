"""Orbit classification: KAM torus, ribbon, spots, chaotic, or undetermined.

The chaos indicator is the disagreement of the weighted Birkhoff frequency
estimate between the two halves of the orbit: the smooth exponential
window makes the estimate super-convergent on quasi-periodic orbits, so
regular and chaotic motion separate sharply without Lyapunov exponents.
Resonances of the mean frequency are then tested for libration of their
slow phase; the rank of the oscillating set decides between ribbon
(rank 1) and spots (rank 2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import Orbit
from .errors import ConfigurationError
from .resonance import ResonanceReport, detect_resonances, integer_rank

TWO_PI = 2.0 * math.pi

__all__ = [
    "OrbitLabel",
    "ClassifierConfig",
    "WindingSummary",
    "OrbitClass",
    "mean_frequency",
    "frequency_drift",
    "winding_analysis",
    "classify",
]


class OrbitLabel(enum.Enum):
    KAM_TORUS = "KamTorus"
    RIBBON = "Ribbon"
    SPOTS = "Spots"
    CHAOTIC = "Chaotic"
    UNDETERMINED = "Undetermined"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class ClassifierConfig:
    """Thresholds for orbit classification (all documented defaults)."""

    #: half-to-half frequency disagreement above which an orbit is chaotic
    drift_threshold: float = 1e-6
    #: resonance detection tolerance = scale * sqrt(eps) (floored at 1e-12)
    resonance_tolerance_scale: float = 1.0
    #: sup-norm bound of the integer resonance scan
    n_max: int = 12
    #: a phase oscillates only if its extent is below 2 pi minus this margin
    oscillation_margin: float = 0.1
    #: spots also require the mean action within this multiple of sqrt(eps)
    #: of the double-resonance point
    spots_box_scale: float = 3.0
    #: orbits covering fewer raw steps are Undetermined
    min_steps: int = 1000
    convention: str = "map"


@dataclass(frozen=True)
class WindingSummary:
    k: tuple
    k0: int
    verdict: str  # "Rotating" | "Oscillating" | "Undetermined"
    extent: float | None = None


@dataclass(frozen=True)
class OrbitClass:
    label: OrbitLabel
    mean_frequency: np.ndarray | None = None
    drift: float | None = None
    resonances: ResonanceReport | None = field(default=None, repr=False)
    windings: tuple = ()
    mean_action: np.ndarray | None = None

    def to_dict(self) -> dict:
        """JSON-ready evidence payload with deterministic key order."""
        out = {"label": self.label.value}
        out["mean_frequency"] = (
            None if self.mean_frequency is None else list(self.mean_frequency)
        )
        out["drift"] = self.drift
        out["mean_action"] = (
            None if self.mean_action is None else list(self.mean_action)
        )
        if self.resonances is None:
            out["resonances"] = None
        else:
            out["resonances"] = [
                {"k": list(r.k), "k0": r.k0, "defect": r.defect}
                for r in self.resonances.found
            ]
        out["windings"] = [
            {"k": list(w.k), "k0": w.k0, "verdict": w.verdict, "extent": w.extent}
            for w in self.windings
        ]
        return out


def _bump_weights(count: int) -> np.ndarray:
    t = (np.arange(count) + 0.5) / count
    return np.exp(-1.0 / (t * (1.0 - t)))


def _weighted_mean_increment(lifts: np.ndarray, stride: int) -> np.ndarray:
    inc = np.diff(lifts, axis=0) / stride
    w = _bump_weights(len(inc))
    # shifting by the first increment keeps constant increments exact and
    # conditions the weighted sum around zero
    base = inc[0]
    return base + (w @ (inc - base)) / w.sum()


def mean_frequency(orbit: Orbit) -> np.ndarray:
    """Weighted Birkhoff average of the per-step angle increments.

    Uses the smooth bump weight exp(-1/(t(1-t))) over the record, which is
    super-convergent on quasi-periodic orbits (halving the data changes
    the estimate far below any polynomial rate).
    """
    if orbit.steps < 1000:
        raise ConfigurationError("mean_frequency needs an orbit of >= 1000 steps")
    return _weighted_mean_increment(orbit.x_lifts, orbit.stride)


def frequency_drift(orbit: Orbit) -> float:
    """Sup-norm disagreement of the frequency estimate between orbit halves."""
    lifts = orbit.x_lifts
    half = len(lifts) // 2
    first = _weighted_mean_increment(lifts[:half], orbit.stride)
    second = _weighted_mean_increment(lifts[half - 1:], orbit.stride)
    return float(np.abs(first - second).max())


def winding_analysis(
    orbit: Orbit,
    k,
    k0: int = 0,
    margin: float = 0.1,
) -> WindingSummary:
    """Libration test of the resonant phase q_n = <k, x_lift(n)> - 2 pi k0 n.

    Oscillating: the total range stays below 2 pi - margin and the phase
    reverses direction at least twice.  Rotating: the endpoint drift
    exceeds 4 pi.  Anything else is Undetermined for this vector.
    """
    k = np.asarray(k, dtype=float).ravel()
    if k.size != orbit.dimension:
        raise ConfigurationError("resonance vector length mismatch")
    steps = np.arange(len(orbit)) * orbit.stride
    q = orbit.x_lifts @ k - TWO_PI * k0 * steps
    extent = float(q.max() - q.min())
    dq = np.diff(q)
    signs = np.sign(dq)
    signs = signs[signs != 0.0]
    reversals = int(np.count_nonzero(signs[1:] != signs[:-1]))
    key = (tuple(int(v) for v in np.asarray(k, dtype=np.int64)), int(k0))
    if extent < TWO_PI - margin and reversals >= 2:
        return WindingSummary(*key, "Oscillating", extent)
    if abs(float(q[-1] - q[0])) > 2.0 * TWO_PI:
        return WindingSummary(*key, "Rotating", None)
    return WindingSummary(*key, "Undetermined", extent)


def _double_resonance_point(oscillating) -> np.ndarray | None:
    """Action point solving two independent resonances <k, y> = 2 pi k0."""
    if len(oscillating) < 2:
        return None
    dim = len(oscillating[0].k)
    for i in range(len(oscillating)):
        for j in range(i + 1, len(oscillating)):
            a, b = oscillating[i], oscillating[j]
            if integer_rank([a.k, b.k]) != 2 or dim != 2:
                continue
            mat = np.array([a.k, b.k], dtype=float)
            rhs = TWO_PI * np.array([a.k0, b.k0], dtype=float)
            return np.linalg.solve(mat, rhs)
    return None


def classify(orbit: Orbit, config: ClassifierConfig = ClassifierConfig()) -> OrbitClass:
    """Full pipeline: frequency, resonances, winding, drift, label.

    A drift above the threshold yields Chaotic regardless of the resonance
    analysis.  Otherwise the integer rank of the oscillating resonant
    phases selects KamTorus (0), Ribbon (1), or Spots (2, if the mean
    action also sits near the corresponding double-resonance point).
    Undetermined is an honest output, never forced into another bin.
    """
    if orbit.steps < config.min_steps or len(orbit) < 8:
        return OrbitClass(label=OrbitLabel.UNDETERMINED)
    nu = mean_frequency(orbit)
    drift = frequency_drift(orbit)
    tol = max(config.resonance_tolerance_scale * math.sqrt(orbit.eps), 1e-12)
    report = detect_resonances(
        nu, n_max=config.n_max, tolerance=tol, convention=config.convention
    )
    windings = tuple(
        winding_analysis(orbit, r.k, r.k0, margin=config.oscillation_margin)
        for r in report.found
    )
    mean_y = orbit.ys.mean(axis=0)
    evidence = dict(
        mean_frequency=nu,
        drift=drift,
        resonances=report,
        windings=windings,
        mean_action=mean_y,
    )
    if drift > config.drift_threshold:
        return OrbitClass(label=OrbitLabel.CHAOTIC, **evidence)
    oscillating = [w for w in windings if w.verdict == "Oscillating"]
    rank = integer_rank([w.k for w in oscillating]) if oscillating else 0
    if rank == 0:
        if any(w.verdict == "Undetermined" for w in windings):
            return OrbitClass(label=OrbitLabel.UNDETERMINED, **evidence)
        return OrbitClass(label=OrbitLabel.KAM_TORUS, **evidence)
    if rank == 1:
        return OrbitClass(label=OrbitLabel.RIBBON, **evidence)
    point = _double_resonance_point(oscillating)
    if point is not None:
        box = config.spots_box_scale * math.sqrt(orbit.eps)
        if np.abs(mean_y - point).max() <= box:
            return OrbitClass(label=OrbitLabel.SPOTS, **evidence)
    return OrbitClass(label=OrbitLabel.UNDETERMINED, **evidence)
