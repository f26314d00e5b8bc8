"""Seeded Monte Carlo surveys of phase-space class fractions versus eps.

Every sample's initial condition comes from its own counter-based RNG
stream keyed by (seed, eps index, sample index), so results are identical
for any worker count and any scheduling, and a survey can resume from a
journal of per-sample records.  Scaling exponents are fitted by weighted
least squares on log fraction versus log eps with binomial weights.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classify import ClassifierConfig, OrbitLabel, classify
from .engine import PhaseState, iterate
from .errors import ConfigurationError, OrbitDivergenceError
from .pendulum import (
    in_oscillatory_domain,
    pendulum_energy,
    reduce_to_pendulum,
)
from .resonance import build_geometry
from .trig import TWO_PI, TrigSeries

__all__ = [
    "FullBoxRegion",
    "ResonanceStripRegion",
    "DoubleResonanceBoxRegion",
    "SurveyConfig",
    "SurveyResult",
    "ScalingFit",
    "run_survey",
    "conditional_ribbon_probability",
    "double_resonance_probability",
    "fit_log_scaling",
    "sample_state",
]

LABEL_ORDER = (
    OrbitLabel.KAM_TORUS,
    OrbitLabel.RIBBON,
    OrbitLabel.SPOTS,
    OrbitLabel.CHAOTIC,
    OrbitLabel.UNDETERMINED,
    OrbitLabel.DIVERGED,
)
_LABEL_CODE = {label: i for i, label in enumerate(LABEL_ORDER)}

_JOURNAL_MAGIC = b"TWSJ"
_JOURNAL_VERSION = 1


# ---------------------------------------------------------------------------
# Sampling regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FullBoxRegion:
    """Uniform actions in a box; angles uniform on the torus."""

    y_low: tuple
    y_high: tuple

    def area(self, eps: float) -> float:
        lo = np.asarray(self.y_low, dtype=float)
        hi = np.asarray(self.y_high, dtype=float)
        return float(np.prod(hi - lo))

    def sample_y(self, rng: np.random.Generator, eps: float) -> np.ndarray:
        return rng.uniform(self.y_low, self.y_high)


@dataclass(frozen=True)
class ResonanceStripRegion:
    """Uniform strip |<k, y> - 2 pi k0| <= width_scale * sqrt(eps).

    The strip is parametrized orthogonally: a uniform arc length along the
    resonance line (two actions only) times a uniform normal offset in
    resonance units, which is the Lebesgue measure of the strip.
    """

    k: tuple
    k0: int = 0
    width_scale: float = 1.0
    t_range: tuple = (0.0, TWO_PI)

    def __post_init__(self):
        if len(self.k) != 2:
            raise ConfigurationError("strip sampling is implemented for N = 2")
        if not any(self.k):
            raise ConfigurationError("strip resonance vector must be nonzero")

    def anchor(self) -> np.ndarray:
        k = np.asarray(self.k, dtype=float)
        return TWO_PI * self.k0 * k / (k @ k)

    def sample_y(self, rng: np.random.Generator, eps: float) -> np.ndarray:
        k = np.asarray(self.k, dtype=float)
        norm = math.sqrt(float(k @ k))
        tangent = np.array([-k[1], k[0]]) / norm
        t = rng.uniform(*self.t_range)
        offset = rng.uniform(-1.0, 1.0) * self.width_scale * math.sqrt(eps)
        return self.anchor() + t * tangent + offset * k / (k @ k)

    def area(self, eps: float) -> float:
        k = np.asarray(self.k, dtype=float)
        norm = math.sqrt(float(k @ k))
        length = abs(self.t_range[1] - self.t_range[0])
        return length * 2.0 * self.width_scale * math.sqrt(eps) / norm


@dataclass(frozen=True)
class DoubleResonanceBoxRegion:
    """Square box of half side ``half_side_scale * sqrt(eps)`` around a
    double-resonance action point (measure proportional to eps)."""

    center: tuple
    half_side_scale: float = 3.0

    def half_side(self, eps: float) -> float:
        return self.half_side_scale * math.sqrt(eps)

    def sample_y(self, rng: np.random.Generator, eps: float) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        h = self.half_side(eps)
        return rng.uniform(c - h, c + h)

    def area(self, eps: float) -> float:
        return (2.0 * self.half_side(eps)) ** len(self.center)


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurveyConfig:
    potential: TrigSeries
    eps_values: tuple
    samples_per_eps: int
    region: object
    seed: int = 0
    steps: int = 200_000
    stride: int = 20
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_values)
        if not eps or any(e <= 0 for e in eps) or len(set(eps)) != len(eps):
            raise ConfigurationError("eps values must be positive and distinct")
        object.__setattr__(self, "eps_values", eps)
        if self.samples_per_eps < 1:
            raise ConfigurationError("samples_per_eps must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must fit in 64 bits")

    def fingerprint(self) -> bytes:
        """Stable 16-byte digest of everything that determines the samples."""
        parts = [
            repr(sorted((tuple(map(int, k)), float(a), float(p))
                        for k, a, p in self.potential.terms())),
            repr(self.eps_values),
            repr(self.samples_per_eps),
            repr(self.region),
            repr(self.seed),
            repr(self.steps),
            repr(self.stride),
            repr(self.classifier),
        ]
        return hashlib.sha256("|".join(parts).encode()).digest()[:16]


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    residual: float
    exponent_stderr: float


@dataclass(frozen=True)
class SurveyResult:
    eps_values: tuple
    counts: np.ndarray  # (n_eps, n_labels) int
    fractions: np.ndarray
    stderrs: np.ndarray
    chaotic_fit: ScalingFit | None
    seed: int
    config_digest: str
    sample_codes: np.ndarray = field(default=None, repr=False)  # (n_eps, n)

    def row(self, eps_index: int) -> dict:
        return {
            label.value: int(self.counts[eps_index, code])
            for label, code in _LABEL_CODE.items()
        }


def sample_state(config: SurveyConfig, eps_index: int, sample_index: int) -> PhaseState:
    """The initial condition of one sample, from its own Philox stream."""
    key = np.array(
        [config.seed, (np.uint64(eps_index) << np.uint64(32)) | np.uint64(sample_index)],
        dtype=np.uint64,
    )
    rng = np.random.Generator(np.random.Philox(key=key))
    eps = config.eps_values[eps_index]
    y = config.region.sample_y(rng, eps)
    x = rng.uniform(0.0, TWO_PI, size=config.potential.dimension)
    return PhaseState.from_lift(y, x)


def _classify_sample(config: SurveyConfig, eps_index: int, sample_index: int) -> int:
    state = sample_state(config, eps_index, sample_index)
    eps = config.eps_values[eps_index]
    try:
        orbit = iterate(state, config.potential, eps, config.steps, config.stride)
    except OrbitDivergenceError:
        return _LABEL_CODE[OrbitLabel.DIVERGED]
    return _LABEL_CODE[classify(orbit, config.classifier).label]


# ---------------------------------------------------------------------------
# Journal (length-prefixed binary records, resumable)
# ---------------------------------------------------------------------------

class _Journal:
    """Append-only record file of (eps index, sample index, label code)."""

    RECORD = struct.Struct("<IIi")

    def __init__(self, path: str, digest: bytes):
        self.path = path
        self.digest = digest
        self._lock = threading.Lock()
        self._pending = 0
        self._handle = None

    def load(self) -> dict:
        done = {}
        if not os.path.exists(self.path):
            return done
        with open(self.path, "rb") as fh:
            header = fh.read(4 + 4 + 16)
            if len(header) < 24 or header[:4] != _JOURNAL_MAGIC:
                raise ConfigurationError(f"{self.path}: not a survey journal")
            version = struct.unpack("<I", header[4:8])[0]
            if version != _JOURNAL_VERSION:
                raise ConfigurationError(f"{self.path}: unsupported journal version")
            if header[8:24] != self.digest:
                raise ConfigurationError(
                    f"{self.path}: journal belongs to a different survey config"
                )
            while True:
                prefix = fh.read(4)
                if len(prefix) < 4:
                    break
                (length,) = struct.unpack("<I", prefix)
                payload = fh.read(length)
                if len(payload) < length or length != self.RECORD.size:
                    break  # truncated tail record: ignore, it will be redone
                e, s, code = self.RECORD.unpack(payload)
                done[(e, s)] = code
        return done

    def open_for_append(self, fresh: bool):
        mode = "wb" if fresh else "ab"
        self._handle = open(self.path, mode)
        if fresh:
            self._handle.write(
                _JOURNAL_MAGIC + struct.pack("<I", _JOURNAL_VERSION) + self.digest
            )
            self._handle.flush()

    def append(self, eps_index: int, sample_index: int, code: int):
        payload = self.RECORD.pack(eps_index, sample_index, code)
        with self._lock:
            self._handle.write(struct.pack("<I", len(payload)) + payload)
            self._pending += 1
            if self._pending >= 1000:
                self._handle.flush()
                os.fsync(self._handle.fileno())
                self._pending = 0

    def close(self):
        if self._handle is not None:
            self._handle.flush()
            self._handle.close()
            self._handle = None


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------

def fit_log_scaling(eps_values, fractions, sample_counts) -> ScalingFit | None:
    """Weighted least squares of log(fraction) on log(eps).

    Weights are the inverse variances of log f under binomial sampling,
    n f / (1 - f).  Rows with zero successes are skipped; a fit needs at
    least two usable rows.
    """
    eps = np.asarray(eps_values, dtype=float)
    f = np.asarray(fractions, dtype=float)
    n = np.asarray(sample_counts, dtype=float)
    use = (f > 0) & (f < 1)
    if use.sum() < 2:
        return None
    x = np.log(eps[use])
    ylog = np.log(f[use])
    w = n[use] * f[use] / (1.0 - f[use])
    design = np.column_stack([x, np.ones_like(x)])
    wsqrt = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(design * wsqrt[:, None], ylog * wsqrt, rcond=None)
    resid = ylog - design @ coef
    wrms = float(np.sqrt((w * resid**2).sum() / w.sum()))
    cov = np.linalg.inv((design * w[:, None]).T @ design)
    return ScalingFit(
        exponent=float(coef[0]),
        intercept=float(coef[1]),
        residual=wrms,
        exponent_stderr=float(np.sqrt(cov[0, 0])),
    )


# ---------------------------------------------------------------------------
# Main driver
# ---------------------------------------------------------------------------

def _run_tasks(config, tasks, workers, journal, completed, progress=None):
    """Run sample tasks, updating ``completed`` in place."""

    def work(task):
        e, s = task
        code = _classify_sample(config, e, s)
        if journal is not None:
            journal.append(e, s, code)
        return task, code

    if workers <= 1:
        for task in tasks:
            key, code = work(task)
            completed[key] = code
            if progress:
                progress(len(completed))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for key, code in pool.map(work, tasks):
                completed[key] = code
                if progress:
                    progress(len(completed))


def run_survey(
    config: SurveyConfig,
    workers: int = 1,
    journal_path: str | None = None,
    progress=None,
) -> SurveyResult:
    """Classify ``samples_per_eps`` seeded orbits at every eps and tally.

    The result is a deterministic function of (config, seed): per-sample
    RNG streams are indexed, aggregation is commutative, and all derived
    numbers are recomputed from the completed table, so worker count and
    resumption cannot change a single byte of the output.
    """
    digest = config.fingerprint()
    completed: dict = {}
    journal = None
    if journal_path is not None:
        journal = _Journal(journal_path, digest)
        completed = journal.load()
        journal.open_for_append(fresh=not completed)
    tasks = [
        (e, s)
        for e in range(len(config.eps_values))
        for s in range(config.samples_per_eps)
        if (e, s) not in completed
    ]
    try:
        _run_tasks(config, tasks, workers, journal, completed, progress)
    finally:
        if journal is not None:
            journal.close()

    n = config.samples_per_eps
    codes = np.full((len(config.eps_values), n), -1, dtype=np.int8)
    for (e, s), code in completed.items():
        codes[e, s] = code
    counts = np.zeros((len(config.eps_values), len(LABEL_ORDER)), dtype=np.int64)
    for c in range(len(LABEL_ORDER)):
        counts[:, c] = (codes == c).sum(axis=1)
    fractions = counts / n
    stderrs = np.sqrt(fractions * (1.0 - fractions) / n)
    chaotic = fractions[:, _LABEL_CODE[OrbitLabel.CHAOTIC]]
    fit = fit_log_scaling(config.eps_values, chaotic, [n] * len(config.eps_values))
    return SurveyResult(
        eps_values=config.eps_values,
        counts=counts,
        fractions=fractions,
        stderrs=stderrs,
        chaotic_fit=fit,
        seed=config.seed,
        config_digest=digest.hex(),
        sample_codes=codes,
    )


# ---------------------------------------------------------------------------
# Conditioned probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalRow:
    eps: float
    inside_count: int
    ribbon_count: int
    fraction: float
    stderr: float


def _strip_pendulum(config: SurveyConfig) -> tuple:
    region = config.region
    if not isinstance(region, ResonanceStripRegion):
        raise ConfigurationError("ribbon probability needs a resonance strip region")
    geometry = build_geometry(
        region.k, target=TWO_PI * region.k0
    )
    model = reduce_to_pendulum(
        config.potential, geometry, region.anchor(), eps=min(config.eps_values)
    )
    return geometry, model


def conditional_ribbon_probability(
    config: SurveyConfig,
    workers: int = 1,
    separatrix_band: float = 0.05,
    journal_path: str | None = None,
):
    """Fraction of Ribbon labels among samples starting inside the
    oscillatory domain of the strip's resonance.

    Membership is decided on the projected initial condition
    (p, q) = (lambda(y)/sqrt(eps), <K0, x>); energies within
    ``separatrix_band`` of the top of the well are excluded, since tori
    degenerate near the separatrix.  Returns one row per eps.
    """
    geometry, model = _strip_pendulum(config)
    result_rows = []
    survey = run_survey(config, workers=workers, journal_path=journal_path)
    k0 = geometry.k0_vector.astype(float)
    e_cut = model.E_sep - separatrix_band * (model.E_sep - model.E_min)
    for e_idx, eps in enumerate(config.eps_values):
        inside = 0
        ribbons = 0
        for s_idx in range(config.samples_per_eps):
            state = sample_state(config, e_idx, s_idx)
            p = geometry.lambda_of(state.y) / math.sqrt(eps)
            q = float(k0 @ state.x_lift)
            if not in_oscillatory_domain(model, p, q):
                continue
            if float(pendulum_energy(model, p, q)) > e_cut:
                continue
            inside += 1
            if survey.sample_codes[e_idx, s_idx] == _LABEL_CODE[OrbitLabel.RIBBON]:
                ribbons += 1
        frac = ribbons / inside if inside else float("nan")
        err = (
            math.sqrt(frac * (1.0 - frac) / inside)
            if inside and 0.0 < frac < 1.0
            else 0.0
        )
        result_rows.append(ConditionalRow(eps, inside, ribbons, frac, err))
    return result_rows


@dataclass(frozen=True)
class SpotsRow:
    eps: float
    spots_fraction_in_box: float
    stderr_in_box: float
    unconditional_fraction: float
    unconditional_stderr: float


@dataclass(frozen=True)
class SpotsProbability:
    rows: tuple
    fit: ScalingFit | None


def double_resonance_probability(
    config: SurveyConfig,
    reference_box: FullBoxRegion = FullBoxRegion((0.0, 0.0), (TWO_PI, TWO_PI)),
    workers: int = 1,
    journal_path: str | None = None,
) -> SpotsProbability:
    """Spots fraction in an eps-scaled double-resonance box, per eps.

    The unconditional fraction (the probability for a sample drawn from
    the reference box to land on a spots torus) is the in-box fraction
    scaled by the measure ratio; its scaling exponent in eps is fitted
    with the box measure included, so a roughly constant in-box fraction
    gives an exponent near 1.
    """
    region = config.region
    if not isinstance(region, DoubleResonanceBoxRegion):
        raise ConfigurationError(
            "double-resonance probability needs a box region around the point"
        )
    survey = run_survey(config, workers=workers, journal_path=journal_path)
    spots = survey.fractions[:, _LABEL_CODE[OrbitLabel.SPOTS]]
    errs = survey.stderrs[:, _LABEL_CODE[OrbitLabel.SPOTS]]
    rows = []
    uncond = []
    for i, eps in enumerate(config.eps_values):
        ratio = region.area(eps) / reference_box.area(eps)
        rows.append(
            SpotsRow(
                eps=eps,
                spots_fraction_in_box=float(spots[i]),
                stderr_in_box=float(errs[i]),
                unconditional_fraction=float(spots[i] * ratio),
                unconditional_stderr=float(errs[i] * ratio),
            )
        )
        uncond.append(spots[i] * ratio)
    fit = fit_log_scaling(
        config.eps_values,
        uncond,
        [config.samples_per_eps] * len(config.eps_values),
    )
    return SpotsProbability(rows=tuple(rows), fit=fit)
