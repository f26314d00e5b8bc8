"""Exact iteration of the twist map y+ = y - eps * dV/dx, x+ = x + y+.

The gradient is evaluated at the pre-step angles, which makes the map
explicit and exactly invertible.  Angles are kept twice: reduced mod 2 pi
(the accumulator the potential sees, so roundoff stays at the 2-pi scale
no matter how far the lift wanders) and as a continuous lift for winding
measurements downstream.

All stepping goes through a single jitted kernel, and orbits record the
full (y, x, lift) triple, so recorded states agree bit-for-bit with
repeated calls of :func:`map_step`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigurationError, OrbitDivergenceError
from .trig import TWO_PI, TrigSeries

__all__ = [
    "PhaseState",
    "Orbit",
    "map_step",
    "inverse_step",
    "iterate",
    "jacobian_determinant",
]


@dataclass(frozen=True)
class PhaseState:
    """A phase-space point: actions y, reduced angles x, and the angle lift."""

    y: np.ndarray
    x: np.ndarray
    x_lift: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        lift = np.asarray(self.x_lift, dtype=float).ravel()
        x = np.asarray(self.x, dtype=float).ravel()
        if not (y.shape == x.shape == lift.shape):
            raise ConfigurationError("y, x, x_lift must have equal length")
        if np.any((x < 0.0) | (x >= TWO_PI)):
            raise ConfigurationError("reduced angles must lie in [0, 2 pi)")
        turns = (lift - x) / TWO_PI
        # lift and reduced angles are independent accumulators; their offset
        # must stay an integer number of turns up to accumulated roundoff
        tol = 1e-9 * np.maximum(1.0, np.abs(lift))
        if np.any(np.abs(turns - np.round(turns)) > tol):
            raise ConfigurationError(
                "x_lift minus x is not an integer multiple of 2 pi"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x_lift", lift)

    @classmethod
    def from_lift(cls, y, x_lift) -> "PhaseState":
        """Build a state from actions and lifted angles; reduces mod 2 pi."""
        lift = np.asarray(x_lift, dtype=float).ravel()
        return cls(np.asarray(y, dtype=float).ravel(), np.remainder(lift, TWO_PI), lift)

    @property
    def dimension(self) -> int:
        return self.y.size


@njit(cache=True, nogil=True)
def _force(ks, amps, phis, x, out):
    """out_j = sum_t a_t k_tj sin(<k_t, x> + phi_t)  (this is -dV/dx)."""
    n = x.size
    for j in range(n):
        out[j] = 0.0
    for t in range(amps.size):
        arg = phis[t]
        for j in range(n):
            arg += ks[t, j] * x[j]
        s = amps[t] * np.sin(arg)
        for j in range(n):
            out[j] += ks[t, j] * s


@njit(cache=True, nogil=True)
def _step(ks, amps, phis, eps, y, x, lift, scratch):
    """Advance (y, x, lift) by one map step in place.  Fixed evaluation order."""
    _force(ks, amps, phis, x, scratch)
    n = y.size
    for j in range(n):
        y[j] = y[j] + eps * scratch[j]
        x[j] = (x[j] + y[j]) % TWO_PI
        lift[j] = lift[j] + y[j]


@njit(cache=True, nogil=True)
def _unstep(ks, amps, phis, eps, y, x, lift, scratch):
    """Invert one map step in place: x = x+ - y+, y = y+ + eps dV/dx."""
    n = y.size
    for j in range(n):
        x[j] = (x[j] - y[j]) % TWO_PI
        lift[j] = lift[j] - y[j]
    _force(ks, amps, phis, x, scratch)
    for j in range(n):
        y[j] = y[j] - eps * scratch[j]


@njit(cache=True, nogil=True)
def _run(
    ks, amps, phis, eps, y, x, lift, steps, stride,
    ys_out, xs_out, lifts_out, scratch,
):
    """Iterate, recording every stride-th state.  Returns the step index of the
    first non-finite record, or -1 on success."""
    n = y.size
    rec = 0
    for j in range(n):
        ys_out[rec, j] = y[j]
        xs_out[rec, j] = x[j]
        lifts_out[rec, j] = lift[j]
    for step in range(1, steps + 1):
        _step(ks, amps, phis, eps, y, x, lift, scratch)
        if step % stride == 0:
            rec += 1
            ok = True
            for j in range(n):
                ys_out[rec, j] = y[j]
                xs_out[rec, j] = x[j]
                lifts_out[rec, j] = lift[j]
                if not (np.isfinite(y[j]) and np.isfinite(lift[j])):
                    ok = False
            if not ok:
                return step
    return -1


def _check_pair(state: PhaseState, potential: TrigSeries):
    if potential.dimension != state.dimension:
        raise ConfigurationError(
            f"potential dimension {potential.dimension} does not match "
            f"state dimension {state.dimension}"
        )


def _kernel_args(potential: TrigSeries):
    return potential.wave_vectors, potential.amplitudes, potential.phases


def map_step(state: PhaseState, potential: TrigSeries, eps: float) -> PhaseState:
    """One forward step: y+ = y - eps dV/dx(x), x+ = x + y+ (lift updated first)."""
    _check_pair(state, potential)
    if eps < 0:
        raise ConfigurationError("eps must be >= 0")
    y = state.y.copy()
    x = state.x.copy()
    lift = state.x_lift.copy()
    _step(*_kernel_args(potential), eps, y, x, lift, np.empty_like(y))
    return PhaseState(y, x, lift)


def inverse_step(state: PhaseState, potential: TrigSeries, eps: float) -> PhaseState:
    """The exact inverse of :func:`map_step`."""
    _check_pair(state, potential)
    if eps < 0:
        raise ConfigurationError("eps must be >= 0")
    y = state.y.copy()
    x = state.x.copy()
    lift = state.x_lift.copy()
    _unstep(*_kernel_args(potential), eps, y, x, lift, np.empty_like(y))
    return PhaseState(y, x, lift)


@dataclass(frozen=True)
class Orbit:
    """A recorded trajectory: states every ``stride`` steps, lift maintained."""

    eps: float
    stride: int
    ys: np.ndarray
    xs: np.ndarray
    x_lifts: np.ndarray
    potential: TrigSeries = field(repr=False, default=None)

    def __post_init__(self):
        if len(self.ys) < 2:
            raise ConfigurationError("an orbit must contain at least 2 states")
        if not (self.ys.shape == self.xs.shape == self.x_lifts.shape):
            raise ConfigurationError("ys, xs, x_lifts must have the same shape")

    def __len__(self) -> int:
        return len(self.ys)

    @property
    def dimension(self) -> int:
        return self.ys.shape[1]

    @property
    def steps(self) -> int:
        """Number of raw map steps covered by the record."""
        return (len(self.ys) - 1) * self.stride

    def state(self, i: int) -> PhaseState:
        return PhaseState(self.ys[i].copy(), self.xs[i].copy(),
                          self.x_lifts[i].copy())

    @property
    def initial(self) -> PhaseState:
        return self.state(0)

    @property
    def final(self) -> PhaseState:
        return self.state(len(self.ys) - 1)


def iterate(
    initial: PhaseState,
    potential: TrigSeries,
    eps: float,
    steps: int,
    stride: int = 1,
) -> Orbit:
    """Record an orbit of ``steps`` map steps, keeping every stride-th state.

    Raises
    ------
    OrbitDivergenceError
        If a non-finite state appears; the exception carries the step index.
    """
    _check_pair(initial, potential)
    if eps < 0:
        raise ConfigurationError("eps must be >= 0")
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    if stride < 1:
        raise ConfigurationError("stride must be >= 1")
    if steps % stride != 0:
        raise ConfigurationError("steps must be a multiple of stride")
    n_rec = steps // stride + 1
    ys = np.empty((n_rec, initial.dimension))
    xs = np.empty((n_rec, initial.dimension))
    lifts = np.empty((n_rec, initial.dimension))
    y = initial.y.copy()
    x = initial.x.copy()
    lift = initial.x_lift.copy()
    bad = _run(
        *_kernel_args(potential), eps, y, x, lift, steps, stride, ys, xs, lifts,
        np.empty_like(y),
    )
    if bad >= 0:
        raise OrbitDivergenceError(int(bad))
    return Orbit(eps=float(eps), stride=int(stride), ys=ys, xs=xs, x_lifts=lifts,
                 potential=potential)


def jacobian_determinant(
    state: PhaseState, potential: TrigSeries, eps: float, h: float = 1e-5
) -> float:
    """Central finite-difference Jacobian determinant of one map step.

    Differentiation is done in (y, x_lift) coordinates, where the step is
    smooth (no mod-2pi jumps).  Symplecticity means the result is 1 up to
    O(h^2) truncation plus roundoff.
    """
    if h <= 0:
        raise ConfigurationError("finite-difference step h must be > 0")
    _check_pair(state, potential)
    n = state.dimension
    base = np.concatenate([state.y, state.x_lift])

    def image(z):
        s = PhaseState.from_lift(z[:n], z[n:])
        out = map_step(s, potential, eps)
        return np.concatenate([out.y, out.x_lift])

    jac = np.empty((2 * n, 2 * n))
    for j in range(2 * n):
        zp = base.copy()
        zm = base.copy()
        zp[j] += h
        zm[j] -= h
        jac[:, j] = (image(zp) - image(zm)) / (2.0 * h)
    return float(np.linalg.det(jac))
