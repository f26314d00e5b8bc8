"""Real trigonometric polynomials on the N-torus.

A series is a finite sum of terms ``a * cos(<k, x> + phi)`` with integer
wave vectors ``k``.  Terms are kept in a canonical form: the representative
``k`` has positive first nonzero entry (flipping ``k`` negates the phase),
amplitudes are nonnegative, and no two terms share a wave vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

TWO_PI = 2.0 * np.pi


def _canonical_term(k, amplitude, phase):
    """Return (k, a, phi) with canonical sign conventions, or None if a == 0."""
    k = np.asarray(k, dtype=np.int64)
    a = float(amplitude)
    phi = float(phase)
    if a == 0.0:
        return None
    nz = np.nonzero(k)[0]
    if nz.size and k[nz[0]] < 0:
        # a cos(-<k,x> + phi) = a cos(<k,x> - phi)
        k = -k
        phi = -phi
    if a < 0.0:
        a = -a
        phi = phi + np.pi
    if nz.size == 0:
        # constant term: collapse to value * cos(0)
        value = a * np.cos(phi)
        if value == 0.0:
            return None
        return k, abs(value), (0.0 if value > 0.0 else np.pi)
    phi = np.remainder(phi + np.pi, TWO_PI) - np.pi  # phase in (-pi, pi]
    if phi == -np.pi:
        phi = np.pi
    return k, a, phi


@dataclass(frozen=True)
class TrigSeries:
    """Finite real cosine series ``sum_t a_t cos(<k_t, x> + phi_t)`` on T^N.

    Parameters
    ----------
    dimension : int
        Number of angle variables N.
    wave_vectors : (T, N) int array
        Integer wave vectors, one row per term.
    amplitudes : (T,) float array
    phases : (T,) float array
    """

    dimension: int
    wave_vectors: np.ndarray = field(default=None)
    amplitudes: np.ndarray = field(default=None)
    phases: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError("dimension must be >= 1")
        ks = self.wave_vectors
        if ks is None:
            ks = np.zeros((0, self.dimension), dtype=np.int64)
            object.__setattr__(self, "wave_vectors", ks)
            object.__setattr__(self, "amplitudes", np.zeros(0))
            object.__setattr__(self, "phases", np.zeros(0))
        ks = np.asarray(ks, dtype=np.int64).reshape(-1, self.dimension)
        amps = np.asarray(self.amplitudes, dtype=float).ravel()
        phis = np.asarray(self.phases, dtype=float).ravel()
        if not (len(ks) == len(amps) == len(phis)):
            raise ConfigurationError("term arrays must have equal length")
        merged: dict[tuple, complex] = {}
        scale: dict[tuple, float] = {}
        order: list[tuple] = []
        for k, a, phi in zip(ks, amps, phis):
            a = float(a)
            phi = float(phi)
            if a == 0.0:
                continue
            nz = np.nonzero(k)[0]
            if nz.size and k[nz[0]] < 0:
                # a cos(-<k,x> + phi) = a cos(<k,x> - phi)
                k = -k
                phi = -phi
            key = tuple(int(v) for v in k)
            if key not in merged:
                merged[key] = 0.0 + 0.0j
                scale[key] = 0.0
                order.append(key)
            # signed amplitude keeps exact cancellation of identical terms
            merged[key] += a * np.exp(1j * phi) if phi != 0.0 else complex(a)
            scale[key] += abs(a)
        rows, ra, rp = [], [], []
        for key in sorted(order, key=lambda t: (max(abs(v) for v in t) if t else 0, t)):
            z = merged[key]
            if any(key):
                a, phi = abs(z), float(np.angle(z))
            else:
                a, phi = abs(z.real), (0.0 if z.real >= 0.0 else np.pi)
            if a == 0.0 or a < 1e-14 * scale[key]:
                continue
            canon = _canonical_term(np.array(key), a, phi)
            if canon is None:
                continue
            kc, ac, pc = canon
            rows.append(kc)
            ra.append(ac)
            rp.append(pc)
        if rows:
            object.__setattr__(self, "wave_vectors", np.array(rows, dtype=np.int64))
        else:
            object.__setattr__(
                self, "wave_vectors", np.zeros((0, self.dimension), dtype=np.int64)
            )
        object.__setattr__(self, "amplitudes", np.array(ra, dtype=float))
        object.__setattr__(self, "phases", np.array(rp, dtype=float))
        self.wave_vectors.setflags(write=False)
        self.amplitudes.setflags(write=False)
        self.phases.setflags(write=False)

    @classmethod
    def from_terms(cls, dimension: int, terms) -> "TrigSeries":
        """Build a series from an iterable of (k, amplitude, phase) triples."""
        if not terms:
            return cls(dimension)
        ks = np.array([t[0] for t in terms], dtype=np.int64)
        if ks.ndim != 2 or ks.shape[1] != dimension:
            raise ConfigurationError(
                f"wave vectors must have length {dimension}, got shape {ks.shape}"
            )
        amps = np.array([t[1] for t in terms], dtype=float)
        phis = np.array([t[2] for t in terms], dtype=float)
        return cls(dimension, ks, amps, phis)

    @property
    def n_terms(self) -> int:
        return len(self.amplitudes)

    @property
    def constant_term(self) -> float:
        """Value of the k = 0 term (the torus average of the series)."""
        for k, a, phi in zip(self.wave_vectors, self.amplitudes, self.phases):
            if not k.any():
                return float(a * np.cos(phi))
        return 0.0

    def terms(self):
        """Iterate over canonical (k, amplitude, phase) triples."""
        for k, a, phi in zip(self.wave_vectors, self.amplitudes, self.phases):
            yield k.copy(), float(a), float(phi)

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points x of shape (..., N)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ConfigurationError(
                f"points have dimension {x.shape[-1]}, series has {self.dimension}"
            )
        if self.n_terms == 0:
            return np.zeros(x.shape[:-1])
        args = x @ self.wave_vectors.T.astype(float) + self.phases
        return np.cos(args) @ self.amplitudes

    def gradient(self, x) -> np.ndarray:
        """Evaluate the gradient at points x of shape (..., N); returns (..., N)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ConfigurationError(
                f"points have dimension {x.shape[-1]}, series has {self.dimension}"
            )
        if self.n_terms == 0:
            return np.zeros(x.shape)
        args = x @ self.wave_vectors.T.astype(float) + self.phases
        # d/dx_j of a cos(<k,x>+phi) = -a k_j sin(<k,x>+phi)
        return -(np.sin(args) * self.amplitudes) @ self.wave_vectors.astype(float)

    def partial(self, axis: int) -> "TrigSeries":
        """The partial derivative along one angle, as a new series."""
        if not 0 <= axis < self.dimension:
            raise ConfigurationError(f"axis {axis} out of range")
        terms = [
            (k, -a * k[axis], phi - np.pi / 2.0)
            for k, a, phi in self.terms()
            if k[axis] != 0
        ]
        # -a k sin(t+phi) = -a k cos(t+phi-pi/2)
        return TrigSeries.from_terms(self.dimension, terms)

    def shifted(self, shift) -> "TrigSeries":
        """The series x -> f(x + shift)."""
        shift = np.asarray(shift, dtype=float)
        terms = [(k, a, phi + float(k @ shift)) for k, a, phi in self.terms()]
        return TrigSeries.from_terms(self.dimension, terms)

    def __add__(self, other: "TrigSeries") -> "TrigSeries":
        if other.dimension != self.dimension:
            raise ConfigurationError("dimension mismatch in series addition")
        return TrigSeries(
            self.dimension,
            np.vstack([self.wave_vectors, other.wave_vectors]),
            np.concatenate([self.amplitudes, other.amplitudes]),
            np.concatenate([self.phases, other.phases]),
        )

    def __sub__(self, other: "TrigSeries") -> "TrigSeries":
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> "TrigSeries":
        return TrigSeries(
            self.dimension,
            self.wave_vectors.copy(),
            float(scalar) * self.amplitudes,
            self.phases.copy(),
        )

    def __repr__(self):
        parts = [
            f"{a:g}*cos({'+'.join(f'{v:+d}x{j + 1}' for j, v in enumerate(k) if v)}"
            f"{phi:+g})"
            for k, a, phi in self.terms()
        ]
        return f"TrigSeries(N={self.dimension}: " + (" + ".join(parts) or "0") + ")"


def three_wave_potential(amplitudes=(1.0, 1.0, 1.0), phases=(0.0, 0.0, 0.0)) -> TrigSeries:
    """The standard two-angle coupling potential.

    ``a1 cos(x1 + p1) + a2 cos(x2 + p2) + a3 cos(x1 - x2 + p3)``
    """
    a1, a2, a3 = amplitudes
    p1, p2, p3 = phases
    return TrigSeries.from_terms(
        2, [((1, 0), a1, p1), ((0, 1), a2, p2), ((1, -1), a3, p3)]
    )
