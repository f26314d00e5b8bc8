"""Resonance detection and single-resonance surface geometry.

A frequency vector nu is resonant for an integer vector K when <K, nu> = 0
(flow convention) or when <k, nu> is an integer multiple of 2 pi (map
convention, with the multiple k0 recorded alongside k).  Detected
resonances generate an integer module whose rank is computed with an exact
Hermite-normal-form reduction over the integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, GeometryError, LightLikeResonanceError

TWO_PI = 2.0 * math.pi

__all__ = [
    "ResonanceModule",
    "Resonance",
    "ResonanceReport",
    "detect_resonances",
    "SingleResonanceGeometry",
    "build_geometry",
    "integer_rank",
]


# ---------------------------------------------------------------------------
# Exact integer linear algebra (Python ints, no overflow)
# ---------------------------------------------------------------------------

def _row_hnf(rows):
    """Hermite-style row basis of the lattice spanned by integer rows.

    Returns a list of rows with strictly increasing pivot columns, positive
    pivots, and entries above each pivot reduced into [0, pivot).
    """
    work = [list(int(v) for v in r) for r in rows if any(r)]
    if not work:
        return []
    n = len(work[0])
    basis = []
    for col in range(n):
        sel = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0 and any(r)]
        if not sel:
            work = rest
            continue
        while len(sel) > 1:
            sel.sort(key=lambda r: abs(r[col]))
            r0 = sel[0]
            reduced = [r0]
            for r in sel[1:]:
                q = r[col] // r0[col]
                rr = [a - q * b for a, b in zip(r, r0)]
                if rr[col] != 0:
                    reduced.append(rr)
                elif any(rr):
                    rest.append(rr)
            sel = reduced
        piv = sel[0]
        if piv[col] < 0:
            piv = [-v for v in piv]
        basis.append(piv)
        work = rest
    for i in reversed(range(len(basis))):
        pcol = next(j for j, v in enumerate(basis[i]) if v != 0)
        p = basis[i][pcol]
        for k in range(i):
            q = basis[k][pcol] // p
            if q:
                basis[k] = [a - q * b for a, b in zip(basis[k], basis[i])]
    return basis


def _primitive_basis(rows):
    """Row HNF iterated with per-row gcd division until every row is primitive."""
    basis = _row_hnf(rows)
    while True:
        divided = False
        out = []
        for r in basis:
            g = 0
            for v in r:
                g = math.gcd(g, abs(v))
            if g > 1:
                r = [v // g for v in r]
                divided = True
            out.append(r)
        if not divided:
            return basis
        basis = _row_hnf(out)


def integer_rank(vectors) -> int:
    """Exact rank over Z of a collection of integer vectors."""
    vecs = [list(map(int, v)) for v in vectors]
    if not vecs:
        return 0
    return len(_row_hnf(vecs))


# ---------------------------------------------------------------------------
# Resonance module
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceModule:
    """Integer module of resonance vectors, stored as canonical generators.

    ``generators`` is an N x l integer matrix whose columns generate the
    module; columns have coprime entries and positive leading entry.
    Membership of an arbitrary integer vector is decided exactly by
    reduction against the Hermite-form basis.
    """

    dimension: int
    generators: np.ndarray = field(default=None)

    def __post_init__(self):
        gens = self.generators
        if gens is None:
            gens = np.zeros((self.dimension, 0), dtype=np.int64)
        gens = np.asarray(gens, dtype=np.int64)
        if gens.ndim != 2 or gens.shape[0] != self.dimension:
            raise ConfigurationError(
                f"generators must be shaped ({self.dimension}, l)"
            )
        basis = _primitive_basis(gens.T.tolist())
        canon = (
            np.array(basis, dtype=np.int64).T
            if basis
            else np.zeros((self.dimension, 0), dtype=np.int64)
        )
        object.__setattr__(self, "generators", canon)
        self.generators.setflags(write=False)

    @classmethod
    def from_vectors(cls, dimension: int, vectors) -> "ResonanceModule":
        vecs = [list(map(int, v)) for v in vectors]
        if any(len(v) != dimension for v in vecs):
            raise ConfigurationError("generator length does not match dimension")
        if not vecs:
            return cls(dimension)
        return cls(dimension, np.array(vecs, dtype=np.int64).T)

    @classmethod
    def trivial(cls, dimension: int) -> "ResonanceModule":
        """The zero module (no resonances)."""
        return cls(dimension)

    @classmethod
    def full(cls, dimension: int) -> "ResonanceModule":
        """All of Z^N."""
        return cls(dimension, np.eye(dimension, dtype=np.int64))

    @property
    def rank(self) -> int:
        return self.generators.shape[1]

    def contains(self, k) -> bool:
        """Exact membership test: is k an integer combination of generators?"""
        v = [int(x) for x in np.asarray(k).ravel()]
        if len(v) != self.dimension:
            raise ConfigurationError("vector length does not match module dimension")
        for col in range(self.rank):
            row = self.generators[:, col]
            pcol = int(np.nonzero(row)[0][0])
            piv = int(row[pcol])
            q = v[pcol] // piv
            if q:
                for j in range(self.dimension):
                    v[j] -= q * int(row[j])
        return not any(v)


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Resonance:
    """One detected resonance: integer vector k, multiplier k0, and defect."""

    k: tuple
    k0: int
    defect: float


@dataclass(frozen=True)
class ResonanceReport:
    nu: np.ndarray
    found: tuple
    module: ResonanceModule
    n_max: int
    tolerance: float
    convention: str


@lru_cache(maxsize=16)
def _candidate_table(dimension: int, n_max: int):
    """Canonical-sign integer vectors with sup-norm in [1, n_max], graded-lex order."""
    grids = np.meshgrid(
        *([np.arange(-n_max, n_max + 1)] * dimension), indexing="ij"
    )
    ks = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    norms = np.abs(ks).max(axis=1)
    keep = norms > 0
    ks, norms = ks[keep], norms[keep]
    lead = np.zeros(len(ks), dtype=bool)
    for j in range(dimension):
        undecided = ~lead & (ks[:, :j].astype(bool).sum(axis=1) == 0)
        lead |= undecided & (ks[:, j] > 0)
    ks, norms = ks[lead], norms[lead]
    order = np.lexsort(tuple(ks[:, j] for j in reversed(range(dimension))) + (norms,))
    ks = ks[order]
    norms = norms[order]
    gcds = np.gcd.reduce(np.abs(ks), axis=1)
    return ks, norms, gcds


def detect_resonances(
    nu,
    n_max: int = 12,
    tolerance: float = 1e-9,
    convention: str = "map",
) -> ResonanceReport:
    """Exhaustively scan integer vectors with sup-norm <= n_max for resonances.

    Flow convention: defect = |<k, nu>|.  Map convention: defect =
    |<k, nu> - 2 pi k0| minimized over the integer k0 (|k0| <= n_max, and
    the full vector (k, k0) must be primitive).  The report lists every
    resonance with defect <= tolerance in graded lexicographic order and
    carries the integer module generated by the k parts.
    """
    nu = np.asarray(nu, dtype=float).ravel()
    if n_max < 1:
        raise ConfigurationError("n_max must be >= 1")
    if tolerance <= 0:
        raise ConfigurationError("tolerance must be > 0")
    if convention not in ("flow", "map"):
        raise ConfigurationError("convention must be 'flow' or 'map'")
    ks, _, gcds = _candidate_table(nu.size, n_max)
    raw = ks @ nu
    if convention == "flow":
        k0s = np.zeros(len(ks), dtype=np.int64)
        defects = np.abs(raw)
        primitive = gcds == 1
    else:
        k0s = np.rint(raw / TWO_PI).astype(np.int64)
        defects = np.abs(raw - TWO_PI * k0s)
        primitive = np.gcd(gcds, np.abs(k0s)) == 1
        primitive &= np.abs(k0s) <= n_max
    hits = (defects <= tolerance) & primitive
    found = tuple(
        Resonance(tuple(int(v) for v in ks[i]), int(k0s[i]), float(defects[i]))
        for i in np.nonzero(hits)[0]
    )
    module = ResonanceModule.from_vectors(nu.size, [r.k for r in found])
    return ResonanceReport(
        nu=nu.copy(),
        found=found,
        module=module,
        n_max=n_max,
        tolerance=tolerance,
        convention=convention,
    )


# ---------------------------------------------------------------------------
# Single-resonance geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleResonanceGeometry:
    """Geometry of one resonance surface {<K0, nu(Y)> = target}.

    ``stiffness`` is A = <K0, Pi K0> with Pi the frequency-map Jacobian
    (the Hessian of the integrable part).  ``lambda_of`` measures the
    signed distance to the surface in units of K0, and ``chi_of`` projects
    onto the surface along K0.
    """

    k0_vector: np.ndarray
    hessian: np.ndarray
    stiffness: float
    target: float = 0.0
    frequency_map: object = None  # None means identity: nu(Y) = Y
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def nu(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.frequency_map is None:
            return y
        return np.asarray(self.frequency_map(y), dtype=float)

    def lambda_of(self, y) -> float:
        """Solve <K0, nu(Y - lambda K0)> = target for lambda."""
        y = np.asarray(y, dtype=float).ravel()
        k = self.k0_vector.astype(float)
        if self.frequency_map is None:
            # nu(Y) = Y: exact closed form
            return (float(k @ y) - self.target) / self.stiffness
        lam = (float(k @ self.nu(y)) - self.target) / self.stiffness
        for _ in range(self.newton_max_iter):
            g = float(k @ self.nu(y - lam * k)) - self.target
            if abs(g) <= self.newton_tol:
                return lam
            lam += g / self.stiffness
        raise GeometryError(
            f"Newton iteration for lambda(Y) did not reach {self.newton_tol:g} "
            f"in {self.newton_max_iter} iterations"
        )

    def chi_of(self, y) -> np.ndarray:
        """Project Y onto the resonance surface along K0."""
        y = np.asarray(y, dtype=float).ravel()
        return y - self.lambda_of(y) * self.k0_vector.astype(float)


def build_geometry(
    k0,
    hessian=None,
    frequency_map=None,
    target: float = 0.0,
) -> SingleResonanceGeometry:
    """Construct the geometry of the resonance surface of the vector k0.

    Parameters
    ----------
    k0 : integer vector (coprime entries)
    hessian : (N, N) array, optional
        Jacobian of the frequency map (identity if omitted).
    frequency_map : callable Y -> nu(Y), optional
        Identity if omitted (quadratic integrable part, nu = Y).
    target : float
        Right-hand side of the surface equation; use 2 pi k0 for the map
        convention of a resonance with nonzero multiplier.
    """
    k0 = np.asarray(k0, dtype=np.int64).ravel()
    if not k0.any():
        raise ConfigurationError("k0 must be nonzero")
    g = int(np.gcd.reduce(np.abs(k0)[np.abs(k0) > 0]))
    if g != 1:
        raise ConfigurationError("k0 entries must be coprime")
    n = k0.size
    pi_mat = np.eye(n) if hessian is None else np.asarray(hessian, dtype=float)
    if pi_mat.shape != (n, n):
        raise ConfigurationError("hessian shape does not match k0")
    stiffness = float(k0.astype(float) @ pi_mat @ k0.astype(float))
    if stiffness == 0.0 or not np.isfinite(stiffness):
        raise LightLikeResonanceError(
            f"<K0, Pi K0> = {stiffness}: light-like resonance vector {tuple(k0)}"
        )
    return SingleResonanceGeometry(
        k0_vector=k0,
        hessian=pi_mat,
        stiffness=stiffness,
        target=float(target),
        frequency_map=frequency_map,
    )
