"""Independent numerical oracles used only by the test suite.

These implementations deliberately avoid the code paths they check: the
complete elliptic integrals use the arithmetic-geometric mean, not
quadrature, and brute-force scans replace Newton refinement.
"""

import numpy as np


def agm_elliptic(m: float):
    """Complete elliptic integrals (K(m), E(m)) with parameter m = modulus^2."""
    if not 0.0 <= m < 1.0:
        raise ValueError("parameter m must lie in [0, 1)")
    a, b = 1.0, np.sqrt(1.0 - m)
    c = np.sqrt(m)
    s = 0.5 * c * c
    power = 1.0
    for _ in range(80):
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        power *= 2.0
        s += 0.5 * power * c * c
        # once c hits roundoff it stalls at ~1 ulp while the 2^n weight
        # keeps growing; stop as soon as the remaining true terms are
        # negligible
        if abs(c) < 1e-10:
            break
    big_k = np.pi / (2.0 * a)
    big_e = big_k * (1.0 - s)
    return big_k, big_e


def pendulum_action_reference(energy: float) -> float:
    """I(E) for h = p^2/2 - cos q via the classical elliptic-integral formula."""
    m = (energy + 1.0) / 2.0
    big_k, big_e = agm_elliptic(m)
    return (8.0 / np.pi) * (big_e - (1.0 - m) * big_k)


def pendulum_period_reference(energy: float) -> float:
    """T(E) = 4 K(m) for h = p^2/2 - cos q."""
    m = (energy + 1.0) / 2.0
    big_k, _ = agm_elliptic(m)
    return 4.0 * big_k


def brute_force_extrema(fn, n: int = 1_000_000):
    """Global extrema of a 2-pi-periodic callable: dense scan + parabola fit."""
    step = 2.0 * np.pi / n
    q = np.arange(n) * step
    v = fn(q)

    def refine(i):
        vm, v0, vp = v[(i - 1) % n], v[i], v[(i + 1) % n]
        denom = vm - 2.0 * v0 + vp
        if denom == 0.0:
            return q[i]
        return q[i] + 0.5 * step * (vm - vp) / denom

    return refine(int(np.argmin(v))), refine(int(np.argmax(v)))
