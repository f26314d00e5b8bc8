"""First-order torus shapes in the action plane vs. observed orbits.

Solves the averaging equation for the potential at an observed orbit's
mean frequency and overlays the predicted cloud Y0 + sqrt(eps) S_x(X) on
the orbit's action projection: the sqrt(eps)-sized folded curve the orbit
traces is reproduced by the first-order formula.  Restricting the phases
to an interval of the resonant combination produces the ribbon shape.
"""

import os

import numpy as np

from twistmap import (
    PhaseState,
    ResonanceModule,
    first_order_projection,
    iterate,
    solve_cohomological,
    three_wave_potential,
)
from twistmap.render import PlotSpec, render_action_projection

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

V = three_wave_potential()
EPS = 0.01

# a KAM orbit and its first-order prediction
y0 = np.array([2.677, 1.655])
orbit = iterate(PhaseState.from_lift(y0, [1.1, 2.3]), V, EPS, 200_000, stride=20)
solution = solve_cohomological(V, y0, ResonanceModule.trivial(2), convention="map")
cloud = first_order_projection(y0, solution.series, EPS,
                               ResonanceModule.trivial(2), samples=64)
svg = render_action_projection(
    orbit, PlotSpec(width=720, height=720, point_radius=1.0,
                    title="torus projection vs first-order cloud"),
    overlay_points=cloud,
)
with open(os.path.join(OUT, "first_order_torus.svg"), "w") as fh:
    fh.write(svg)

spread = np.abs(orbit.ys - y0).max()
predicted = np.abs(cloud - y0).max()
print(f"observed action spread  {spread:.4f}")
print(f"predicted cloud extent  {predicted:.4f} (both are O(sqrt(eps)))")

# the ribbon: same formula restricted to the oscillation window of the
# resonant phase q = x1 - x2
module = ResonanceModule.from_vectors(2, [(1, -1)])
y_rib = np.array([2.2, 2.2])
ribbon_orbit = iterate(PhaseState.from_lift(y_rib, [np.pi + 0.8, 0.0]),
                       V, EPS, 200_000, stride=20)
sol_rib = solve_cohomological(V, y_rib + np.array([1e-3, -1e-3]), module,
                              convention="map")
band = first_order_projection(
    y_rib, sol_rib.series, EPS, module, samples=96,
    oscillation_window=(np.pi - 0.8, np.pi + 0.8),
)
svg = render_action_projection(
    ribbon_orbit, PlotSpec(width=720, height=720, point_radius=1.0,
                           title="ribbon vs first-order band"),
    overlay_points=band,
)
with open(os.path.join(OUT, "first_order_ribbon.svg"), "w") as fh:
    fh.write(svg)
print("wrote first_order_torus.svg and first_order_ribbon.svg")
