"""Gallery of action-plane projections at eps = 0.1.

Iterates one initial condition per regime (an ordinary torus, a librating
ribbon near the (1,-1) resonance, an orbit at a totally elliptic double
resonance, and a chaotic orbit seeded on a separatrix) and writes one SVG
per regime plus the classifier's verdicts.

Run from the repository root:  python demos/01_action_plane_gallery.py
Outputs land in demos/out/.
"""

import os

import numpy as np

from twistmap import PhaseState, classify, iterate, three_wave_potential
from twistmap.render import PlotSpec, render_action_projection

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

V = three_wave_potential((1.0, 1.0, 1.0), (0.0, 0.0, 0.0))
EPS = 0.1

REGIMES = {
    "torus": ((2.677, 1.655), (1.1, 2.3)),
    "ribbon": ((2.2, 2.2), (np.pi + 0.8, 0.0)),
    "spots": ((0.02, -0.01), (2 * np.pi / 3 + 0.1, 4 * np.pi / 3)),
    "chaotic": ((2.2, 2.2), (0.1, 0.0)),
}

for name, (y0, x0) in REGIMES.items():
    orbit = iterate(PhaseState.from_lift(y0, x0), V, EPS, 400_000, stride=50)
    verdict = classify(orbit)
    svg = render_action_projection(
        orbit,
        PlotSpec(width=720, height=720, point_radius=0.9,
                 title=f"{name}: {verdict.label.value}"),
    )
    path = os.path.join(OUT, f"actions_{name}.svg")
    with open(path, "w") as fh:
        fh.write(svg)
    print(f"{name:8s} -> {verdict.label.value:10s} drift={verdict.drift:.2e}  {path}")
