"""CSV / JSON serialization with byte-deterministic output.

Floats are written with Python's repr (the shortest representation that
round-trips exactly), so emitted files are stable across runs and the
orbit CSV reproduces the stored state bit for bit.
"""

from __future__ import annotations

import io
import json

import numpy as np

from .classify import OrbitClass
from .engine import Orbit
from .errors import ConfigurationError
from .survey import LABEL_ORDER, SurveyResult
from .trig import TWO_PI

__all__ = [
    "orbit_to_csv",
    "orbit_from_csv",
    "classification_to_json",
    "survey_to_csv",
    "survey_to_json",
    "ledger_to_json",
    "dumps_json",
]


def dumps_json(payload) -> str:
    """Deterministic JSON text: fixed key order, repr floats, newline at end."""
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def orbit_to_csv(orbit: Orbit) -> str:
    """Header y1..yN,x1..xN; the angle columns hold the continuous lift
    (reduced angles are the lift mod 2 pi)."""
    n = orbit.dimension
    buf = io.StringIO()
    head = [f"y{j + 1}" for j in range(n)] + [f"x{j + 1}" for j in range(n)]
    buf.write(",".join(head) + "\n")
    for y, lift in zip(orbit.ys, orbit.x_lifts):
        row = [repr(float(v)) for v in y] + [repr(float(v)) for v in lift]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def orbit_from_csv(text: str, eps: float = 0.0, stride: int = 1) -> Orbit:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if len(lines) < 3:
        raise ConfigurationError("orbit CSV needs a header and at least 2 rows")
    head = lines[0].split(",")
    if len(head) % 2 or not head[0].startswith("y"):
        raise ConfigurationError("orbit CSV header must be y1..yN,x1..xN")
    n = len(head) // 2
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.shape[1] != 2 * n:
        raise ConfigurationError("orbit CSV row width does not match header")
    lifts = data[:, n:]
    return Orbit(
        eps=eps,
        stride=stride,
        ys=data[:, :n],
        xs=np.remainder(lifts, TWO_PI),
        x_lifts=lifts,
    )


def classification_to_json(result: OrbitClass) -> str:
    return dumps_json(result.to_dict())


def survey_to_csv(result: SurveyResult) -> str:
    """One row per (eps, label): eps,label,count,fraction,stderr."""
    buf = io.StringIO()
    buf.write("eps,label,count,fraction,stderr\n")
    for i, eps in enumerate(result.eps_values):
        for j, label in enumerate(LABEL_ORDER):
            buf.write(
                f"{float(eps)!r},{label.value},{int(result.counts[i, j])},"
                f"{float(result.fractions[i, j])!r},"
                f"{float(result.stderrs[i, j])!r}\n"
            )
    return buf.getvalue()


def survey_to_json(result: SurveyResult) -> str:
    rows = []
    for i, eps in enumerate(result.eps_values):
        rows.append(
            {
                "eps": float(eps),
                "counts": {
                    label.value: int(result.counts[i, j])
                    for j, label in enumerate(LABEL_ORDER)
                },
                "fractions": {
                    label.value: float(result.fractions[i, j])
                    for j, label in enumerate(LABEL_ORDER)
                },
                "stderrs": {
                    label.value: float(result.stderrs[i, j])
                    for j, label in enumerate(LABEL_ORDER)
                },
            }
        )
    fit = None
    if result.chaotic_fit is not None:
        fit = {
            "exponent": result.chaotic_fit.exponent,
            "intercept": result.chaotic_fit.intercept,
            "residual": result.chaotic_fit.residual,
            "exponent_stderr": result.chaotic_fit.exponent_stderr,
        }
    return dumps_json(
        {
            "seed": result.seed,
            "config_digest": result.config_digest,
            "rows": rows,
            "chaotic_fit": fit,
        }
    )


def ledger_to_json(report) -> str:
    return dumps_json(report.to_dict())
