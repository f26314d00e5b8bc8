"""Flat key = value run configuration with full-file validation.

Grammar, one statement per line:

    # comment                     blank lines and '#' comments are skipped
    key = value

Value forms (the schema fixes which form each key takes):

    int        42
    float      0.1, 1e-4
    bool       true / false
    str        bare text to end of line
    vector     [0.3, 0.4]
    ivector    [1, -1]
    term       [1, 0] 1.0 0.0       (wave vector, amplitude, phase; repeatable)
    ic         [0.3, 0.4] [1.0, 2.0]  (actions, angles; repeatable)

A potential is given either through the ``a`` / ``phi`` shorthand (the
two-angle three-wave form) or through explicit ``term`` lines.  Parsing
collects every error (with its line number) instead of stopping at the
first.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import TwistmapError
from .trig import TWO_PI, TrigSeries

__all__ = ["RunConfig", "ConfigValidationError", "parse_config", "COMMANDS"]

COMMANDS = ("simulate", "classify", "pendulum", "survey", "kamcheck", "render")


class ConfigValidationError(TwistmapError):
    """All validation problems of a config document, with line numbers."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "\n".join(f"  line {ln}: {msg}" if ln else f"  {msg}"
                          for ln, msg in self.errors)
        super().__init__(f"invalid configuration:\n{lines}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: dict
    potential: TrigSeries | None = field(default=None, repr=False)


_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_BRACKET = re.compile(r"\[([^\]]*)\]")


def _parse_bracket(text: str, want_int: bool):
    inner = text.strip()[1:-1].strip()
    if not inner:
        return []
    out = []
    for tok in inner.split(","):
        tok = tok.strip()
        if want_int:
            if not re.fullmatch(r"[+-]?\d+", tok):
                raise ValueError(f"expected an integer, got {tok!r}")
            out.append(int(tok))
        else:
            if not re.fullmatch(_NUMBER, tok):
                raise ValueError(f"expected a number, got {tok!r}")
            out.append(float(tok))
    return out


def _convert(kind: str, raw: str):
    raw = raw.strip()
    if kind == "int":
        if not re.fullmatch(r"[+-]?\d+", raw):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(raw)
    if kind == "float":
        if not re.fullmatch(_NUMBER, raw):
            raise ValueError(f"expected a number, got {raw!r}")
        return float(raw)
    if kind == "bool":
        if raw.lower() in ("true", "yes", "1"):
            return True
        if raw.lower() in ("false", "no", "0"):
            return False
        raise ValueError(f"expected true/false, got {raw!r}")
    if kind == "str":
        if not raw:
            raise ValueError("expected a value")
        return raw
    if kind in ("vector", "ivector"):
        m = _BRACKET.fullmatch(raw)
        if not m:
            raise ValueError(f"expected a bracketed list, got {raw!r}")
        return _parse_bracket(raw, want_int=(kind == "ivector"))
    if kind == "term":
        m = _BRACKET.match(raw)
        if not m:
            raise ValueError("term must look like: [k1, k2, ...] amplitude phase")
        k = _parse_bracket(m.group(0), want_int=True)
        rest = raw[m.end():].split()
        if len(rest) != 2:
            raise ValueError("term needs exactly an amplitude and a phase")
        if not all(re.fullmatch(_NUMBER, tok) for tok in rest):
            raise ValueError(f"bad amplitude/phase in {raw!r}")
        return (k, float(rest[0]), float(rest[1]))
    if kind == "ic":
        parts = _BRACKET.findall(raw)
        brackets = _BRACKET.finditer(raw)
        spans = [m.group(0) for m in brackets]
        if len(parts) != 2 or len(spans) != 2:
            raise ValueError("ic must look like: [y1, y2] [x1, x2]")
        y = _parse_bracket(spans[0], want_int=False)
        x = _parse_bracket(spans[1], want_int=False)
        return (y, x)
    raise AssertionError(f"unknown kind {kind}")


# key -> (kind, repeatable)
_POTENTIAL_KEYS = {
    "dim": ("int", False),
    "a": ("vector", False),
    "phi": ("vector", False),
    "term": ("term", True),
}
_CLASSIFIER_KEYS = {
    "drift_threshold": ("float", False),
    "resonance_tolerance_scale": ("float", False),
    "n_max": ("int", False),
    "oscillation_margin": ("float", False),
    "spots_box_scale": ("float", False),
}
_SCHEMAS = {
    "simulate": {
        **_POTENTIAL_KEYS,
        "eps": ("float", False),
        "y0": ("vector", False),
        "x0": ("vector", False),
        "steps": ("int", False),
        "stride": ("int", False),
        "seed": ("int", False),
        "out": ("str", False),
    },
    "classify": {
        **_POTENTIAL_KEYS,
        **_CLASSIFIER_KEYS,
        "eps": ("float", False),
        "y0": ("vector", False),
        "x0": ("vector", False),
        "steps": ("int", False),
        "stride": ("int", False),
        "out": ("str", False),
    },
    "pendulum": {
        **_POTENTIAL_KEYS,
        "eps": ("float", False),
        "resonance": ("ivector", False),
        "resonance_k0": ("int", False),
        "y_sigma": ("vector", False),
        "energies": ("int", False),
        "energy_start": ("float", False),
        "separatrix_band": ("float", False),
        "twist_bound": ("float", False),
        "out": ("str", False),
    },
    "survey": {
        **_POTENTIAL_KEYS,
        **_CLASSIFIER_KEYS,
        "eps_list": ("vector", False),
        "samples": ("int", False),
        "steps": ("int", False),
        "stride": ("int", False),
        "seed": ("int", False),
        "mode": ("str", False),
        "region": ("str", False),
        "y_low": ("vector", False),
        "y_high": ("vector", False),
        "strip_k": ("ivector", False),
        "strip_k0": ("int", False),
        "strip_width": ("float", False),
        "strip_t_range": ("vector", False),
        "box_center": ("vector", False),
        "box_scale": ("float", False),
        "ribbon_separatrix_band": ("float", False),
        "out_csv": ("str", False),
        "out_json": ("str", False),
    },
    "kamcheck": {
        "n": ("int", False),
        "m_max": ("int", False),
        "search": ("bool", False),
        "c_s": ("float", False),
        "c_n": ("float", False),
        "c_lambda": ("float", False),
        "a0": ("float", False),
        "b0": ("float", False),
        "s0": ("float", False),
        "sbar0": ("float", False),
        "c_h": ("float", False),
        "c_h_prime": ("float", False),
        "c_h_bis": ("float", False),
        "c_lam": ("float", False),
        "c_lam_lo": ("float", False),
        "c_lam_hi": ("float", False),
        "c_small": ("float", False),
        "c_psi": ("float", False),
        "c_cut": ("float", False),
        "eps": ("float", False),
        "out": ("str", False),
    },
    "render": {
        **_POTENTIAL_KEYS,
        "mode": ("str", False),
        "eps": ("float", False),
        "y0": ("vector", False),
        "x0": ("vector", False),
        "ic": ("ic", True),
        "steps": ("int", False),
        "stride": ("int", False),
        "width": ("int", False),
        "height": ("int", False),
        "point_radius": ("float", False),
        "axes": ("vector", False),
        "title": ("str", False),
        "overlay": ("bool", False),
        "overlay_samples": ("int", False),
        "resonance": ("ivector", False),
        "resonance_k0": ("int", False),
        "y_sigma": ("vector", False),
        "energies_list": ("vector", False),
        "shade": ("bool", False),
        "out": ("str", False),
    },
}
# keys every command must end up with (from the file or CLI overrides)
_REQUIRED = {
    "simulate": ("eps", "y0", "x0", "steps"),
    "classify": ("eps", "y0", "x0", "steps"),
    "pendulum": ("resonance", "y_sigma"),
    "survey": ("eps_list", "samples"),
    "kamcheck": ("n",),
    "render": ("eps",),
}
_NEEDS_POTENTIAL = ("simulate", "classify", "pendulum", "survey", "render")


def _build_potential(options: dict, lines: dict, errors: list):
    dim = options.pop("dim", 2)
    a = options.pop("a", None)
    phi = options.pop("phi", None)
    terms = options.pop("term", [])
    if a is not None:
        if dim != 2:
            errors.append((lines.get("a", 0),
                           "the a/phi shorthand requires dim = 2"))
            return None
        if len(a) != 3:
            errors.append((lines.get("a", 0), "a must have three amplitudes"))
            return None
        if phi is None:
            phi = [0.0, 0.0, 0.0]
        if len(phi) != 3:
            errors.append((lines.get("phi", 0), "phi must have three phases"))
            return None
        if terms:
            errors.append((lines.get("term", 0),
                           "give either a/phi or term lines, not both"))
            return None
        return three_wave(a, phi)
    if phi is not None:
        errors.append((lines.get("phi", 0), "phi requires a"))
        return None
    if not terms:
        errors.append((0, "no potential: give a/phi or at least one term line"))
        return None
    seen = {}
    ok = True
    for idx, (k, amp, ph) in enumerate(terms):
        if len(k) != dim:
            errors.append((lines.get(("term", idx), 0),
                           f"term wave vector must have length {dim}"))
            ok = False
            continue
        probe = TrigSeries.from_terms(dim, [(k, 1.0, 0.0)])
        if probe.n_terms == 0:
            key = (0,) * dim
        else:
            key = tuple(int(v) for v in probe.wave_vectors[0])
        if key in seen:
            errors.append(
                (
                    lines.get(("term", idx), 0),
                    f"term duplicates the canonical wave vector of line "
                    f"{seen[key]}",
                )
            )
            ok = False
        else:
            seen[key] = lines.get(("term", idx), 0)
    if not ok:
        return None
    return TrigSeries.from_terms(dim, terms)


def three_wave(a, phi) -> TrigSeries:
    from .trig import three_wave_potential

    return three_wave_potential(tuple(a), tuple(phi))


def parse_config(text: str, command: str, overrides: dict | None = None) -> RunConfig:
    """Parse and fully validate a config document for one subcommand.

    ``overrides`` (from CLI flags) are applied after parsing and before
    validation.  Raises ConfigValidationError carrying every problem found,
    each with its line number.
    """
    if command not in COMMANDS:
        raise ConfigValidationError([(0, f"unknown command {command!r}")])
    schema = _SCHEMAS[command]
    errors: list = []
    options: dict = {}
    lines: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append((lineno, f"expected key = value, got {line!r}"))
            continue
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.split("#")[0].strip()
        if key == "command":
            if raw != command:
                errors.append(
                    (lineno, f"config is for command {raw!r}, not {command!r}")
                )
            continue
        if key not in schema:
            errors.append((lineno, f"unknown key {key!r} for {command}"))
            continue
        kind, repeatable = schema[key]
        try:
            value = _convert(kind, raw)
        except ValueError as exc:
            errors.append((lineno, f"{key}: {exc}"))
            continue
        if repeatable:
            options.setdefault(key, [])
            lines[(key, len(options[key]))] = lineno
            options[key].append(value)
        else:
            if key in options:
                errors.append((lineno, f"duplicate key {key!r}"))
                continue
            options[key] = value
            lines[key] = lineno
    for key, value in (overrides or {}).items():
        if value is not None:
            options[key] = value

    potential = None
    if command in _NEEDS_POTENTIAL:
        potential = _build_potential(options, lines, errors)

    for key in _REQUIRED[command]:
        if key not in options:
            errors.append((0, f"missing required key {key!r}"))

    _validate_semantics(command, options, lines, errors)
    if errors:
        raise ConfigValidationError(sorted(errors))
    return RunConfig(command=command, options=options, potential=potential)


def _validate_semantics(command, options, lines, errors):
    def bad(key, message):
        errors.append((lines.get(key, 0), f"{key}: {message}"))

    eps = options.get("eps")
    if eps is not None and eps < 0:
        bad("eps", "eps must be >= 0")
    for key in ("steps", "stride", "samples", "energies", "width", "height"):
        v = options.get(key)
        if v is not None and v < 1:
            bad(key, "must be >= 1")
    steps = options.get("steps")
    stride = options.get("stride")
    if steps is not None and stride is not None and steps % stride:
        bad("steps", "steps must be a multiple of stride")
    if command == "survey":
        eps_list = options.get("eps_list")
        if eps_list is not None:
            if any(e <= 0 for e in eps_list) or len(set(eps_list)) != len(eps_list):
                bad("eps_list", "eps values must be positive and distinct")
        mode = options.get("mode", "classes")
        if mode not in ("classes", "ribbon", "spots"):
            bad("mode", "must be one of classes, ribbon, spots")
        region = options.get("region", {"classes": "full", "ribbon": "strip",
                                        "spots": "box"}[mode])
        if region not in ("full", "strip", "box"):
            bad("region", "must be one of full, strip, box")
        options["region"] = region
        if region == "strip" and "strip_k" not in options:
            errors.append((0, "missing required key 'strip_k' for a strip region"))
        if region == "box" and "box_center" not in options:
            errors.append((0, "missing required key 'box_center' for a box region"))
        if mode == "ribbon" and region != "strip":
            bad("mode", "ribbon mode needs a strip region")
        if mode == "spots" and region != "box":
            bad("mode", "spots mode needs a box region")
    if command == "render":
        mode = options.get("mode", "actions")
        if mode not in ("actions", "portrait"):
            bad("mode", "must be actions or portrait")
        options["mode"] = mode
        if mode == "portrait" and "resonance" not in options:
            errors.append((0, "missing required key 'resonance' for portrait mode"))
        if mode == "actions" and "ic" not in options and not (
            "y0" in options and "x0" in options
        ):
            errors.append((0, "give ic lines or y0/x0 to define orbits"))
        axes = options.get("axes")
        if axes is not None and len(axes) != 4:
            bad("axes", "axes needs [xmin, xmax, ymin, ymax]")
    if command == "kamcheck":
        n = options.get("n")
        if n is not None and n < 1:
            bad("n", "n must be >= 1")
        triple = [options.get(k) is not None for k in ("c_s", "c_n", "c_lambda")]
        if not options.get("search", True) and not all(triple):
            errors.append(
                (0, "search = false requires c_s, c_n and c_lambda")
            )
