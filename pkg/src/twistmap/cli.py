"""Command-line entry point.

Subcommands: simulate, classify, pendulum, survey, kamcheck, render.
Every run is driven by a flat key = value config file (see
:mod:`twistmap.config`); a few flags override config values.  All output
files are written atomically (temp file + rename) and byte-deterministic
given the config and seed.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import kamcheck as kam
from .classify import ClassifierConfig, classify
from .config import ConfigValidationError, parse_config
from .engine import PhaseState, iterate
from .errors import TwistmapError
from .pendulum import (
    default_energy_grid,
    frequency_and_twist,
    project_reduced,
    reduce_to_pendulum,
)
from .render import PlotSpec, render_action_projection, render_phase_portrait
from .resonance import ResonanceModule, build_geometry
from .serialize import (
    classification_to_json,
    dumps_json,
    ledger_to_json,
    orbit_to_csv,
    survey_to_csv,
    survey_to_json,
)
from .spectral import first_order_projection, solve_cohomological
from .survey import (
    DoubleResonanceBoxRegion,
    FullBoxRegion,
    ResonanceStripRegion,
    SurveyConfig,
    conditional_ribbon_probability,
    double_resonance_probability,
    run_survey,
)
from .trig import TWO_PI

__all__ = ["main", "console_main"]


def write_atomic(path: str, data) -> None:
    """Write text or bytes to path via a temp file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    binary = isinstance(data, bytes)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tw-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb" if binary else "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _style(text: str, good: bool) -> str:
    if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
        return text
    color = "32" if good else "31"
    return f"\x1b[{color}m{text}\x1b[0m"


def _load(args, command):
    overrides = {}
    for key in ("eps", "steps", "stride", "seed", "out"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    if getattr(args, "n_override", None) is not None:
        overrides["n"] = args.n_override
    if args.config is None:
        text = ""  # kamcheck can run from flags alone
    else:
        with open(args.config, "r") as fh:
            text = fh.read()
    return parse_config(text, command, overrides)


def _classifier_config(options) -> ClassifierConfig:
    kwargs = {}
    for key in ("drift_threshold", "resonance_tolerance_scale", "n_max",
                "oscillation_margin", "spots_box_scale"):
        if key in options:
            kwargs[key] = options[key]
    return ClassifierConfig(**kwargs)


def _initial_state(options) -> PhaseState:
    return PhaseState.from_lift(options["y0"], options["x0"])


def _cmd_simulate(args) -> int:
    cfg = _load(args, "simulate")
    o = cfg.options
    orbit = iterate(_initial_state(o), cfg.potential, o["eps"], o["steps"],
                    o.get("stride", 1))
    csv = orbit_to_csv(orbit)
    out = o.get("out")
    if out:
        write_atomic(out, csv)
        print(f"wrote {len(orbit)} states to {out}")
    else:
        sys.stdout.write(csv)
    return 0


def _cmd_classify(args) -> int:
    cfg = _load(args, "classify")
    o = cfg.options
    orbit = iterate(_initial_state(o), cfg.potential, o["eps"], o["steps"],
                    o.get("stride", 20))
    result = classify(orbit, _classifier_config(o))
    payload = classification_to_json(result)
    out = o.get("out")
    if out:
        write_atomic(out, payload)
    print(f"label: {result.label.value} (drift {result.drift:.3e})"
          if result.drift is not None else f"label: {result.label.value}")
    return 0


def _pendulum_model(cfg):
    o = cfg.options
    geometry = build_geometry(
        o["resonance"], target=TWO_PI * o.get("resonance_k0", 0)
    )
    y_sigma = geometry.chi_of(np.asarray(o["y_sigma"], dtype=float))
    model = reduce_to_pendulum(cfg.potential, geometry, y_sigma,
                               eps=o.get("eps", 0.0))
    return geometry, model


def _cmd_pendulum(args) -> int:
    cfg = _load(args, "pendulum")
    o = cfg.options
    _, model = _pendulum_model(cfg)
    grid = default_energy_grid(
        model,
        o.get("energies", 64),
        start=o.get("energy_start", 1e-4),
        band=o.get("separatrix_band", 1e-4),
    )
    table = frequency_and_twist(model, grid, twist_bound=o.get("twist_bound", 1e3))
    out = o.get("out")
    if out:
        write_atomic(out, table.to_csv())
        print(f"wrote action table ({len(grid)} energies) to {out}")
    else:
        sys.stdout.write(table.to_csv())
    return 0


def _survey_region(o):
    region_kind = o.get("region", "full")
    if region_kind == "full":
        low = tuple(o.get("y_low", (0.0, 0.0)))
        high = tuple(o.get("y_high", (TWO_PI, TWO_PI)))
        return FullBoxRegion(low, high)
    if region_kind == "strip":
        return ResonanceStripRegion(
            k=tuple(o["strip_k"]),
            k0=o.get("strip_k0", 0),
            width_scale=o.get("strip_width", 1.0),
            t_range=tuple(o.get("strip_t_range", (0.0, TWO_PI))),
        )
    return DoubleResonanceBoxRegion(
        center=tuple(o["box_center"]),
        half_side_scale=o.get("box_scale", 3.0),
    )


def _cmd_survey(args) -> int:
    cfg = _load(args, "survey")
    o = cfg.options
    config = SurveyConfig(
        potential=cfg.potential,
        eps_values=tuple(o["eps_list"]),
        samples_per_eps=o["samples"],
        region=_survey_region(o),
        seed=o.get("seed", 0),
        steps=o.get("steps", 200_000),
        stride=o.get("stride", 20),
        classifier=_classifier_config(o),
    )
    mode = o.get("mode", "classes")
    result = run_survey(config, workers=args.workers, journal_path=args.resume)
    if o.get("out_csv"):
        write_atomic(o["out_csv"], survey_to_csv(result))
    if o.get("out_json"):
        write_atomic(o["out_json"], survey_to_json(result))
    for i, eps in enumerate(config.eps_values):
        print(f"eps={eps:g}: {result.row(i)}")
    if result.chaotic_fit is not None:
        fit = result.chaotic_fit
        print(f"chaotic-fraction exponent: {fit.exponent:.3f} "
              f"+- {fit.exponent_stderr:.3f}")
    if mode == "ribbon":
        rows = conditional_ribbon_probability(
            config,
            workers=args.workers,
            separatrix_band=o.get("ribbon_separatrix_band", 0.05),
            journal_path=args.resume,
        )
        for row in rows:
            print(
                f"eps={row.eps:g}: ribbon fraction in oscillatory domain "
                f"{row.fraction:.3f} +- {row.stderr:.3f} "
                f"({row.ribbon_count}/{row.inside_count})"
            )
    elif mode == "spots":
        spots = double_resonance_probability(
            config, workers=args.workers, journal_path=args.resume
        )
        for row in spots.rows:
            print(
                f"eps={row.eps:g}: spots fraction in box "
                f"{row.spots_fraction_in_box:.3f}, unconditional "
                f"{row.unconditional_fraction:.3e}"
            )
        if spots.fit is not None:
            print(f"unconditional spots exponent: {spots.fit.exponent:.3f} "
                  f"+- {spots.fit.exponent_stderr:.3f}")
    return 0


def _cmd_kamcheck(args) -> int:
    cfg = _load(args, "kamcheck")
    o = dict(cfg.options)
    out = o.pop("out", None)
    search = o.pop("search", True) or args.search
    n = o.pop("n")
    m_max = o.pop("m_max", 40)
    triple = (o.pop("c_s", None), o.pop("c_n", None), o.pop("c_lambda", None))
    if search:
        constants, report = kam.search_constants(n, fixed=o, m_max=m_max)
    else:
        constants = kam.KamConstants(n=n, **o).with_triple(*triple)
        report = kam.check_inequalities(constants, m_max)
    print(report.to_text())
    verdict = _style("PASS", True) if report.ok else _style("FAIL", False)
    print(f"ledger verdict: {verdict}")
    if out:
        write_atomic(out, ledger_to_json(report))
        print(f"wrote ledger to {out}")
    return 0


def _render_orbits(cfg):
    o = cfg.options
    ics = o.get("ic")
    if not ics:
        ics = [(o["y0"], o["x0"])]
    orbits = []
    for y, x in ics:
        state = PhaseState.from_lift(y, x)
        orbits.append(
            iterate(state, cfg.potential, o["eps"], o.get("steps", 100_000),
                    o.get("stride", 20))
        )
    return orbits


def _cmd_render(args) -> int:
    cfg = _load(args, "render")
    o = cfg.options
    spec = PlotSpec(
        width=o.get("width", 800),
        height=o.get("height", 800),
        point_radius=o.get("point_radius", 1.2),
        axes=tuple(o["axes"]) if "axes" in o else None,
        title=o.get("title"),
    )
    if o.get("mode", "actions") == "actions":
        orbits = _render_orbits(cfg)
        overlay = None
        if o.get("overlay"):
            y0 = np.asarray(orbits[0].ys[0], dtype=float)
            solution = solve_cohomological(
                cfg.potential, y0, ResonanceModule.trivial(cfg.potential.dimension),
                convention="map",
            )
            overlay = first_order_projection(
                y0, solution.series, o["eps"],
                ResonanceModule.trivial(cfg.potential.dimension),
                samples=o.get("overlay_samples", 48),
            )
        svg = render_action_projection(orbits, spec, overlay_points=overlay)
    else:
        geometry, model = _pendulum_model(cfg)
        orbits = _render_orbits(cfg)
        points = np.vstack(
            [project_reduced(orbit, geometry, o["eps"]) for orbit in orbits]
        )
        svg = render_phase_portrait(
            model, points, spec,
            energies=o.get("energies_list"),
            shade=o.get("shade", True),
        )
    out = o.get("out")
    if out:
        write_atomic(out, svg)
        print(f"wrote {out}")
    else:
        sys.stdout.write(svg)
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "pendulum": _cmd_pendulum,
    "survey": _cmd_survey,
    "kamcheck": _cmd_kamcheck,
    "render": _cmd_render,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistmap",
        description="near-integrable twist maps: orbits, resonances, surveys",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = dict(required=False)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=(name != "kamcheck"),
                       help="key = value config file")
        p.add_argument("--out", help="override the output path", **common)
        if name in ("simulate", "classify", "render"):
            p.add_argument("--eps", type=float, **common)
            p.add_argument("--steps", type=int, **common)
            p.add_argument("--stride", type=int, **common)
        if name == "survey":
            p.add_argument("--seed", type=int, **common)
            p.add_argument("--steps", type=int, **common)
            p.add_argument("--stride", type=int, **common)
            p.add_argument("--workers", type=int, default=1)
            p.add_argument("--resume", help="journal file for checkpoint/resume")
        if name == "kamcheck":
            p.add_argument("--n", dest="n_override", type=int, **common)
            p.add_argument("--search", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        handler = _HANDLERS[args.command]
        return handler(args)
    except ConfigValidationError as exc:
        print(exc, file=sys.stderr)
        return 1
    except TwistmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
