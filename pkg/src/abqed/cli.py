"""Command-line interface: ``abqed <subcommand>``.

Artifacts are plain CSV (with a versioned header comment) and JSON; every
numeric row carries an error estimate.  Exit status is 0 on success, 2 for
configuration errors, 3 for convergence failures, 4 for invariant violations
and 1 for other model errors.
"""

import argparse
import csv
import json
from pathlib import Path
import sys
import time
import warnings

import numpy as np

from . import __version__
from .checks import convergence_report, modespace_report
from .config import RunConfiguration, load_config
from .errors import (ABQEDError, CalculatorMismatchOnClosedLoop, ConfigParseError, QuadratureNotConverged)
from .gauge import random_gauge_family
from .interferometer import PRESETS, gauge_sweep, phase_difference
from .potentials import effective_potentials

CSV_VERSION = 1
INVARIANCE_TOL = 1e-9

# CLI flag -> (preset names, keyword)
PRESET_FLAGS = {
    "flux": (("magnetic", "electrodynamic"), "flux"),
    "va": (("electric",), "V_a"),
    "vb": (("electric",), "V_b"),
    "pulse_start": (("electric",), "pulse_start"),
    "pulse_end": (("electric",), "pulse_end"),
    "ramp_start": (("electrodynamic",), "ramp_start"),
    "ramp_end": (("electrodynamic",), "ramp_end"),
    "solenoid": (("magnetic",), "solenoid"),
    "windings": (("magnetic",), "windings"),
    "radius": (("magnetic", "electrodynamic"), "radius"),
    "half_width": (("magnetic", "electric", "electrodynamic"), "half_width"),
    "half_height": (("magnetic", "electrodynamic"), "half_height"),
    "duration": (("magnetic", "electric", "electrodynamic"), "duration"),
}

PRESET_DEFAULTS = {
    "si": {"magnetic": {"flux": 3.9478e-6}, "electric": {"V_a": 1.0, "V_b": 0.0},
           "electrodynamic": {"flux": 3.9478e-6}},
    "reduced": {"magnetic": {"flux": 1.0}, "electric": {"V_a": 1.0, "V_b": 0.0},
                "electrodynamic": {"flux": 1.0}},
}


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(path, table, columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# abqed {table} v{CSV_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(type(x))


# ---------------------------------------------------------------------------
# configuration assembly

def _run_config(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = RunConfiguration()
    data = cfg.model_dump()
    if args.units:
        data["units"] = args.units
    preset = getattr(args, "preset", None)
    if preset:
        params = dict(PRESET_DEFAULTS[data["units"]][preset])
        if data.get("scenario") and data["scenario"].get("preset") == preset:
            params.update(data["scenario"]["params"])
        data["scenario"] = {"preset": preset, "params": params, "path_a": None, "path_b": None,
                            "open_mode": False}
    scen = data.get("scenario")
    if scen and scen.get("preset"):
        for flag, (names, key) in PRESET_FLAGS.items():
            val = getattr(args, flag, None)
            if val is None:
                continue
            if scen["preset"] not in names:
                raise ConfigParseError(f"--{flag.replace('_', '-')} does not apply to preset {scen['preset']!r}")
            scen["params"][key] = val
    if getattr(args, "seed", None) is not None:
        data["sweep"]["seed"] = args.seed
    if getattr(args, "count", None) is not None:
        data["sweep"]["count"] = args.count
    if args.out:
        data["output"]["dir"] = args.out
    try:
        return RunConfiguration.model_validate(data)
    except Exception as exc:
        raise ConfigParseError(str(exc)) from None


def _diagnostics(scenario):
    """Adiabaticity and nonrelativistic warnings."""
    c = scenario.sources.constants.c
    pts = np.concatenate([p.position(np.linspace(p.t0, p.tf, 256)) for p in (scenario.path_a, scenario.path_b)])
    diameter = float(np.max(np.linalg.norm(pts[:, None] - pts[None, ::16], axis=2)))
    for e in scenario.sources.elements:
        s = e.schedule
        if s.kind == "constant":
            continue
        ramp = s.ramp_time if s.kind == "linear_pulse" else s.t_end - s.t_start
        if ramp < 100 * diameter / c:
            warnings.warn(f"{e.kind}: ramp time {ramp:.3g} s is below 100 x diameter / c "
                          f"({100 * diameter / c:.3g} s); retardation is not negligible", RuntimeWarning)
    for p in (scenario.path_a, scenario.path_b):
        if p.max_speed() > 0.1 * c:
            warnings.warn(f"path {p.name}: speed exceeds 0.1 c", RuntimeWarning)


def _print_table(header, rows, out=None):
    out = out if out is not None else sys.stdout
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
    out.write("  ".join(str(h).ljust(w) for h, w in zip(header, widths)) + "\n")
    for r in rows:
        out.write("  ".join(str(x).ljust(w) for x, w in zip(r, widths)) + "\n")


def _gauge_label(cfg):
    return "lorenz" if not cfg.gauge.terms else "+".join(t.kind for t in cfg.gauge.terms)


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args):
    cfg = _run_config(args)
    scenario = cfg.build_scenario()
    _diagnostics(scenario)
    t0 = time.perf_counter()
    pair = phase_difference(scenario)
    wall = time.perf_counter() - t0
    out = Path(cfg.output.dir)
    rows = []
    for res in (pair.hamiltonian, pair.energy):
        for key, pp in (("a", res.a), ("b", res.b)):
            rows.append((scenario.name, _gauge_label(cfg), res.calculator, key, pp.phi, pp.scalar_term,
                         pp.vector_term, pp.error))
    write_csv(out / "phases.csv", "phases",
              ["preset", "gauge", "calculator", "path", "phi", "scalar_term", "vector_term", "est_error"], rows)
    summary = {"preset": scenario.name, "gauge": _gauge_label(cfg), "units": cfg.units,
               "charge": scenario.charge, "mass": scenario.mass,
               "delta_hamiltonian": pair.hamiltonian.delta, "delta_energy": pair.energy.delta,
               "est_error": max(pair.hamiltonian.est_error, pair.energy.est_error),
               "calculator_mismatch": pair.calculator_mismatch, "wall_time_s": wall,
               "expected_delta": scenario.metadata.get("expected_delta")}
    write_json(out / "summary.json", summary)
    _print_table(["preset", "gauge", "delta_hamiltonian", "delta_energy", "est_error", "wall_s"],
                 [(scenario.name, summary["gauge"], "%.12g" % summary["delta_hamiltonian"],
                   "%.12g" % summary["delta_energy"], "%.3g" % summary["est_error"], "%.2f" % wall)])
    return 0


def cmd_sweep(args):
    cfg = _run_config(args)
    scenario = cfg.build_scenario()
    _diagnostics(scenario)
    pa, pb = scenario.path_a, scenario.path_b
    pts = np.concatenate([p.position(np.linspace(p.t0, p.tf, 128)) for p in (pa, pb)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    size = float(np.max(hi - lo))
    length_scale = cfg.sweep.length_scale or size / 10
    amplitude = cfg.sweep.amplitude * scenario.sources.constants.hbar / abs(scenario.charge)
    family = random_gauge_family(cfg.sweep.seed, cfg.sweep.count, length_scale, 0.5 * (lo + hi), 0.5 * size,
                                 amplitude, time_drift=1.0 / (pa.tf - pa.t0))
    summary = gauge_sweep(scenario, family)
    out = Path(cfg.output.dir)
    write_csv(out / "sweep.csv", "sweep",
              ["gauge_index", "calculator", "path", "phi", "gauge_part", "delta", "delta_shift", "est_error"],
              sorted(summary.rows, key=lambda r: (r.gauge_index, r.calculator, r.path)))
    payload = {"preset": scenario.name, "seed": cfg.sweep.seed, "count": cfg.sweep.count,
               "delta_lorenz": summary.lorenz.hamiltonian.delta,
               "max_closed_loop_delta_spread": summary.max_delta_shift,
               "per_path_phase_spread": summary.per_path_spread,
               "max_calculator_mismatch": summary.max_calculator_mismatch,
               "invariance_tolerance": INVARIANCE_TOL}
    write_json(out / "sweep_summary.json", payload)
    _print_table(["preset", "gauges", "max_delta_spread", "per_path_spread"],
                 [(scenario.name, cfg.sweep.count, "%.3g" % summary.max_delta_shift,
                   "%.3g" % summary.per_path_spread)])
    if summary.max_delta_shift > INVARIANCE_TOL:
        print(f"closed-loop delta spread exceeds {INVARIANCE_TOL:g} rad", file=sys.stderr)
        return 4
    return 0


def cmd_field_probe(args):
    cfg = _run_config(args)
    if cfg.sources:
        config = cfg.source_configuration()
    elif cfg.scenario is not None:
        config = cfg.build_scenario().sources
    else:
        raise ConfigParseError("field-probe needs sources or a scenario")
    points = [tuple(p) for p in args.point] if args.point else list(cfg.probe.points)
    times = args.time if args.time else list(cfg.probe.times)
    if not points:
        raise ConfigParseError("probe.points: at least one point is required (or pass --point)")
    rows = []
    for t in times:
        for p in points:
            s = effective_potentials(config, np.array(p, dtype=float), t, cfg.numerics.quadrature())
            rows.append((*p, t, s.V, *s.A, max(s.est_error)))
    write_csv(Path(cfg.output.dir) / "field_probe.csv", "field-probe",
              ["x", "y", "z", "t", "V", "Ax", "Ay", "Az", "est_error"], rows)
    for r in rows:
        print(",".join(_fmt(x) for x in r))
    return 0


def cmd_modespace(args):
    cfg = _run_config(args)
    report = modespace_report(n_probes=args.probes, seed=cfg.sweep.seed)
    write_json(Path(cfg.output.dir) / "modespace.json", report)
    print(json.dumps(report, indent=2, sort_keys=True, default=_jsonable))
    worst = max(max(v["max_rel_V"], v["max_rel_A"]) for v in report["agreement"].values())
    return 0 if worst <= 1e-3 else 4


def cmd_convergence(args):
    cfg = _run_config(args)
    report = convergence_report(levels=args.levels)
    write_json(Path(cfg.output.dir) / "convergence.json", report)
    print(json.dumps(report, indent=2, sort_keys=True, default=_jsonable))
    return 0


def cmd_presets(args):
    import inspect
    rows = []
    for name, fn in PRESETS.items():
        sig = inspect.signature(fn)
        params = [p for p in sig.parameters if p not in ("constants", "charge", "mass", "gauge", "settings",
                                                          "phase_settings")]
        rows.append((name, ", ".join(params)))
    _print_table(["preset", "parameters"], rows)
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="abqed", description="Aharonov-Bohm phase simulator")
    parser.add_argument("--version", action="version", version=f"abqed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preset=True):
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--units", choices=["si", "reduced"])
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        if preset:
            p.add_argument("--preset", choices=sorted(PRESETS))
            p.add_argument("--flux", type=float)
            p.add_argument("--va", type=float)
            p.add_argument("--vb", type=float)
            p.add_argument("--pulse-start", type=float)
            p.add_argument("--pulse-end", type=float)
            p.add_argument("--ramp-start", type=float)
            p.add_argument("--ramp-end", type=float)
            p.add_argument("--solenoid", choices=["infinite", "finite"])
            p.add_argument("--windings", type=int)
            p.add_argument("--radius", type=float)
            p.add_argument("--half-width", type=float)
            p.add_argument("--half-height", type=float)
            p.add_argument("--duration", type=float)

    p = sub.add_parser("run", help="phase difference of one scenario")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-gauge", help="closed-loop invariance over a seeded gauge family")
    common(p)
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("field-probe", help="effective potentials at points")
    common(p)
    p.add_argument("--point", type=float, nargs=3, action="append", metavar=("X", "Y", "Z"))
    p.add_argument("--time", type=float, action="append")
    p.set_defaults(func=cmd_field_probe)

    p = sub.add_parser("modespace-check", help="k-space vs real-space agreement and energy constant")
    common(p, preset=False)
    p.add_argument("--probes", type=int, default=20)
    p.set_defaults(func=cmd_modespace)

    p = sub.add_parser("convergence", help="resolution-doubling convergence report")
    common(p, preset=False)
    p.add_argument("--levels", type=int, default=4)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("presets", help="list scenario presets")
    p.set_defaults(func=cmd_presets, config=None, units=None, out=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except QuadratureNotConverged as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    except CalculatorMismatchOnClosedLoop as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except ABQEDError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
