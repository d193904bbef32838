"""Command line front end.

Exit codes: 0 success, 2 bad arguments or unparsable scenario, 3 invariant
violation, 4 degenerate computation (fit or inverse problem without answer).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import DegenerateFitError, NoSolutionError, ScenarioError, ScenarioParseError
from .fringe import FringeCurve, fit_visibility, sweep
from .raman import anti_stokes_factor, stokes_factor
from .rates import (
    accidental_rate,
    bell_violation_margin,
    correlated_rate,
    estimate_mu_c,
    singles_rate,
    visibility,
)
from .scenario_file import PRESETS, format_scenario, resolve_scenario

EXIT_USAGE = 2
EXIT_INVARIANT = 3
EXIT_DEGENERATE = 4

CSV_HEADER = ["theta_rad", "coincidence_per_frame", "sigma", "singles_signal_hz", "singles_idler_hz"]


def _sig(x: float, digits: int) -> float:
    return float(f"{x:.{digits}g}")


def _json(obj: dict) -> str:
    def clean(v):
        if isinstance(v, (bool, int, str)) or v is None:
            return v
        return _sig(float(v), 12)

    return json.dumps({k: clean(v) for k, v in obj.items()}, indent=2) + "\n"


def write_fringe_csv(curve: FringeCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in zip(curve.theta, curve.rate, curve.sigma, curve.singles_signal_hz, curve.singles_idler_hz):
        w.writerow([f"{x:.9g}" for x in row])
    return buf.getvalue()


def read_fringe_csv(text: str, gate_rate_hz: float = 4e6) -> FringeCurve:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError(f"expected header {','.join(CSV_HEADER)}")
    cols = np.array([[float(x) for x in r] for r in rows[1:]], float).reshape(-1, len(CSV_HEADER))
    return FringeCurve(*cols.T, gate_rate_hz=gate_rate_hz)


def _temperatures(text: str) -> List[float]:
    try:
        temps = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not temps or any(not (t > 0 and math.isfinite(t)) for t in temps):
        raise argparse.ArgumentTypeError("temperatures must be positive")
    return temps


def _positive_float(text: str) -> float:
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def cmd_raman(args) -> int:
    nu = args.nu_ghz * 1e9
    ref = args.reference if args.reference is not None else args.temps[-1]
    ref_s, ref_as = stokes_factor(nu, ref), anti_stokes_factor(nu, ref)
    rows = []
    for t in args.temps:
        n_s = args.prefactor * stokes_factor(nu, t)
        n_as = args.prefactor * anti_stokes_factor(nu, t)
        rows.append((t, n_s, n_as, stokes_factor(nu, t) / ref_s, anti_stokes_factor(nu, t) / ref_as))
    header = ["temperature_k", "n_stokes", "n_anti_stokes", "stokes_ratio", "anti_stokes_ratio"]
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([[f"{x:.9g}" for x in row] for row in rows])
    else:
        print(f"# nu = {args.nu_ghz:g} GHz, ratios relative to T = {ref:g} K")
        print(f"{'T [K]':>10} {'n_s':>12} {'n_as':>12} {'n_s/ref':>10} {'n_as/ref':>10}")
        for t, n_s, n_as, r_s, r_as in rows:
            print(f"{t:10.4g} {n_s:12.5g} {n_as:12.5g} {r_s:10.4f} {r_as:10.4f}")
    return 0


def analytic_summary(s) -> dict:
    b = s.brightness
    a_s, a_i = s.alpha_s, s.alpha_i
    d_s = s.signal_channel.detector.dark_count_per_gate
    d_i = s.idler_channel.detector.dark_count_per_gate
    gate = s.gate_rate_hz
    r_c = correlated_rate(b.mu_c, a_s, a_i)
    r_acc = accidental_rate(b, a_s, a_i, d_s, d_i)
    v = visibility(r_c, r_acc)
    return {
        "r_c_hz": r_c * gate,
        "r_acc_hz": r_acc * gate,
        "visibility": v,
        "bell_margin": bell_violation_margin(v),
        "singles_signal_hz": singles_rate(b.mu_s, a_s, d_s, gate),
        "singles_idler_hz": singles_rate(b.mu_i, a_i, d_i, gate),
        "mu_s": b.mu_s,
        "mu_i": b.mu_i,
    }


def _with_run_overrides(s, args):
    changes = {}
    if getattr(args, "frames", None) is not None:
        changes["frames"] = args.frames
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    return s.replace(**changes) if changes else s


def cmd_analytic(args) -> int:
    s = resolve_scenario(args.scenario)
    sys.stdout.write(_json(analytic_summary(s)))
    return 0


def cmd_sweep(args) -> int:
    if args.points < 5:
        raise ScenarioParseError(f"--points must be >= 5, got {args.points}")
    s = _with_run_overrides(resolve_scenario(args.scenario), args)
    thetas = np.linspace(0.0, 2.0 * math.pi, args.points, endpoint=False)
    curve = sweep(s, thetas, args.mode)
    fit = fit_visibility(curve)
    table = write_fringe_csv(curve)
    summary = _json(
        {
            "mode": args.mode,
            "points": args.points,
            "frames_per_point": s.frames if args.mode == "montecarlo" else 0,
            "seed": s.seed,
            "visibility": fit.visibility,
            "theta0": fit.theta0,
            "offset": fit.offset,
            "fit_sigma_V": fit.sigma_visibility,
            "rate_min": float(curve.rate.min()),
            "rate_max": float(curve.rate.max()),
        }
    )
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    if args.json:
        with open(args.json, "w", encoding="utf-8", newline="") as fh:
            fh.write(summary)
    elif args.csv:
        sys.stdout.write(summary)
    else:
        sys.stderr.write(summary)
    return 0


def cmd_estimate(args) -> int:
    if not 0.0 < args.visibility < 1.0:
        raise ScenarioParseError(f"visibility must lie in (0, 1), got {args.visibility}")
    s = resolve_scenario(args.scenario)
    b = s.brightness
    mu_c = estimate_mu_c(
        args.visibility,
        b.mu_s,
        b.mu_i,
        s.alpha_s,
        s.alpha_i,
        s.signal_channel.detector.dark_count_per_gate,
        s.idler_channel.detector.dark_count_per_gate,
    )
    sys.stdout.write(_json({"mu_c_hat": mu_c}))
    return 0


def cmd_presets(args) -> int:
    if args.name is None:
        for name in PRESETS:
            print(name)
        return 0
    if args.name not in PRESETS:
        raise ScenarioParseError(f"unknown preset {args.name!r}; choose from {', '.join(PRESETS)}")
    sys.stdout.write(format_scenario(PRESETS[args.name]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="timebin-sim",
        description="Time-bin entangled pair distribution: Raman noise, rates, fringes and Monte Carlo.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    scenario_help = f"preset name ({', '.join(PRESETS)}) or scenario file path"

    r = sub.add_parser("raman", help="Stokes / anti-Stokes noise versus temperature")
    r.add_argument("--temps", type=_temperatures, required=True, help="comma-separated temperatures in K")
    r.add_argument("--nu-ghz", type=_positive_float, default=400.0, help="pump-channel detuning (GHz)")
    r.add_argument("--reference", type=_positive_float, default=None,
                   help="reference temperature for the ratios (default: last of --temps)")
    r.add_argument("--prefactor", type=_positive_float, default=1.0, help="g L exp(-alpha L)")
    r.add_argument("--format", choices=("table", "csv"), default="table")
    r.set_defaults(func=cmd_raman)

    a = sub.add_parser("analytic", help="closed-form rates and visibility as JSON")
    a.add_argument("scenario", help=scenario_help)
    a.set_defaults(func=cmd_analytic)

    s = sub.add_parser("sweep", help="phase sweep of the slot-2 coincidences: CSV + fitted JSON")
    s.add_argument("scenario", help=scenario_help)
    s.add_argument("--points", type=int, default=24)
    s.add_argument("--mode", choices=("analytic", "montecarlo"), default="analytic")
    s.add_argument("--frames", type=int, default=None, help="frames per point (overrides [run])")
    s.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    s.add_argument("--csv", default=None, help="CSV output path (default: stdout)")
    s.add_argument("--json", default=None,
                   help="JSON summary path (default: stdout if --csv is a file, else stderr)")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("estimate", help="estimate mu_c from a measured visibility")
    e.add_argument("visibility", type=float)
    e.add_argument("scenario", help=scenario_help)
    e.set_defaults(func=cmd_estimate)

    ps = sub.add_parser("presets", help="list presets, or print one as a scenario file")
    ps.add_argument("name", nargs="?")
    ps.set_defaults(func=cmd_presets)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DegenerateFitError, NoSolutionError) as exc:
        print(f"cannot compute: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
