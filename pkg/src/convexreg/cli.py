"""Command-line interface.

Subcommands: fit | risk | packing | bounds | misspec.  Every command
accepts --config pointing at a plain-text file of ``key = value`` lines;
command-line flags override file values, which override the built-in
defaults shown in --help.  Report commands write a CSV (17 significant
digits, '.' decimal separator), a small summary file and a PNG figure
next to the CSV.  Exit codes: 0 success, 2 usage/config/input error,
3 internal solver failure.
"""

from __future__ import annotations

import math
import os
import sys

import numpy as np

from .affine import best_affine_fit
from .bounds import (
    EnvelopeParams,
    assouad_lower_bound,
    entropy_integral_bound,
    neighborhood_radius,
    risk_envelope_adaptive,
    risk_envelope_worst_case,
)
from .cone import SolverError, is_convex_feasible, project
from .grid import DesignGrid, SampledFunction, make_grid
from .misspec import concave_projection_affine_check, convex_projection, pythagorean_check
from .packing import CurvatureClass, build_packing, scaling_slope, spawn_seed
from .sim import ExperimentConfig, estimate_risk, rate_exponent
from .truths import get_truth

__all__ = ["main"]


class UsageError(Exception):
    """Configuration or input problem; maps to exit code 2."""


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in str(text).split(","))
    except ValueError:
        raise ValueError(f"expected a comma-separated list of integers, got {text!r}") from None


_CONVERTERS = {
    "out": str,
    "config": str,
    "seed": int,
    "threads": int,
    "truth": str,
    "grid": str,
    "sigma": float,
    "reps": int,
    "n": None,  # per-command: int list for risk, int otherwise
    "m": _int_list,
    "a": float,
    "b": float,
    "c1": float,
    "c2": float,
    "kappa1": float,
    "kappa2": float,
    "max_k": int,
    "r": float,
    "constant": float,
    "trials": int,
    "input": str,
}

_COMMAND_KEYS = {
    "fit": {"input", "out", "seed", "threads"},
    "risk": {"truth", "sigma", "n", "reps", "seed", "grid", "out", "threads"},
    "packing": {"truth", "m", "n", "a", "b", "seed", "grid", "out", "threads"},
    "bounds": {
        "kappa1", "kappa2", "a", "b", "c1", "c2", "sigma", "n",
        "truth", "max_k", "r", "out", "seed", "threads",
    },
    "misspec": {"truth", "n", "seed", "grid", "out", "threads", "trials"},
}

_DEFAULTS = {
    "fit": {"seed": 0, "threads": 1},
    "risk": {
        "truth": "x2", "sigma": 0.3, "n": (50, 100, 200, 400, 800),
        "reps": 200, "seed": 1, "grid": "uniform", "threads": 1,
    },
    "packing": {
        "truth": "x2", "m": (4, 8, 16, 32), "n": 4096, "a": 0.0, "b": 1.0,
        "seed": 1, "grid": "uniform", "threads": 1,
    },
    "bounds": {
        "kappa1": 2.0, "kappa2": 2.0, "a": 0.0, "b": 1.0, "c1": 1.0, "c2": 1.0,
        "sigma": 1.0, "n": 1000, "truth": "x2", "max_k": 16, "r": 0.1,
        "seed": 0, "threads": 1,
    },
    "misspec": {
        "truth": "concave_parabola", "n": 50, "seed": 1, "grid": "uniform",
        "threads": 1, "trials": 100,
    },
}


def _read_config_file(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _convert(command: str, key: str, value):
    if isinstance(value, str):
        conv = _CONVERTERS[key]
        if key == "n":
            conv = _int_list if command == "risk" else int
        if conv is None:
            raise UsageError(f"no converter for key {key!r}")
        try:
            return conv(value)
        except (TypeError, ValueError):
            raise UsageError(f"bad value for {key!r}: {value!r}")
    return value


def _merge_options(command: str, flags: dict) -> dict:
    allowed = _COMMAND_KEYS[command]
    merged = dict(_DEFAULTS[command])
    config_path = flags.pop("config", None)
    if config_path is not None:
        for key, value in _read_config_file(config_path).items():
            if key not in allowed:
                raise UsageError(f"unknown config key {key!r} for command {command!r}")
            merged[key] = _convert(command, key, value)
    for key, value in flags.items():
        if value is None:
            continue
        if key not in allowed:
            raise UsageError(f"unknown option {key!r} for command {command!r}")
        merged[key] = _convert(command, key, value)
    return merged


def _require_out(opts: dict) -> str:
    out = opts.get("out")
    if not out:
        raise UsageError("--out is required for this command")
    return out


def _derived_path(out: str, suffix: str) -> str:
    stem, _ = os.path.splitext(out)
    return stem + suffix


def _write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _read_xy_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    if not os.path.exists(path):
        raise UsageError(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or [p.strip() for p in lines[0].split(",")] != ["x", "y"]:
        raise UsageError("input CSV must start with header 'x,y'")
    xs: list[float] = []
    ys: list[float] = []
    for row, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise UsageError(f"row {row}: expected two comma-separated fields, got {line!r}")
        try:
            x = float(parts[0])
            y = float(parts[1])
        except ValueError:
            raise UsageError(f"row {row}: non-numeric entry in {line!r}")
        if not (0.0 <= x <= 1.0):
            raise UsageError(f"row {row}: x={x} outside [0, 1]")
        if xs and x <= xs[-1]:
            raise UsageError(f"row {row}: x values must be strictly increasing")
        xs.append(x)
        ys.append(y)
    if len(xs) < 2:
        raise UsageError("need at least two data rows")
    return np.array(xs), np.array(ys)


def _random_convex_values(grid: DesignGrid, rng: np.random.Generator) -> np.ndarray:
    # nondecreasing slopes with an O(1) curvature budget, plus a random
    # affine part; keeps values at unit scale for any grid size
    increments = rng.uniform(0.0, 2.0, size=max(grid.n - 2, 0))
    total = increments.sum()
    if total > 0.0:
        increments *= 4.0 / total
    slopes = rng.normal() + np.concatenate(([0.0], np.cumsum(increments)))
    values = rng.normal() + np.concatenate(([0.0], np.cumsum(slopes * np.diff(grid.points))))
    return values


def cmd_fit(opts: dict) -> int:
    out = _require_out(opts)
    x, y = _read_xy_csv(opts["input"])
    grid = DesignGrid.from_points(x)
    fit = project(y, grid)
    lines = ["x,y,fitted"]
    for xi, yi, ti in zip(x, y, fit.theta):
        lines.append(f"{_fmt(xi)},{_fmt(yi)},{_fmt(ti)}")
    _write_lines(out, lines)
    print(
        f"iterations={fit.iterations} primal_residual={fit.primal_residual:.3e} "
        f"dual_residual={fit.dual_residual:.3e} comp_slack={fit.comp_slack:.3e}",
        file=sys.stderr,
    )
    from .plots import save_fit_figure

    save_fit_figure(_derived_path(out, ".png"), x, y, fit.theta)
    return 0


def cmd_risk(opts: dict) -> int:
    out = _require_out(opts)
    config = ExperimentConfig(
        truth=opts["truth"],
        n_list=tuple(opts["n"]) if not isinstance(opts["n"], int) else (opts["n"],),
        sigma=opts["sigma"],
        reps=opts["reps"],
        seed=opts["seed"],
        grid_kind=opts["grid"],
    )
    curve = estimate_risk(config, workers=opts["threads"])
    lines = ["n,mean_risk,std_error,reps"]
    for row in curve.rows:
        lines.append(f"{row.n},{_fmt(row.mean_risk)},{_fmt(row.std_error)},{row.reps}")
    _write_lines(out, lines)

    try:
        fit = rate_exponent(curve)
        summary = f"{_fmt(fit.slope)},{_fmt(fit.intercept)},{_fmt(fit.r_squared)}"
    except ValueError:
        fit = None
        summary = "nan,nan,nan"
    _write_lines(_derived_path(out, "_summary.csv"), ["slope,intercept,r_squared", summary])

    from .plots import save_risk_figure

    save_risk_figure(_derived_path(out, ".png"), curve, fit)
    return 0


def cmd_packing(opts: dict) -> int:
    out = _require_out(opts)
    truth = get_truth(opts["truth"])
    if truth.second_derivative_range is None:
        raise UsageError(f"truth {truth.name!r} has no curvature class; pick a smooth convex truth")
    lo, hi = truth.second_derivative_range(opts["a"], opts["b"])
    try:
        cls = CurvatureClass(opts["a"], opts["b"], lo, hi)
    except ValueError as exc:
        raise UsageError(str(exc))
    grid = make_grid(opts["grid"], opts["n"], opts["seed"])
    m_list = opts["m"]
    lines = ["m,epsilon,code_size,min_pairwise_l2,bound"]
    points = []
    try:
        for m in m_list:
            packing = build_packing(truth, cls, m, grid, spawn_seed(opts["seed"], m))
            lines.append(
                f"{m},{_fmt(packing.epsilon)},{packing.code.size},"
                f"{_fmt(packing.min_pairwise_l2)},{_fmt(packing.bound)}"
            )
            points.append((math.log(1.0 / math.sqrt(packing.bound)), math.log(packing.code.size)))
    except ValueError as exc:
        raise UsageError(str(exc))
    _write_lines(out, lines)

    slope = scaling_slope(points) if len(points) >= 2 else float("nan")
    _write_lines(_derived_path(out, "_summary.csv"), ["slope", _fmt(slope)])

    from .plots import save_packing_figure

    save_packing_figure(_derived_path(out, ".png"), points, slope)
    return 0


def cmd_bounds(opts: dict) -> int:
    try:
        cls = CurvatureClass(opts["a"], opts["b"], opts["kappa1"], opts["kappa2"])
        report = assouad_lower_bound(cls, opts["c1"], opts["c2"], opts["sigma"], opts["n"])
        radius = neighborhood_radius(opts["kappa2"], opts["c1"], opts["sigma"], opts["n"])
        truth = get_truth(opts["truth"])
        grid = make_grid("uniform", opts["n"], opts["seed"])
        phi0 = SampledFunction.from_callable(grid, truth)
        if not is_convex_feasible(phi0.values, grid):
            raise UsageError(f"truth {truth.name!r} is not convex; bounds need a convex center")
        _, _, affine_distance = best_affine_fit(phi0)
        params = EnvelopeParams(
            c1=opts["c1"], sigma=opts["sigma"], n=opts["n"],
            r_scale=max(1.0, affine_distance),
        )
        worst, n_ok = risk_envelope_worst_case(params)
        adaptive = risk_envelope_adaptive(phi0, params, opts["max_k"])
        entropy_integral = entropy_integral_bound(opts["r"], phi0, params, opts["max_k"])
    except ValueError as exc:
        raise UsageError(str(exc))
    lines = [
        f"assouad={_fmt(report.value)}",
        f"valid={'true' if report.valid else 'false'}",
        f"required_n_sq={_fmt(report.required_n_sq)}",
        f"radius={_fmt(radius)}",
        f"worst_case={_fmt(worst)}",
        f"worst_case_n_ok={'true' if n_ok else 'false'}",
        f"adaptive={_fmt(adaptive)}",
        f"entropy_integral={_fmt(entropy_integral)}",
    ]
    for line in lines:
        print(line)
    if opts.get("out"):
        _write_lines(opts["out"], lines)
    return 0


def cmd_misspec(opts: dict) -> int:
    out = _require_out(opts)
    truth = get_truth(opts["truth"])
    grid = make_grid(opts["grid"], opts["n"], opts["seed"])
    f0 = SampledFunction.from_callable(grid, truth)
    fit = convex_projection(f0)

    lines = ["x,f0,projected"]
    for xi, fi, ti in zip(grid.points, f0.values, fit.theta):
        lines.append(f"{_fmt(xi)},{_fmt(fi)},{_fmt(ti)}")
    _write_lines(out, lines)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=opts["seed"], spawn_key=(1,)))
    pythagorean_ok = True
    for _ in range(opts["trials"]):
        phi = SampledFunction(grid, _random_convex_values(grid, rng))
        if not pythagorean_check(f0, phi, tol=1e-10):
            pythagorean_ok = False
            break

    if grid.n > 2 and is_convex_feasible(-f0.values, grid):
        affine_ok = "true" if concave_projection_affine_check(f0, tol=1e-7) else "false"
    else:
        affine_ok = "na"

    summary = f"{'true' if pythagorean_ok else 'false'},{affine_ok}"
    _write_lines(_derived_path(out, "_summary.csv"), ["pythagorean_ok,affine_ok", summary])

    from .plots import save_misspec_figure

    save_misspec_figure(_derived_path(out, ".png"), grid.points, f0.values, fit.theta)
    return 0


def _build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="convexreg",
        description="Convex regression toolkit: cone-projection fits, Monte Carlo "
        "risk curves, packing constructions, and minimax bound evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="plain-text config file of key = value lines")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--out", help="output CSV path (figure and summary written alongside)")
        p.add_argument("--threads", type=int, help="worker threads (default 1)")

    p_fit = sub.add_parser("fit", help="project a y column in an x,y CSV onto the convex cone")
    p_fit.add_argument("input", nargs="?", help="input CSV with header x,y, sorted by x in [0,1]")
    common(p_fit)

    p_risk = sub.add_parser("risk", help="Monte Carlo risk curve of the convex least squares fit")
    p_risk.add_argument("--truth", help="truth id (default x2)")
    p_risk.add_argument("--sigma", type=float, help="noise standard deviation (default 0.3)")
    p_risk.add_argument("--n", type=_int_list, help="comma list of sample sizes (default 50,100,200,400,800)")
    p_risk.add_argument("--reps", type=int, help="replications per sample size (default 200)")
    p_risk.add_argument("--grid", choices=["uniform", "jittered"], help="grid kind (default uniform)")
    common(p_risk)

    p_pack = sub.add_parser("packing", help="build separated packing sets and their scaling slope")
    p_pack.add_argument("--truth", help="smooth convex truth id (default x2)")
    p_pack.add_argument("--m", type=_int_list, help="comma list of cell counts (default 4,8,16,32)")
    p_pack.add_argument("--n", type=int, help="grid size (default 4096)")
    p_pack.add_argument("--a", type=float, help="left end of the curvature interval (default 0)")
    p_pack.add_argument("--b", type=float, help="right end of the curvature interval (default 1)")
    p_pack.add_argument("--grid", choices=["uniform", "jittered"], help="grid kind (default uniform)")
    common(p_pack)

    p_bounds = sub.add_parser("bounds", help="evaluate the closed-form risk and minimax bounds")
    for flag, help_text in [
        ("--kappa1", "curvature lower bound (default 2)"),
        ("--kappa2", "curvature upper bound (default 2)"),
        ("--a", "interval left end (default 0)"),
        ("--b", "interval right end (default 1)"),
        ("--c1", "grid spacing constant c1 (default 1)"),
        ("--c2", "grid spacing constant c2 (default 1)"),
        ("--sigma", "noise standard deviation (default 1)"),
        ("--r", "loss radius for the entropy integral (default 0.1)"),
    ]:
        p_bounds.add_argument(flag, type=float, help=help_text)
    p_bounds.add_argument("--n", type=int, help="sample size (default 1000)")
    p_bounds.add_argument("--truth", help="convex truth for the envelopes (default x2)")
    p_bounds.add_argument("--max-k", dest="max_k", type=int, help="candidate piece budget (default 16)")
    common(p_bounds)

    p_mis = sub.add_parser("misspec", help="convex projection of a non-convex truth with checks")
    p_mis.add_argument("--truth", help="truth id, possibly non-convex (default concave_parabola)")
    p_mis.add_argument("--n", type=int, help="grid size (default 50)")
    p_mis.add_argument("--grid", choices=["uniform", "jittered"], help="grid kind (default uniform)")
    p_mis.add_argument("--trials", type=int, help="random convex trial count (default 100)")
    common(p_mis)

    return parser


_HANDLERS = {
    "fit": cmd_fit,
    "risk": cmd_risk,
    "packing": cmd_packing,
    "bounds": cmd_bounds,
    "misspec": cmd_misspec,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command
    flags = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        if command == "fit" and flags.get("input") is None:
            raise UsageError("fit requires an input CSV path")
        opts = _merge_options(command, flags)
        return _HANDLERS[command](opts)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
