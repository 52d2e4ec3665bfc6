"""Command-line interface.

Every subcommand emits delimited or JSON data (to --out, or stdout when no
path is given) and can additionally render a figure of the same data with
--plot PATH.  Diagnostics go to stderr.  A JSON config object (--config)
mirrors the flags one-to-one by their long names with underscores; flags
given explicitly override config values, which override built-in defaults.

Exit codes: 0 success, 1 usage error, 2 numeric or convergence failure.
Flag and parameter-range problems are usage errors; failures raised while
reading input files or running the solvers map to exit code 2.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import fields, fourier, pattern
from .errors import ConvergenceError, NumericError
from .fit import FitOptions, FitProblem, fit_1d, fit_2d, sample_grid_1d
from .targets import TargetSpec, load_target_samples


class UsageError(Exception):
    """Bad invocation: unknown flags, malformed config, out-of-range values."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().rstrip()}")


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise UsageError(message)


def _emit_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(data, out: str | None) -> None:
    _emit_text(json.dumps(data, indent=2, sort_keys=True) + "\n", out)


def _emit_profile(profile: pattern.Profile, out: str | None) -> None:
    if out:
        pattern.write_profile_csv(profile, out)
    else:
        pattern.write_profile_csv(profile, sys.stdout)


def _maybe_plot_profile(profile: pattern.Profile, opts: dict, title: str) -> None:
    if opts.get("plot"):
        from . import plots  # deferred: data-only runs never import matplotlib

        plots.save_profile_figure(profile, opts["plot"], title=title)


def _rates_from_branch(branch: float, gamma_d: float):
    """LambdaParams rates with gamma2/gamma1 = branch and gamma1 + gamma2 = 1."""
    from .atom import LambdaParams

    gamma1 = 1.0 / (1.0 + branch)
    return LambdaParams(gamma1=gamma1, gamma2=branch * gamma1, gamma_d=gamma_d)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_fringe(opts: dict) -> None:
    if opts["plan_file"] is not None:
        plan = fields.load_plan(opts["plan_file"])
    else:
        plan = fields.uniform_phase_plan(opts["n"])
    grid = pattern.Grid1D.regular(opts["points"])
    profile = pattern.product_profile(plan, grid)
    _emit_profile(profile, opts["out"])
    _maybe_plot_profile(profile, opts, f"{plan.order}-step fringe product")


def _cmd_point(opts: dict) -> None:
    grid = pattern.Grid1D.regular(opts["points"])
    profile = pattern.point_spread(opts["n"], grid)
    _emit_profile(profile, opts["out"])
    _maybe_plot_profile(profile, opts, f"cos^{2 * opts['n']} point spread")


def _cmd_localize(opts: dict) -> None:
    grid = pattern.Grid1D.regular(opts["points"])
    params = _rates_from_branch(opts["branch"], opts["gamma_d"])
    profile = pattern.quench_localization_profile(opts["s"], opts["r_peak"], grid, params)
    _emit_profile(profile, opts["out"])
    _maybe_plot_profile(profile, opts,
                        f"localization, s = {opts['s']:g}, r_peak = {opts['r_peak']:g}")


def _cmd_decohere(opts: dict) -> None:
    grid = pattern.Grid1D.regular(opts["points"])
    params = _rates_from_branch(opts["branch"], opts["gamma_d"])
    plan = fields.uniform_phase_plan(opts["n"])
    profile = pattern.decoherent_product_profile(plan, params, opts["intensity"], grid)
    _emit_profile(profile, opts["out"])
    _maybe_plot_profile(
        profile, opts,
        f"retention, gamma_d = {opts['gamma_d']:g}, intensity = {opts['intensity']:g}")


def _cmd_fourier(opts: dict) -> None:
    plan = fields.load_plan(opts["plan_file"])
    _emit_json(fourier.product_coefficients(plan).to_json_data(), opts["out"])


def _cmd_realize(opts: dict) -> None:
    plan = fields.load_plan(opts["plan_file"])
    data = [
        {"a": b.a, "b": b.b, "phase": b.phase, "r_amplitude": b.r_amplitude}
        for b in (fields.realize_factor(f) for f in plan)
    ]
    _emit_json(data, opts["out"])


def _fit_options(opts: dict) -> FitOptions:
    return FitOptions(starts=opts["starts"], max_iterations=opts["iterations"],
                      seed=opts["seed"], threads=opts["threads"],
                      peak_floor=opts["peak_floor"])


def _cmd_fit1d(opts: dict) -> None:
    if opts["target"] == "square":
        spec = TargetSpec(kind="square", duty=opts["duty"], center=opts["center"])
        grid = sample_grid_1d()
        target = spec.sample_1d(grid)
    else:  # samples
        grid, target = load_target_samples(opts["samples_file"])
        if not isinstance(grid, pattern.Grid1D):
            raise ValueError("fit1d needs 1D samples (zeta,value rows)")
    problem = FitProblem.one_dimensional(target, grid, opts["n"], _fit_options(opts))
    result = fit_1d(problem)
    print(f"fit1d: distance {result.distance:.6e}, peak density "
          f"{result.peak_density:.6e}, {len(result.starts)} starts", file=sys.stderr)
    _emit_json(result.to_json_data(), opts["out"])
    if opts.get("plot"):
        from . import plots

        plots.save_fit_figure_1d(grid, target, result.plan, opts["plot"], result.distance)


def _cmd_fit2d(opts: dict) -> None:
    angles = [k * math.pi / opts["angles"] for k in range(opts["angles"])]
    if opts["target"] == "c-shape":
        grid = pattern.Grid2D.regular(opts["grid"])
        target = TargetSpec(kind="c_shape").sample_2d(grid)
    else:  # samples
        grid, target = load_target_samples(opts["samples_file"])
        if not isinstance(grid, pattern.Grid2D):
            raise ValueError("fit2d needs 2D samples (zeta_x,zeta_y,value rows)")
    problem = FitProblem.two_dimensional(target, grid, angles, opts["steps"],
                                         _fit_options(opts))
    result = fit_2d(problem)
    print(f"fit2d: distance {result.distance:.6e}, peak density "
          f"{result.peak_density:.6e}, {len(result.starts)} starts", file=sys.stderr)
    _emit_json(result.to_json_data(), opts["out"])
    if opts.get("plot"):
        from . import plots

        plots.save_fit_figure_2d(grid, target, result.plan, opts["plot"], result.distance)


def _cmd_period(opts: dict) -> None:
    value = pattern.fringe_period(opts["wavelength"], opts["n"])
    text = f"{value:.12g}\n"
    if opts["out"]:
        _emit_text(text, opts["out"])
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# command table: defaults, type coercions, range checks


def _positive_int(name):
    return lambda opts: _check(opts[name] >= 1, f"--{name.replace('_', '-')} must be >= 1")


def _positive_float(name):
    return lambda opts: _check(
        math.isfinite(opts[name]) and opts[name] > 0,
        f"--{name.replace('_', '-')} must be finite and > 0")


def _all(*checks):
    def run_checks(opts, explicit):
        for check in checks:
            check(opts) if check.__code__.co_argcount == 1 else check(opts, explicit)
    return run_checks


def _check_fringe(opts, explicit):
    _check(not ("n" in explicit and "plan_file" in explicit),
           "give either --n or --plan-file, not both")
    _positive_int("n")(opts)
    _positive_int("points")(opts)


def _check_fit_common(opts):
    if opts["starts"] is not None:
        _check(opts["starts"] >= 1, "--starts must be >= 1")
    _check(opts["iterations"] >= 1, "--iterations must be >= 1")
    if opts["threads"] is not None:
        _check(opts["threads"] >= 1, "--threads must be >= 1")
    _check(math.isfinite(opts["peak_floor"]) and opts["peak_floor"] >= 0,
           "--peak-floor must be finite and >= 0")


def _check_fit1d(opts, explicit):
    _check(opts["target"] in ("square", "samples"), "--target must be square or samples")
    if opts["target"] == "samples":
        _check(opts["samples_file"] is not None, "--target samples needs --samples-file")
    _check(0.0 < opts["duty"] < 1.0, "--duty must lie in (0, 1)")
    _positive_int("n")(opts)
    _check_fit_common(opts)


def _check_fit2d(opts, explicit):
    _check(opts["target"] in ("c-shape", "samples"), "--target must be c-shape or samples")
    if opts["target"] == "samples":
        _check(opts["samples_file"] is not None, "--target samples needs --samples-file")
    _positive_int("angles")(opts)
    _positive_int("steps")(opts)
    _positive_int("grid")(opts)
    _check_fit_common(opts)


_OPTIONAL = {"plan_file": str, "samples_file": str, "out": str, "plot": str,
             "threads": int, "starts": int}

_COMMANDS: dict[str, dict] = {
    "fringe": dict(
        handler=_cmd_fringe,
        defaults={"n": 10, "plan_file": None, "points": 400, "out": None, "plot": None},
        validate=_check_fringe,
        help="product fringe profile of a phase-stepped or custom plan (CSV)",
    ),
    "point": dict(
        handler=_cmd_point,
        defaults={"n": 10, "points": 400, "out": None, "plot": None},
        validate=_all(_positive_int("n"), _positive_int("points")),
        help="point-spread profile cos(zeta)**(2n) (CSV)",
    ),
    "localize": dict(
        handler=_cmd_localize,
        defaults={"s": 0.1, "r_peak": 1.0, "gamma_d": 0.0, "branch": 1.0,
                  "points": 400, "out": None, "plot": None},
        validate=_all(_positive_float("r_peak"), _positive_float("branch"),
                      lambda o: _check(o["s"] >= 0, "--s must be >= 0"),
                      lambda o: _check(o["gamma_d"] >= 0, "--gamma-d must be >= 0"),
                      _positive_int("points")),
        help="quench localization profile around the r-field node (CSV)",
    ),
    "decohere": dict(
        handler=_cmd_decohere,
        defaults={"n": 1, "gamma_d": 0.0, "branch": 1.0, "intensity": 1.0,
                  "points": 200, "out": None, "plot": None},
        validate=_all(_positive_int("n"), _positive_float("branch"),
                      _positive_float("intensity"),
                      lambda o: _check(o["gamma_d"] >= 0, "--gamma-d must be >= 0"),
                      _positive_int("points")),
        help="solver-backed retention profile of a phase-stepped plan (CSV)",
    ),
    "fourier": dict(
        handler=_cmd_fourier,
        defaults={"plan_file": None, "out": None},
        validate=lambda o, e: _check(o["plan_file"] is not None, "--plan-file is required"),
        help="harmonic coefficients of a plan profile (JSON)",
    ),
    "realize": dict(
        handler=_cmd_realize,
        defaults={"plan_file": None, "out": None},
        validate=lambda o, e: _check(o["plan_file"] is not None, "--plan-file is required"),
        help="two-beam amplitudes and phases realizing each factor (JSON)",
    ),
    "fit1d": dict(
        handler=_cmd_fit1d,
        defaults={"target": "square", "duty": 0.5, "center": 0.0, "samples_file": None,
                  "n": 10, "starts": None, "iterations": 500, "seed": 0,
                  "threads": None, "peak_floor": 1e-8, "out": None, "plot": None},
        validate=_check_fit1d,
        help="fit a single-axis plan to a 1D target (JSON report)",
    ),
    "fit2d": dict(
        handler=_cmd_fit2d,
        defaults={"target": "c-shape", "samples_file": None, "angles": 6, "steps": 6,
                  "grid": 50, "starts": None, "iterations": 500, "seed": 0,
                  "threads": None, "peak_floor": 1e-8, "out": None, "plot": None},
        validate=_check_fit2d,
        help="fit a multi-direction plan to a planar target (JSON report)",
    ),
    "period": dict(
        handler=_cmd_period,
        defaults={"wavelength": 817e-9, "n": 10, "out": None},
        validate=_all(_positive_float("wavelength"), _positive_int("n")),
        help="spatial period wavelength/(2n) of the n-fold pattern",
    ),
}

_FLAG_HELP = {
    "n": "number of exposure steps (plan order)",
    "points": "number of grid points over one period",
    "plan_file": "JSON plan file: a list of {re, im, theta} factors",
    "samples_file": "CSV target samples (zeta,value or zeta_x,zeta_y,value)",
    "out": "output file (stdout when omitted)",
    "plot": "also render a figure of the emitted data to this path",
    "s": "uniform drive amplitude of the g2<->e1 field",
    "r_peak": "peak amplitude of the g1<->e1 standing wave",
    "gamma_d": "extra coherence damping rate",
    "branch": "decay branching ratio gamma2/gamma1 (gamma1+gamma2 = 1)",
    "intensity": "total drive intensity |s|**2 + |r|**2",
    "target": "target kind",
    "duty": "on fraction of the square target period",
    "center": "center of the square target window",
    "starts": "number of optimizer starts",
    "iterations": "iteration budget per start",
    "seed": "seed for the start generator",
    "threads": "worker threads for the multi-start search "
               "(default: CPT_LITHO_THREADS, then CPU count)",
    "peak_floor": "minimum usable peak density: each start keeps its best "
                  "iterate at or above this (0 keeps raw optimizer endpoints)",
    "angles": "number of equally spaced wave directions over [0, pi)",
    "steps": "exposure steps per direction",
    "grid": "grid size per axis",
    "wavelength": "optical wavelength in meters",
    "config": "JSON file of flag values (flags given on the command line win)",
}

_FLAG_TYPES = {
    "n": int, "points": int, "seed": int, "angles": int, "steps": int, "grid": int,
    "iterations": int, "starts": int, "threads": int,
    "s": float, "r_peak": float, "gamma_d": float, "branch": float,
    "intensity": float, "duty": float, "center": float, "wavelength": float,
    "peak_floor": float,
    "target": str, "plan_file": str, "samples_file": str, "out": str, "plot": str,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpt-litho", description=__doc__.split("\n\n")[0])
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, spec in _COMMANDS.items():
        sub = subparsers.add_parser(name, help=spec["help"], description=spec["help"])
        sub.add_argument("--config", default=argparse.SUPPRESS,
                         help=_FLAG_HELP["config"])
        for key in spec["defaults"]:
            flag = "--" + key.replace("_", "-")
            sub.add_argument(flag, dest=key, type=_FLAG_TYPES[key],
                             default=argparse.SUPPRESS, help=_FLAG_HELP.get(key))
        sub.set_defaults(command=name)
    return parser


def _merge_options(name: str, namespace: argparse.Namespace) -> tuple[dict, set]:
    spec = _COMMANDS[name]
    explicit = {k: v for k, v in vars(namespace).items() if k != "command"}
    config_path = explicit.pop("config", None)
    opts = dict(spec["defaults"])
    if config_path is not None:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path!r}: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object of flag values")
        unknown = set(config) - set(opts)
        if unknown:
            raise UsageError(f"unknown config keys for {name}: {sorted(unknown)}")
        for key, value in config.items():
            if value is None:
                opts[key] = None
                continue
            try:
                opts[key] = _FLAG_TYPES[key](value)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
    opts.update(explicit)
    spec["validate"](opts, set(explicit))
    return opts, set(explicit)


def run(argv=None) -> int:
    """Parse argv (defaults to sys.argv[1:]), execute, return the exit code."""
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
        opts, _ = _merge_options(namespace.command, namespace)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        _COMMANDS[namespace.command]["handler"](opts)
    except (ConvergenceError, NumericError) as exc:
        print(f"cpt-litho {namespace.command}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"cpt-litho {namespace.command}: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
