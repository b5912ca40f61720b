"""Command-line front end: subcommands, deterministic files, run manifests.

Every subcommand writes its outputs into --out (default ./out; the
NLHEAT_OUT environment variable overrides the default, an explicit flag
beats both) and seals the run with manifest.json, written last, so the
manifest's presence marks a completed run. CSV files are comma-separated
with a header row, LF line endings, and 17-significant-digit floats; JSON
is UTF-8 with sorted keys. Identical flags reproduce the data files byte
for byte; only the manifest's timestamp and duration vary.

Exit codes: 0 success (including reports that carry warnings), 2 usage,
3 domain too small, 4 divergent moment where a finite one is required,
5 internal consistency or fit failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, analysis, evolution, heat_kernel, kernels, polysol
from .errors import (
    DomainTooSmallError,
    FitFailureError,
    FitInconsistencyError,
    GridMismatchError,
    InternalConsistencyError,
    MomentDivergesError,
    MomentTableError,
    SamplingError,
)
from .grid import GridFunction, integrate, make_grid


def _g17(x) -> str:
    return format(float(x), ".17g")


def _cell(v) -> str:
    if isinstance(v, float):
        return _g17(v)
    return str(v)


class Run:
    """Collects one subcommand's outputs, then seals them with manifest.json."""

    def __init__(self, subcommand: str, args: argparse.Namespace):
        out = args.out if args.out is not None else os.environ.get("NLHEAT_OUT", "out")
        self.dir = Path(out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.subcommand = subcommand
        self.config = {k: v for k, v in vars(args).items() if k != "func"}
        self.input_hashes: dict[str, str] = {}
        self.outputs: list[str] = []
        self.warnings: list[str] = []
        self._t0 = time.perf_counter()

    def hash_input(self, path) -> None:
        self.input_hashes[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def write_json(self, name: str, obj) -> Path:
        path = self.dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(obj, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
        self.outputs.append(name)
        return path

    def write_csv(self, name: str, header, rows) -> Path:
        path = self.dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(_cell(v) for v in row) + "\n")
        self.outputs.append(name)
        return path

    def finish(self) -> None:
        manifest = {
            "version": __version__,
            "subcommand": self.subcommand,
            "config": self.config,
            "input_hashes": self.input_hashes,
            "outputs": self.outputs,
            "duration_s": round(time.perf_counter() - self._t0, 6),
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "warnings": self.warnings,
        }
        path = self.dir / "manifest.json"
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(manifest, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")


# ---------------------------------------------------------------------------
# flag groups


def _add_out_flag(p):
    p.add_argument("--out", default=None, help="output directory (default ./out or $NLHEAT_OUT)")


def _add_kernel_flags(p, gaussian_flag: str = "--gamma"):
    g = p.add_argument_group("kernel")
    g.add_argument(
        "--family",
        required=True,
        choices=["uniform", "bump", "gaussian", "power", "exptail", "tempered"],
    )
    g.add_argument("--rho", type=float, help="support radius (uniform, bump)")
    g.add_argument(gaussian_flag, type=float, dest="kernel_gamma", help="gaussian rate")
    g.add_argument("--gamma0", type=float, help="critical exponent (power, exptail, tempered)")
    g.add_argument("--alpha0", type=float, help="critical polynomial correction (tempered)")


def _kernel_from(args, shared_gamma: bool = False) -> kernels.KernelSpec:
    fields = {"rho": args.rho, "gamma0": args.gamma0, "alpha0": args.alpha0}
    if args.family == "gaussian":
        fields["gamma"] = args.kernel_gamma
    elif args.kernel_gamma is not None and not shared_gamma:
        # in growth subcommands --gamma may instead parametrize the growth
        raise ValueError("only gaussian kernels take --gamma")
    fields = {k: v for k, v in fields.items() if v is not None}
    return kernels.KernelSpec(args.family, **fields)


def _kernel_json(spec: kernels.KernelSpec) -> dict:
    out = {"family": spec.family}
    for name in ("rho", "gamma", "gamma0", "alpha0"):
        value = getattr(spec, name)
        if value is not None:
            out[name] = value
    return out


def _add_growth_flags(p):
    g = p.add_argument_group("growth")
    g.add_argument(
        "--growth",
        required=True,
        choices=["power", "exp", "exppower", "xlogx", "xsqrtlogx", "critical-perturbed"],
    )
    g.add_argument("--growth-gamma", type=float, help="growth rate (power, exp, exppower)")
    g.add_argument("--alpha", type=float, help="growth exponent (exppower, xlogx, xsqrtlogx)")
    g.add_argument("--alpha-minus", type=float, help="perturbation band floor")
    g.add_argument("--beta-plus", type=float, help="perturbation band ceiling")
    g.add_argument("--c0", type=float, default=1.0)
    g.add_argument("--sign", choices=["nonnegative", "two-sided-bound"], default="nonnegative")


def _require(value, what: str):
    if value is None:
        raise ValueError(f"missing {what}")
    return value


def _growth_from(args) -> analysis.GrowthSpec:
    family = args.growth.replace("-", "_")
    # --growth-gamma disambiguates when the kernel also takes a rate
    rate = args.growth_gamma
    if rate is None and args.family != "gaussian":
        rate = args.kernel_gamma
    if family == "power":
        return analysis.power_growth(_require(rate, "--growth-gamma"), c0=args.c0, sign=args.sign)
    if family == "exp":
        return analysis.exp_growth(_require(rate, "--growth-gamma"), c0=args.c0, sign=args.sign)
    if family == "exppower":
        return analysis.exp_power_growth(
            _require(rate, "--growth-gamma"),
            _require(args.alpha, "--alpha"),
            c0=args.c0,
            sign=args.sign,
        )
    if family == "xlogx":
        return analysis.xlogx_growth(_require(args.alpha, "--alpha"), c0=args.c0, sign=args.sign)
    if family == "xsqrtlogx":
        return analysis.xsqrtlogx_growth(
            _require(args.alpha, "--alpha"), c0=args.c0, sign=args.sign
        )
    return analysis.critical_perturbed(
        _require(args.alpha_minus, "--alpha-minus"),
        _require(args.beta_plus, "--beta-plus"),
        c0=args.c0,
        sign=args.sign,
    )


def _growth_json(g: analysis.GrowthSpec) -> dict:
    out = {"family": g.family, "c0": g.c0, "sign": g.sign}
    for name in ("gamma", "alpha", "alpha_minus", "beta_plus"):
        value = getattr(g, name)
        if value is not None:
            out[name] = value
    return out


def _floats(text: str, what: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"{what} must be a comma-separated list of numbers") from None
    if not values:
        raise ValueError(f"{what} must be a comma-separated list of numbers")
    return values


# ---------------------------------------------------------------------------
# initial data mini-language: even monomial | growth expression | CSV path

_MONOMIAL = re.compile(r"^\s*x\^(\d+)\s*$")


def _growth_expr(text: str) -> analysis.GrowthSpec:
    family, _, params = text.partition(":")
    factories = {
        "power": analysis.power_growth,
        "exp": analysis.exp_growth,
        "exppower": analysis.exp_power_growth,
        "xlogx": analysis.xlogx_growth,
        "xsqrtlogx": analysis.xsqrtlogx_growth,
        "critical-perturbed": analysis.critical_perturbed,
    }
    key = family.strip().replace("_", "-")
    if key not in factories:
        raise ValueError(f"unknown data expression {text!r}")
    kwargs = {}
    for part in params.split(","):
        if not part.strip():
            continue
        name, eq, value = part.partition("=")
        if not eq:
            raise ValueError(f"bad parameter {part!r} in data expression")
        kwargs[name.strip().replace("-", "_")] = float(value)
    try:
        return factories[key](**kwargs)
    except TypeError:
        raise ValueError(f"bad parameters for {key} data: {params!r}") from None


def _load_data_csv(path: Path) -> GridFunction:
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    try:
        float(lines[0].split(",")[0])
        start = 0
    except ValueError:
        start = 1
    xs, vs = [], []
    for line in lines[start:]:
        cols = line.split(",")
        if len(cols) < 2:
            raise ValueError(f"{path}: expected two columns (x, value)")
        xs.append(float(cols[0]))
        vs.append(float(cols[1]))
    x = np.asarray(xs)
    if len(x) < 3 or x[-1] <= 0:
        raise ValueError(f"{path}: need a symmetric grid of at least 3 nodes")
    grid = make_grid(float(x[-1]), float(x[1] - x[0]))
    if len(x) != grid.point_count or not np.allclose(x, grid.nodes, atol=1e-9 * grid.spacing):
        raise ValueError(
            f"{path}: nodes must form a uniform symmetric grid on [-L, L] with 0 a node"
        )
    return GridFunction(grid, np.asarray(vs))


def _resolve_data(args, spec: kernels.KernelSpec, run: Run) -> GridFunction:
    text = args.data
    path = Path(text)
    if path.suffix.lower() == ".csv" or path.is_file():
        if args.L is not None or args.h is not None:
            raise ValueError("--L/--h conflict with CSV data (the file fixes the grid)")
        run.hash_input(path)
        return _load_data_csv(path)
    if args.L is None or args.h is None:
        raise ValueError("expression data needs --L and --h")
    grid = make_grid(args.L, args.h)
    m = _MONOMIAL.match(text)
    if m:
        power = int(m.group(1))
        if power < 2 or power % 2:
            raise ValueError("monomial data must be x^(2p) with p >= 1")
        return GridFunction(grid, grid.nodes**power)
    g = _growth_expr(text)
    return GridFunction(grid, analysis.growth_values(g, grid.nodes, kernel_gamma=spec.gamma))


# ---------------------------------------------------------------------------
# subcommands


def cmd_kernel_info(args) -> int:
    run = Run("kernel-info", args)
    spec = _kernel_from(args)
    max_order = args.moment
    if max_order < 0:
        raise ValueError("--moment must be nonnegative")
    moments = {}
    for order in range(0, max_order + 1, 2):
        try:
            moments[f"m{order}"] = kernels.moment(spec, order)
        except MomentDivergesError as err:
            moments[f"m{order}"] = None
            run.warnings.append(str(err))
    gamma0, alpha0 = kernels.critical_exponents(spec)
    report = {
        "kernel": _kernel_json(spec),
        "normalizer": kernels.normalizer(spec),
        "moments": moments,
        "decay_class": kernels.decay_class(spec).value,
        "critical_exponents": {
            "gamma0": None if math.isinf(gamma0) else gamma0,
            "alpha0": alpha0,
        },
        "warnings": run.warnings,
    }
    run.write_json("kernel_info.json", report)
    run.finish()
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_evolve(args) -> int:
    run = Run("evolve", args)
    spec = _kernel_from(args)
    u0 = _resolve_data(args, spec, run)
    if args.method == "march":
        if args.dt is None:
            raise ValueError("--method march needs --dt")
        result = evolution.solve_march(spec, u0, args.t, args.dt)
    else:
        result = evolution.solve_representation(spec, u0, args.t, tol=args.tol)
    run.write_csv(
        "u.csv",
        ["x", "u0", "u_t"],
        zip(u0.grid.nodes, u0.values, result.function.values),
    )
    diagnostics = {
        "t": result.t,
        "method": result.method,
        "trusted_radius": result.trusted_radius,
        "mass_in": integrate(u0),
        "mass_out": result.mass,
        ("K" if result.method == "representation" else "steps"): result.order_or_steps,
        "error_budget": result.error_budget,
    }
    run.write_json("diagnostics.json", diagnostics)
    run.finish()
    print(
        f"evolve: t={result.t:g} method={result.method} "
        f"trusted_radius={result.trusted_radius:g} -> {run.dir}"
    )
    return 0


def cmd_heatkernel(args) -> int:
    run = Run("heatkernel", args)
    spec = _kernel_from(args)
    grid = make_grid(args.L, args.h)
    exp = heat_kernel.omega(spec, grid, args.t, tol=args.tol, method=args.method)
    run.write_csv("omega.csv", ["x", "omega"], zip(grid.nodes, exp.function.values))
    run.write_json(
        "omega.json",
        {
            "t": exp.t,
            "K": exp.order,
            "remainder_bound": exp.remainder_bound,
            "truncation_loss": exp.truncation_loss,
            "mass": exp.mass,
            "mass_expected": exp.mass_expected,
        },
    )
    run.finish()
    print(f"heatkernel: t={exp.t:g} K={exp.order} mass={exp.mass:.12g} -> {run.dir}")
    return 0


def _barrier_from(args) -> analysis.Barrier:
    rate = _require(args.gamma, "--gamma (barrier rate)")
    if args.barrier == "power":
        return analysis.PowerBarrier(rate)
    if args.barrier == "exp":
        return analysis.ExpBarrier(rate)
    return analysis.TemperedBarrier(rate, _require(args.alpha, "--alpha (barrier exponent)"))


def cmd_barrier_check(args) -> int:
    run = Run("barrier-check", args)
    spec = _kernel_from(args)
    barrier = _barrier_from(args)
    lam = analysis.analytic_lambda(spec, barrier)
    grid = make_grid(args.L, args.h)
    lam_hat = analysis.numeric_lambda(kernels.discretize(spec, grid), barrier)
    report = {
        "kernel": _kernel_json(spec),
        "barrier": {"kind": args.barrier, "gamma": args.gamma, "alpha": args.alpha},
        "lambda": lam,
        "lambda_hat": lam_hat,
        "satisfied": bool(lam_hat <= lam + 1e-6),
        "grid": {"L": grid.half_extent, "h": grid.spacing},
    }
    run.write_json("barrier_check.json", report)
    run.finish()
    print(
        f"barrier-check: lambda_hat={lam_hat:.12g} <= lambda={lam:.12g}: "
        f"{report['satisfied']}"
    )
    return 0


_VERDICT_NAMES = {
    analysis.Outcome.EXISTS: "Exists",
    analysis.Outcome.NOT_EXISTS: "NotExists",
    analysis.Outcome.BLOWS_UP: "BlowsUpFiniteTime",
    analysis.Outcome.OUTSIDE_THEORY: "OutsideTheory",
}


def cmd_classify(args) -> int:
    run = Run("classify", args)
    spec = _kernel_from(args, shared_gamma=True)
    g = _growth_from(args)
    verdict = analysis.classify(spec, g)
    report = {
        "kernel": _kernel_json(spec),
        "growth": _growth_json(g),
        "verdict": _VERDICT_NAMES[verdict.outcome],
        "citation": verdict.citation,
    }
    if verdict.barrier is not None:
        b = verdict.barrier
        kind = {"PowerBarrier": "power", "ExpBarrier": "exp", "TemperedBarrier": "tempered"}[
            type(b).__name__
        ]
        report["barrier"] = {"kind": kind, **{k: v for k, v in vars(b).items()}}
    if verdict.lam is not None:
        report["lambda"] = verdict.lam
    if verdict.detail is not None:
        report["detail"] = verdict.detail
    run.write_json("classify.json", report)
    run.finish()
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_blowup(args) -> int:
    run = Run("blowup", args)
    times = _floats(args.times, "--times")
    spec = kernels.gaussian(args.gamma)
    grid = make_grid(args.L, args.h)
    fit = analysis.fit_estimates(
        spec, grid, times, x_min=args.x_min, x_max=args.x_max
    )
    bracket = analysis.blowup_bracket(args.gamma, args.alpha_minus, args.beta_plus, fit)
    report = {
        "gamma": args.gamma,
        "alpha_minus": bracket.alpha_minus,
        "beta_plus": bracket.beta_plus,
        "c2": bracket.c2,
        "c4": bracket.c4,
        "t_lo": bracket.t_lo,
        "t_hi": bracket.t_hi,
        "times": times,
        "grid": {"L": grid.half_extent, "h": grid.spacing},
    }
    run.write_json("blowup.json", report)
    run.finish()
    print(f"blowup: T in [{bracket.t_lo:.12g}, {bracket.t_hi:.12g}]")
    return 0


def cmd_estimate_fit(args) -> int:
    run = Run("estimate-fit", args)
    spec = _kernel_from(args)
    times = _floats(args.times, "--times")
    grid = make_grid(args.L, args.h)
    fit = analysis.fit_estimates(
        spec, grid, times, sigma=args.sigma, x_min=args.x_min, x_max=args.x_max
    )
    x, t, ln_w = fit.samples
    lo, hi = fit.envelopes(x, t)
    run.write_csv(
        "estimate_fit.csv",
        ["x", "t", "ln_omega", "lower_env", "upper_env"],
        zip(x, t, ln_w, lo, hi),
    )
    run.write_json(
        "estimate_fit.json",
        {
            "sigma": fit.sigma,
            "phi": fit.phi,
            "c1": fit.c1,
            "c2": fit.c2,
            "c3": fit.c3,
            "c4": fit.c4,
            "slope_lower": fit.slope_lower,
            "slope_upper": fit.slope_upper,
            "residuals": {"rms_lower": fit.rms_lower, "rms_upper": fit.rms_upper},
            "ranges": {
                "x_min": fit.x_min,
                "x_max": fit.x_max,
                "times": list(fit.times),
                "samples": int(len(x)),
            },
        },
    )
    run.finish()
    print(
        f"estimate-fit: c1={fit.c1:.6g} c2={fit.c2:.6g} c3={fit.c3:.6g} c4={fit.c4:.6g} "
        f"({len(x)} samples)"
    )
    return 0


def _coef_json(c) -> str | float:
    if isinstance(c, Fraction):
        return str(c)
    return float(c)


def cmd_poly(args) -> int:
    run = Run("poly", args)
    spec = _kernel_from(args)
    table = kernels.moment_table(spec, max_order=2 * args.p)
    sol = polysol.explicit_solution(args.p, table)
    t_power, lead = sol.leading_term()
    coefficients = {
        str(k): {
            "powers": [2 * j for j in range(len(c.coeffs))],
            "coeffs": [_coef_json(v) for v in c.coeffs],
        }
        for k, c in enumerate(sol.coefficients, start=1)
    }
    report = {
        "p": sol.p,
        "kernel": _kernel_json(spec),
        "exact": sol.exact,
        "coefficients": coefficients,
        "leading_term": {"t_power": t_power, "coefficient": _coef_json(lead)},
        "polynomial": sol.as_string(),
    }
    run.write_json("poly.json", report)
    run.finish()
    print(sol.as_string())
    return 0


def cmd_probe(args) -> int:
    run = Run("probe", args)
    spec = _kernel_from(args, shared_gamma=True)
    g = _growth_from(args)
    radii = _floats(args.radii, "--radii")
    result = analysis.divergence_probe(
        spec,
        g,
        args.t,
        radii,
        ratio_factor=args.ratio_factor,
        increment_tol=args.increment_tol,
        spacing=args.spacing,
    )
    run.write_csv("probe.csv", ["radius", "value"], zip(result.radii, result.values))
    run.write_json(
        "probe.json",
        {
            "t": result.t,
            "radii": list(result.radii),
            "values": list(result.values),
            "flag": result.flag,
            "ratio": result.ratio,
            "last_increment": result.last_increment,
            "order": result.order,
        },
    )
    run.finish()
    print(f"probe: t={result.t:g} flag={result.flag} ratio={result.ratio:.6g}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlheat",
        description="numerics and exact algebra for u_t = J*u - u on the line",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("kernel-info", help="family, normalizer, moments, decay class")
    _add_kernel_flags(p)
    p.add_argument("--moment", type=int, default=4, help="report even moments up to this order")
    _add_out_flag(p)
    p.set_defaults(func=cmd_kernel_info)

    p = sub.add_parser("evolve", help="solve the Cauchy problem for one initial datum")
    _add_kernel_flags(p)
    p.add_argument("--data", required=True, help='x^(2p), growth expression, or CSV path')
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--method", choices=["repr", "march"], default="repr")
    p.add_argument("--tol", type=float, default=1e-12, help="series tolerance (repr)")
    p.add_argument("--dt", type=float, help="time step (march)")
    p.add_argument("--L", type=float, help="half extent (expression data)")
    p.add_argument("--h", type=float, help="spacing (expression data)")
    _add_out_flag(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("heatkernel", help="regular part omega(., t) of the heat kernel")
    _add_kernel_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--method", choices=["fft", "direct"], default="fft")
    _add_out_flag(p)
    p.set_defaults(func=cmd_heatkernel)

    p = sub.add_parser("barrier-check", help="numeric vs analytic supersolution constant")
    _add_kernel_flags(p, gaussian_flag="--kernel-gamma")
    p.add_argument("--barrier", required=True, choices=["power", "exp", "tempered"])
    p.add_argument("--gamma", type=float, required=True, help="barrier rate")
    p.add_argument("--alpha", type=float, help="barrier exponent (tempered)")
    p.add_argument("--L", type=float, default=30.0)
    p.add_argument("--h", type=float, default=0.01)
    _add_out_flag(p)
    p.set_defaults(func=cmd_barrier_check)

    p = sub.add_parser("classify", help="symbolic verdict for a (kernel, growth) pairing")
    _add_kernel_flags(p)
    _add_growth_flags(p)
    _add_out_flag(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("blowup", help="blow-up time bracket for the critical perturbed class")
    p.add_argument("--gamma", type=float, required=True, help="gaussian kernel rate")
    p.add_argument("--alpha-minus", type=float, required=True)
    p.add_argument("--beta-plus", type=float, required=True)
    p.add_argument("--times", required=True, help="comma-separated fit times")
    p.add_argument("--L", type=float, default=18.0)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--x-min", type=float, default=math.e)
    p.add_argument("--x-max", type=float, default=None)
    _add_out_flag(p)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("estimate-fit", help="two-sided tail envelopes for ln omega")
    _add_kernel_flags(p)
    p.add_argument("--times", required=True, help="comma-separated sample times")
    p.add_argument("--sigma", type=float, help="inner envelope radius (compact kernels)")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--h", type=float, default=0.02)
    p.add_argument("--x-min", type=float, default=math.e)
    p.add_argument("--x-max", type=float, default=None)
    _add_out_flag(p)
    p.set_defaults(func=cmd_estimate_fit)

    p = sub.add_parser("poly", help="exact polynomial solution for data x^(2p)")
    _add_kernel_flags(p)
    p.add_argument("--p", type=int, required=True)
    _add_out_flag(p)
    p.set_defaults(func=cmd_poly)

    p = sub.add_parser("probe", help="truncated-data pairing over growing radii")
    _add_kernel_flags(p)
    _add_growth_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--radii", required=True, help="comma-separated radii")
    p.add_argument("--spacing", type=float, default=0.02)
    p.add_argument("--ratio-factor", type=float, default=10.0)
    p.add_argument("--increment-tol", type=float, default=1e-6)
    _add_out_flag(p)
    p.set_defaults(func=cmd_probe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainTooSmallError as err:
        print(f"nlheat: domain too small: {err}", file=sys.stderr)
        return 3
    except MomentDivergesError as err:
        print(f"nlheat: divergent moment: {err}", file=sys.stderr)
        return 4
    except (InternalConsistencyError, FitFailureError, FitInconsistencyError) as err:
        print(f"nlheat: {type(err).__name__}: {err}", file=sys.stderr)
        return 5
    except (ValueError, GridMismatchError, MomentTableError, SamplingError, OSError) as err:
        print(f"nlheat: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
