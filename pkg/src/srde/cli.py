"""Command-line shell: simulate and the verification subcommands.

Exit codes: 0 success, 1 configuration error (the diagnostic names the
field), 2 a verification assertion failed.  All outputs (CSV + manifest
JSON) are byte-deterministic for a fixed (config, seed).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import experiments as xp
from .backend import BACKEND_NAME
from .errors import ConfigError, HorizonError, InvalidArgumentError, SrdeError
from .grid import GridSpec, write_trajectory_csv
from .heat_kernel import ESTIMATE_PARAMS
from .noise import sample_noise, split_stream, write_slab
from .reporting import write_csv, write_manifest
from .solver import SolveConfig, solve

_PARAM_COLUMNS = ("t", "s", "x", "y", "eta", "theta")


def _out_dir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _base_manifest(args, raw: dict, extra: dict) -> dict:
    manifest = {
        "subcommand": args.command,
        "schema": cfgmod.SCHEMA_VERSION,
        "backend": BACKEND_NAME,
        "config": raw,
        "config_hash": cfgmod.config_hash(raw),
    }
    manifest.update(extra)
    return manifest


def _grid_dict(g: GridSpec) -> dict:
    return {"half_width": g.half_width, "nx": g.nx, "dt": g.dt, "nt": g.nt}


def _grid_from_section(raw: dict, defaults: GridSpec) -> GridSpec:
    if "grid" not in raw:
        return defaults
    return cfgmod.read_section(raw, "grid", cfgmod.GridSection).build()


def _write_plot_data(path: Path, series: list[tuple[str, float, float]]) -> None:
    write_csv(path, ["series", "x", "y"], series)


# --- subcommand: simulate -----------------------------------------------------

def _cmd_simulate(args) -> int:
    raw = cfgmod.load_raw_config(args.config)
    grid = _grid_from_section(raw, GridSpec(10.0, 201, 1e-2, 10))
    coeff_sec = cfgmod.read_section(raw, "coefficients", cfgmod.CoefficientSection)
    coeffs = coeff_sec.build()
    weight_sec = cfgmod.read_section(raw, "weights", cfgmod.WeightSection)
    kappa = weight_sec.kappa if weight_sec.kappa is not None else coeffs.c1
    from .weights import WeightParams

    weights = WeightParams(lam=weight_sec.decay, kappa=kappa)
    initial = cfgmod.read_section(raw, "initial", cfgmod.InitialSection).build(grid)
    monitor = cfgmod.read_section(raw, "monitors", cfgmod.MonitorSection).build()
    run = cfgmod.read_section(
        raw, "run", cfgmod.RunSection, seed=args.seed, output_dir=args.output,
        replicas=args.replicas,
    )
    out = _out_dir(args)

    statuses = []
    for r in range(run.replicas):
        slab = sample_noise(grid, *split_stream(run.seed, r))
        traj = solve(
            SolveConfig(
                grid=grid, coeffs=coeffs, weights=weights,
                initial=initial, noise=slab, monitor=monitor,
            )
        )
        write_trajectory_csv(traj, out / f"trajectory_{r:03d}.csv")
        if args.dump_noise:
            write_slab(slab, out / f"noise_{r:03d}.bin")
        statuses.append(
            {
                "replica": r,
                "status": traj.status.kind,
                "stop_index": traj.status.stop_index,
                "reason": traj.status.reason,
                "frames": len(traj.frames),
            }
        )
    manifest = _base_manifest(
        args,
        raw,
        {
            "seed": run.seed,
            "grid": _grid_dict(grid),
            "coefficients": {"drift": coeff_sec.drift, "sigma": coeff_sec.sigma},
            "weights": {"decay": weights.lam, "kappa": weights.kappa,
                        "beta": weights.beta, "t_star": weights.t_star},
            "monitors": {
                "blow_up_level": monitor.blow_up_level,
                "closeness_level": monitor.closeness_level,
                "enabled": monitor.enabled,
            },
            "replicas": run.replicas,
            "results": statuses,
        },
    )
    write_manifest(out / "manifest.json", manifest)
    return 0


# --- subcommand: verify-kernel --------------------------------------------------

def _cmd_verify_kernel(args) -> int:
    raw = cfgmod.load_raw_config(args.config)
    section = raw.get("kernel_sweep", {})
    cfg = xp.KernelSweepConfig(
        samples=args.samples or section.get("samples", 1000),
        seed=args.seed if args.seed is not None else section.get("seed", 7),
    )
    report = xp.run_kernel_sweep(cfg)
    out = _out_dir(args)
    rows = []
    for row in report.rows:
        cells = [row.estimate.value]
        for name in _PARAM_COLUMNS:
            cells.append(row.params.get(name) if name in ESTIMATE_PARAMS[row.estimate] else None)
        cells += [row.lhs, row.rhs, row.margin]
        rows.append(cells)
    write_csv(out / "kernel_sweep.csv", ["estimate_id", *_PARAM_COLUMNS, "lhs", "rhs", "margin"], rows)
    if args.plot_data:
        _write_plot_data(
            out / "plotdata.csv",
            [(r.estimate.value, r.lhs, r.rhs) for r in report.rows],
        )
    manifest = _base_manifest(
        args,
        raw,
        {
            "seed": cfg.seed,
            "samples": cfg.samples,
            "violations": report.violations,
            "rows": len(report.rows),
        },
    )
    write_manifest(out / "manifest.json", manifest)
    if report.violations:
        print(f"verify-kernel: {report.violations} inequality violations", file=sys.stderr)
        return 2
    return 0


# --- subcommand: verify-gronwall ------------------------------------------------

def _cmd_verify_gronwall(args) -> int:
    raw = cfgmod.load_raw_config(args.config)
    section = raw.get("gronwall", {})
    cfg = xp.GronwallSweepConfig(
        families=args.families or section.get("families", 100),
        seed=args.seed if args.seed is not None else section.get("seed", 7),
        t_max=section.get("t_max", 1.0),
        segments=section.get("segments", 8),
        ratio_tolerance=section.get("ratio_tolerance", 1e-4),
    )
    out = _out_dir(args)
    try:
        report = xp.run_gronwall_sweep(cfg)
    except SrdeError as exc:
        print(f"verify-gronwall: {exc}", file=sys.stderr)
        return 2
    write_csv(
        out / "gronwall.csv",
        ["family", "t", "ode_value", "bound", "ratio"],
        report.rows,
    )
    write_csv(
        out / "zero_forcing.csv",
        ["k", "theta", "log_bound", "bound"],
        [
            (k + 1, report.zero_forcing_thetas[k], report.zero_forcing_log_bounds[k],
             report.zero_forcing_bounds[k])
            for k in range(len(report.zero_forcing_thetas))
        ],
    )
    if args.plot_data:
        _write_plot_data(
            out / "plotdata.csv",
            [("max_ratio", float(f), float(r)) for f, r in enumerate(report.family_ratios)],
        )
    failures = []
    if report.max_ratio > 1.0 + cfg.ratio_tolerance:
        failures.append(f"max ODE/bound ratio {report.max_ratio}")
    if not report.strictly_decreasing:
        failures.append("zero-forcing log-bounds not strictly decreasing")
    if not report.final_bound <= 1e-4:
        failures.append(f"zero-forcing final bound {report.final_bound} above 1e-4")
    manifest = _base_manifest(
        args,
        raw,
        {
            "seed": cfg.seed,
            "families": cfg.families,
            "max_ratio": report.max_ratio,
            "zero_forcing": {
                "t_star": report.zero_forcing_t_star,
                "iterations": report.zero_forcing_iterations,
                "strictly_decreasing": report.strictly_decreasing,
                "final_bound": report.final_bound,
            },
            "failures": failures,
        },
    )
    write_manifest(out / "manifest.json", manifest)
    if failures:
        print("verify-gronwall: " + "; ".join(failures), file=sys.stderr)
        return 2
    return 0


# --- subcommand: verify-moments --------------------------------------------------

def _moment_config(raw: dict, args) -> xp.MomentConfig:
    section = raw.get("moments", {})
    known = {
        "p_high", "p_low", "epsilon", "h_terminal", "replicas", "seed",
        "variance_check", "variance_replicas",
    }
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown config field 'moments.{sorted(unknown)[0]}'")
    grid = _grid_from_section(raw, GridSpec(5.0, 101, 1e-3, 100))
    coeff = cfgmod.read_section(raw, "coefficients", cfgmod.CoefficientSection,
                                drift=None, sigma=None) if "coefficients" in raw else None
    return xp.MomentConfig(
        grid=grid,
        drift=coeff.drift if coeff else "zero",
        sigma=coeff.sigma if coeff else "constant-diffusion(1.0)",
        p_high=section.get("p_high", 12.0),
        p_low=section.get("p_low", 1.0),
        epsilon=section.get("epsilon", 0.25),
        h_terminal=section.get("h_terminal", 1.0),
        replicas=args.replicas or section.get("replicas", 1000),
        seed=args.seed if args.seed is not None else section.get("seed", 7),
        variance_check=section.get("variance_check", True),
        variance_replicas=section.get("variance_replicas", 10000),
        rhs_scale=args.debug_scale_rhs,
    )


def _apriori_config(raw: dict, args) -> xp.AprioriConfig:
    section = raw.get("apriori", {})
    known = {"replicas", "seed", "decay", "drift", "sigma", "initial"}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown config field 'apriori.{sorted(unknown)[0]}'")
    return xp.AprioriConfig(
        replicas=section.get("replicas", 200),
        seed=section.get("seed", 11),
        decay=section.get("decay", 2.0),
        drift=section.get("drift", "xlogx(1.0)"),
        sigma=section.get("sigma", "tanh-diffusion(0.4)"),
        initial=section.get("initial", "gaussian(1.0, 1.0)"),
    )


def _cmd_verify_moments(args) -> int:
    raw = cfgmod.load_raw_config(args.config)
    cfg = _moment_config(raw, args)
    report = xp.run_moment_experiment(cfg)
    out = _out_dir(args)

    rows = [
        ("p_high", cfg.p_high),
        ("lhs_high", report.lhs_high),
        ("lhs_high_se", report.lhs_high_se),
        ("rhs_high", report.rhs_high),
        ("log10_rhs_high", report.log10_rhs_high),
        ("margin_high", report.margin_high),
        ("p_low", cfg.p_low),
        ("epsilon", cfg.epsilon),
        ("lhs_low", report.lhs_low),
        ("lhs_low_se", report.lhs_low_se),
        ("rhs_low", report.rhs_low),
        ("log10_constant_low", report.log10_constant_low),
        ("margin_low", report.margin_low),
    ]
    failures = []
    if not report.high_ok:
        failures.append("high-order moment bound violated")
    if not report.low_ok:
        failures.append("lower-order moment split violated")
    if not report.constant_increasing_in_T:
        failures.append("lower-order constant not increasing in T")
    if not report.constant_decreasing_to_zero:
        failures.append("lower-order constant not decreasing toward T -> 0")
    if report.variance is not None:
        rows += [
            ("variance_estimate", report.variance.estimate),
            ("variance_target", report.variance.target),
            ("variance_band_lo", report.variance.band[0]),
            ("variance_band_hi", report.variance.band[1]),
        ]
        if not report.variance.inside:
            failures.append(
                f"pointwise variance {report.variance.estimate} outside "
                f"[{report.variance.band[0]}, {report.variance.band[1]}]"
            )

    apriori_manifest = None
    if not args.skip_apriori:
        ap_cfg = _apriori_config(raw, args)
        ap = xp.run_apriori_experiment(ap_cfg)
        if ap.violations:
            failures.append(f"pathwise a-priori bound violated on {ap.violations} replicas")
        if not ap.tail_budget_ok:
            failures.append(
                f"truncation tail budget {ap.tail_budget} not below 1e-6 of the reported norm"
            )
        rows += [
            ("apriori_violations", ap.violations),
            ("apriori_min_margin", float(np.min(ap.margins))),
            ("apriori_mean_norm", float(np.mean(ap.u_norms))),
            ("apriori_mean_rhs", float(np.mean(ap.rhs_values))),
            ("apriori_tail_budget", ap.tail_budget),
        ]
        apriori_manifest = {
            "replicas": ap_cfg.replicas,
            "t_star": ap.t_star,
            "violations": ap.violations,
            "incomplete": ap.incomplete,
            "tail_budget": ap.tail_budget,
            "tail_budget_ok": ap.tail_budget_ok,
            "constants": {
                "beta": {"value": ap.chain.beta, "formula": "max(lambda^2/2, 4*kappa)"},
                "peak_growth": {
                    "value": ap.chain.peak_growth,
                    "formula": "exp(lambda^2/(4 beta) * exp(2 beta T - 1))",
                },
                "absorption": {
                    "value": ap.chain.absorption,
                    "formula": "(c1/beta) * peak_growth; <= 1/2 iff T <= t_star",
                },
                "moment_rate": {
                    "value": ap.chain.moment_rate,
                    "formula": "2*peak_growth*(lambda^2 e^(2 beta T) T + lambda e^(beta T) sqrt(T/(2 pi)))",
                },
                "rate_linear": {"value": ap.chain.rate_linear, "formula": "2*c1*moment_rate"},
                "rate_log": {"value": ap.chain.rate_log, "formula": "4*c1*peak_growth"},
            },
        }

    write_csv(out / "moments.csv", ["metric", "value"], rows)
    if args.plot_data:
        _write_plot_data(
            out / "plotdata.csv",
            [
                ("lower_order_constant_log10", float(t), float(lc / math.log(10.0)))
                for t, lc in zip(report.sweep_T, report.sweep_log_constant)
            ],
        )
    manifest = _base_manifest(
        args,
        raw,
        {
            "seed": cfg.seed,
            "replicas": cfg.replicas,
            "grid": _grid_dict(cfg.grid),
            "constants": {
                "high_order": {
                    "p": cfg.p_high,
                    "h_T": cfg.h_terminal,
                    "T": cfg.grid.horizon,
                    "log10_value": report.log10_rhs_high,
                    "formula": "2*sqrt(2)*p^(p/2)*(2/pi)^p*(2*pi)^(-(p/2+1)/2)"
                    "*((6p-8)/(p-10))^(3p/2-2)*T^(p/4-3/2)*exp(3*p^2*h_T^2*T/4)",
                },
                "lower_order": {
                    "p": cfg.p_low,
                    "epsilon": cfg.epsilon,
                    "log10_value": report.log10_constant_low,
                    "formula": "inf over q>10 of p/(q-p)*q^(-q/p)*eps^(1-q/p)"
                    "*(q-p+q*C(q,h_T,T))^(q/p)",
                },
            },
            "margins": {"high": report.margin_high, "low": report.margin_low},
            "apriori": apriori_manifest,
            "failures": failures,
        },
    )
    write_manifest(out / "manifest.json", manifest)
    if failures:
        print("verify-moments: " + "; ".join(failures), file=sys.stderr)
        return 2
    return 0


# --- subcommand: holder-fit -------------------------------------------------------

def _cmd_holder_fit(args) -> int:
    raw = cfgmod.load_raw_config(args.config)
    section = raw.get("holder", {})
    known = {"time_replicas", "space_replicas", "seed", "sigma"}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown config field 'holder.{sorted(unknown)[0]}'")
    cfg = xp.HolderConfig(
        time_replicas=args.replicas or section.get("time_replicas", 400),
        space_replicas=args.replicas or section.get("space_replicas", 300),
        seed=args.seed if args.seed is not None else section.get("seed", 13),
        sigma=section.get("sigma", "constant-diffusion(1.0)"),
    )
    report = xp.run_holder_experiment(cfg)
    out = _out_dir(args)
    rows = [("time", lag, m) for lag, m in zip(report.time_lags, report.time_moments)]
    rows += [("space", sep, m) for sep, m in zip(report.space_seps, report.space_moments)]
    write_csv(out / "holder.csv", ["kind", "lag", "second_moment"], rows)
    if args.plot_data:
        _write_plot_data(out / "plotdata.csv", rows)
    failures = []
    if report.degenerate:
        pass  # zero diffusion: flagged, nothing to fit
    else:
        if not (0.4 <= report.time_slope <= 0.6):
            failures.append(f"time slope {report.time_slope} outside [0.4, 0.6]")
        if not (0.85 <= report.space_slope <= 1.15):
            failures.append(f"space slope {report.space_slope} outside [0.85, 1.15]")
    manifest = _base_manifest(
        args,
        raw,
        {
            "seed": cfg.seed,
            "degenerate": report.degenerate,
            "time_slope": report.time_slope,
            "time_slope_se": report.time_slope_se,
            "space_slope": report.space_slope,
            "space_slope_se": report.space_slope_se,
            "failures": failures,
        },
    )
    write_manifest(out / "manifest.json", manifest)
    if failures:
        print("holder-fit: " + "; ".join(failures), file=sys.stderr)
        return 2
    return 0


# --- subcommand: uniqueness-probe ---------------------------------------------------

def _cmd_uniqueness(args) -> int:
    raw = cfgmod.load_raw_config(args.config)
    section = raw.get("uniqueness", {})
    known = {"levels", "replicas", "seed", "ceiling", "decay"}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown config field 'uniqueness.{sorted(unknown)[0]}'")
    levels = tuple(section.get("levels", [4, 8, 16]))
    coeff = cfgmod.read_section(raw, "coefficients", cfgmod.CoefficientSection) \
        if "coefficients" in raw else cfgmod.CoefficientSection()
    cfg = xp.UniquenessConfig(
        levels=levels,
        replicas=args.replicas or section.get("replicas", 48),
        seed=args.seed if args.seed is not None else section.get("seed", 17),
        ceiling=section.get("ceiling", 1e-2),
        decay=section.get("decay", 2.0),
        drift=coeff.drift,
        sigma=coeff.sigma,
    )
    report = xp.run_uniqueness_probe(cfg)
    out = _out_dir(args)
    write_csv(
        out / "uniqueness.csv",
        ["level", "distance", "se", "distance_unstopped", "se_unstopped",
         "tau_m_hits", "tau_delta_hits"],
        [
            (
                int(report.levels[i]),
                report.distances[i],
                report.distances_se[i],
                report.distances_unstopped[i],
                report.distances_unstopped_se[i],
                int(report.tau_m_hits[i]),
                int(report.tau_delta_hits[i]),
            )
            for i in range(len(report.levels))
        ],
    )
    if args.plot_data:
        _write_plot_data(
            out / "plotdata.csv",
            [("uniqueness", float(report.levels[i]), float(report.distances[i]))
             for i in range(len(report.levels))],
        )
    failures = []
    if not report.nonincreasing_within_2se:
        failures.append("mollification distances not nonincreasing within 2 SE")
    if not report.final_below_ceiling:
        failures.append(
            f"finest-level distance {report.distances[-1]} above ceiling {cfg.ceiling}"
        )
    manifest = _base_manifest(
        args,
        raw,
        {
            "seed": cfg.seed,
            "levels": [int(l) for l in report.levels],
            "distances": list(report.distances),
            "distances_unstopped": list(report.distances_unstopped),
            "zero_forcing_ceiling_log": report.zero_forcing_ceiling_log,
            "failures": failures,
        },
    )
    write_manifest(out / "manifest.json", manifest)
    if failures:
        print("uniqueness-probe: " + "; ".join(failures), file=sys.stderr)
        return 2
    return 0


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srde",
        description="Simulate a stochastic reaction-diffusion equation on the "
        "line and verify its provable bounds numerically.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="TOML config file (schema = 1)")
        p.add_argument("--output", default="srde-out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="base RNG seed")
        p.add_argument("--plot-data", action="store_true", help="emit long-format plotdata.csv")
        p.add_argument("--replicas", type=int, default=None, help="replica count override")

    p = sub.add_parser("simulate", help="solve and write trajectory CSVs")
    common(p)
    p.add_argument("--dump-noise", action="store_true", help="also dump noise slabs (binary)")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("verify-kernel", help="kernel inequality sweep")
    common(p)
    p.add_argument("--samples", type=int, default=None, help="tuples per estimate")
    p.set_defaults(fn=_cmd_verify_kernel)

    p = sub.add_parser("verify-gronwall", help="Gronwall bound harnesses")
    common(p)
    p.add_argument("--families", type=int, default=None, help="seeded rate families")
    p.set_defaults(fn=_cmd_verify_gronwall)

    p = sub.add_parser("verify-moments", help="moment bounds, variance, pathwise bound")
    common(p)
    p.add_argument("--skip-apriori", action="store_true", help="skip the pathwise bound run")
    p.add_argument("--debug-scale-rhs", type=float, default=1.0, help=argparse.SUPPRESS)
    p.set_defaults(fn=_cmd_verify_moments)

    p = sub.add_parser("holder-fit", help="increment-moment scaling fits")
    common(p)
    p.set_defaults(fn=_cmd_holder_fit)

    p = sub.add_parser("uniqueness-probe", help="shared-noise mollification-level probe")
    common(p)
    p.set_defaults(fn=_cmd_uniqueness)
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, HorizonError, InvalidArgumentError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
