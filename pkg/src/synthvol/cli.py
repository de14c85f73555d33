"""Command-line front end: simulate, fit, forecast, mc-grid, multiverse.

Exit codes: 0 success, 2 validation error, 3 numerical failure.  All
commands are deterministic given their config; seeds default to 0 and can
be overridden with --seed.  Machine-readable output uses repr-precision
floats so files parse back losslessly.  Report-producing commands render
a matplotlib figure next to the delimited output unless --no-plot is set.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from .errors import (
    BlockCountMismatch,
    DimensionMismatch,
    DomainError,
    InsufficientHistory,
    InvalidShockWindow,
    NonpositiveGroundTruth,
    NonpositiveInput,
    NonstationaryParams,
    SynthvolError,
    ValidationError,
)
from .estimation import FitConfig, fit_garch, fit_shock_fixed_effect
from .garch import simulate_path
from .montecarlo import grid_rows, run_grid, write_grid_csv
from .multiverse import MultiverseConfig, multiverse_rows, run_multiverse, write_multiverse_csv
from .pipeline import run_forecast_pipeline

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_machine(payload: dict, path: Path, fmt: str) -> None:
    payload = _jsonable(payload)
    if fmt == "json":
        with open(path, "w", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return

    lines = ["key,value"]

    def walk(prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(value, list):
            for i, v in enumerate(value):
                walk(f"{prefix}[{i}]", v)
        else:
            lines.append(f"{prefix},{value!r}" if isinstance(value, float) else f"{prefix},{value}")

    walk("", payload)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _figure_path(out: Path) -> Path:
    return out.with_suffix(".png")


def cmd_simulate(args) -> int:
    raw = cfg.load_yaml(args.config)
    sim = cfg.parse_simulate_config(raw)
    seed = args.seed if args.seed is not None else sim.seed
    path = simulate_path(sim.params, sim.shock, sim.length, sim.covariate_model, seed=seed)
    out = Path(args.out)
    lines = ["t,return,sigma2,omega_star"]
    for t in range(len(path)):
        lines.append(
            f"{t},{float(path.returns[t])!r},{float(path.sigma2[t])!r},"
            f"{float(path.omega_star_path[t])!r}"
        )
    with open(out, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"seed: {seed}")
    print(f"wrote {len(path)} observations to {out}")
    if not args.no_plot:
        from . import plotting

        t_star = sim.shock.t_star if sim.shock is not None else None
        print(f"figure: {plotting.plot_simulated_path(path, t_star, _figure_path(out))}")
    return EXIT_OK


def cmd_fit(args) -> int:
    returns, _ = cfg.read_returns_csv(args.returns, column=args.column)
    orders = _parse_orders(args.orders)
    fit_config = FitConfig(compute_stderr=True)
    if args.t_star is not None:
        result = fit_shock_fixed_effect(
            returns,
            t_star=args.t_star,
            len_vol=args.len_vol,
            orders=orders,
            config=fit_config,
        )
    else:
        result = fit_garch(returns, orders=orders, config=fit_config)

    print(f"observations: {returns.size}")
    print(f"mean: {_fmt(result.mean)}")
    print(f"omega: {_fmt(result.params.omega)}")
    for i, a in enumerate(result.params.alpha, 1):
        print(f"alpha[{i}]: {_fmt(a)}")
    for i, b in enumerate(result.params.beta, 1):
        print(f"beta[{i}]: {_fmt(b)}")
    if result.omega_star_hat is not None:
        print(f"omega_star: {_fmt(result.omega_star_hat)}")
    print(f"loglik: {_fmt(result.loglik)}")
    print(f"converged: {result.converged}")
    if not result.converged:
        print("warning: optimizer did not report convergence", file=sys.stderr)
    if args.out:
        payload = {
            "observations": int(returns.size),
            "mean": result.mean,
            "omega": result.params.omega,
            "alpha": result.params.alpha,
            "beta": result.params.beta,
            "gamma": result.params.gamma,
            "omega_star": result.omega_star_hat,
            "loglik": result.loglik,
            "converged": result.converged,
            "iterations": result.iterations,
            "stderr_proxy": result.stderr_proxy,
        }
        _write_machine(payload, Path(args.out), args.format)
        print(f"wrote {args.out}")
    return EXIT_OK


def _report_payload(report) -> dict:
    return {
        "seed": report.seed,
        "unadjusted": report.unadjusted,
        "adjusted": report.adjusted,
        "mean_adjusted": report.mean_adjusted,
        "omega_star": report.omega_star,
        "mean_omega_star": report.mean_omega_star,
        "donors": {
            name: {"omega_star_hat": effect, "weight": weight}
            for name, effect, weight in zip(
                report.donor_names, report.donor_effects, report.weights.weights
            )
        },
        "weights": report.weights.weights,
        "weight_objective": report.weights.objective,
        "active_support": list(report.weights.active_support),
        "singular_value_shares": report.singular_shares,
        "ols_contrast_effect": report.ols_contrast.target_effect,
        "target_fit": {
            "omega": report.target_fit.params.omega,
            "alpha": report.target_fit.params.alpha,
            "beta": report.target_fit.params.beta,
            "mean": report.target_fit.mean,
            "loglik": report.target_fit.loglik,
            "converged": report.target_fit.converged,
        },
        "clamped": report.clamped,
        "ground_truth": report.ground_truth,
        "losses": (
            {
                which: {"mse": lt.mse, "ape": lt.ape, "ql": lt.ql}
                for which, lt in report.losses.items()
            }
            if report.losses is not None
            else None
        ),
    }


def _print_report(report) -> None:
    print(f"unadjusted forecast: {_fmt(report.unadjusted[0])}")
    print(f"adjusted forecast:   {_fmt(report.adjusted[0])}  (omega_star = {_fmt(report.omega_star)})")
    print(
        f"mean-adjusted:       {_fmt(report.mean_adjusted[0])}  "
        f"(mean omega_star = {_fmt(report.mean_omega_star)})"
    )
    print("donors:")
    for name, effect, weight in zip(
        report.donor_names, report.donor_effects, report.weights.weights
    ):
        print(f"  {name}: omega_star_hat = {_fmt(effect)}, weight = {_fmt(weight)}")
    shares = ", ".join(f"{100 * s:.0f}%" for s in report.singular_shares)
    print(f"profile singular-value shares: {shares}")
    if report.clamped:
        print("note: an adjusted forecast was clamped at the variance floor")
    if report.losses is not None:
        print(f"ground truth: {_fmt(report.ground_truth)}")
        for which, lt in report.losses.items():
            print(
                f"  {which}: QL = {_fmt(lt.ql)}, MSE = {_fmt(lt.mse)}, APE = {_fmt(lt.ape)}"
            )


def cmd_forecast(args) -> int:
    raw = cfg.load_yaml(args.config)
    bundle = cfg.parse_bundle_config(raw, base_dir=Path(args.config).parent)
    seed = args.seed if args.seed is not None else bundle.seed
    report = run_forecast_pipeline(
        bundle.target,
        bundle.donors,
        bundle.covariate_names,
        horizon=bundle.horizon,
        adjustment_length=bundle.adjustment_length,
        ground_truth=bundle.ground_truth,
        estimation_window=bundle.estimation_window,
        seed=seed,
    )
    _print_report(report)
    if args.out:
        out = Path(args.out)
        _write_machine(_report_payload(report), out, args.format)
        print(f"wrote {out}")
        if not args.no_plot:
            from . import plotting

            print(f"figure: {plotting.plot_forecast_report(report, _figure_path(out))}")
    return EXIT_OK


def cmd_mc_grid(args) -> int:
    raw = cfg.load_yaml(args.config)
    grid_config = cfg.parse_grid_config(raw)
    if args.seed is not None:
        from dataclasses import replace

        grid_config = replace(grid_config, seed=args.seed)
    result = run_grid(grid_config)
    out = Path(args.out)
    write_grid_csv(result, out)
    print(f"seed: {grid_config.seed}")
    for row in grid_rows(result):
        print(
            f"{grid_config.axis1[0]}={row['axis1']:g} {grid_config.axis2[0]}={row['axis2']:g}: "
            f"win_fraction={row['win_fraction']:.3f} "
            f"(QL adj {_fmt(row['mean_ql_adj'])} vs unadj {_fmt(row['mean_ql_unadj'])}, "
            f"{row['failures']} failure(s))"
        )
    print(f"wrote {out}")
    if not args.no_plot:
        from . import plotting

        print(f"figure: {plotting.plot_win_fraction_heatmap(result, _figure_path(out))}")
    return EXIT_OK


def cmd_multiverse(args) -> int:
    raw = cfg.load_yaml(args.config)
    bundle = cfg.parse_bundle_config(raw, base_dir=Path(args.config).parent)
    if bundle.ground_truth is None:
        raise ValidationError("multiverse requires 'ground_truth' in the bundle config")
    mv_config = MultiverseConfig(
        donors=bundle.donors,
        covariates=bundle.covariate_names,
        target=bundle.target,
        ground_truth=bundle.ground_truth,
        loss=bundle.loss,
        adjustment_length=bundle.adjustment_length,
        estimation_window=bundle.estimation_window,
    )
    result = run_multiverse(mv_config)
    out = Path(args.out)
    if args.format == "json":
        payload = {
            "unadjusted_forecast": result.unadjusted_forecast,
            "rows": [
                {
                    "loss": row.loss,
                    "omitted_covariate": row.omitted_covariate,
                    "omitted_donor": row.omitted_donor,
                    "adjusted_forecast": row.adjusted_forecast,
                    "weights": row.weights,
                    "omega_star_hat": row.omega_star_hat,
                    "kind": row.kind,
                }
                for row in result.rows
            ],
            "infeasible": [list(item) for item in result.infeasible],
        }
        _write_machine(payload, out, "json")
    else:
        write_multiverse_csv(result, out)
    n_config = sum(1 for r in result.rows if r.kind == "config")
    print(f"evaluated {n_config} configurations (+3 summary rows)")
    best = result.rows[0]
    print(
        f"best: loss={_fmt(best.loss)} "
        f"(omit covariate {best.omitted_covariate or 'None'}, omit donor {best.omitted_donor or 'None'})"
    )
    if result.infeasible:
        print(f"{len(result.infeasible)} infeasible configuration(s)", file=sys.stderr)
    print(f"wrote {out}")
    if not args.no_plot:
        from . import plotting

        print(f"figure: {plotting.plot_multiverse_losses(result, _figure_path(out))}")
    return EXIT_OK


def _parse_orders(text: str) -> tuple[int, int]:
    try:
        m, s = (int(part) for part in text.split(","))
    except ValueError:
        raise ValidationError(f"--orders must look like '1,1', got {text!r}")
    return m, s


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthvol",
        description="Similarity-weighted GARCH volatility forecasting for news shocks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", required=out_required, help="output file path")
        p.add_argument(
            "--format", choices=("csv", "json"), default="json", help="machine output format"
        )
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p = sub.add_parser("simulate", help="simulate one shocked GARCH path to CSV")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a GARCH (optionally with a shock dummy) to a CSV")
    p.add_argument("returns", help="CSV with a return or price column")
    p.add_argument("--column", default=None, help="name of the value column")
    p.add_argument("--orders", default="1,1", help="GARCH orders m,s")
    p.add_argument("--t-star", type=int, default=None, help="pre-shock observation count")
    p.add_argument("--len-vol", type=int, default=1, help="volatility shock length")
    common(p, out_required=False)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="similarity-adjusted forecast for a study bundle")
    p.add_argument("--config", required=True)
    common(p, out_required=False)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("mc-grid", help="Monte Carlo win-fraction grid")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_mc_grid)

    p = sub.add_parser("multiverse", help="leave-one-out sensitivity table")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_multiverse)
    return parser


_VALIDATION_ERRORS = (
    ValidationError,
    InvalidShockWindow,
    InsufficientHistory,
    DimensionMismatch,
    BlockCountMismatch,
    NonpositiveInput,
    NonpositiveGroundTruth,
    DomainError,
    NonstationaryParams,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SynthvolError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
