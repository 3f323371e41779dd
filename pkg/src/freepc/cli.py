"""Command-line front end.

Subcommands: check-pe, collect, estimate-frf, run, montecarlo, dump-ocp.
Every command is reproducible from (config file, seed) alone.  Exit codes:
0 success (or PE verdict true), 1 domain verdict false / solver infeasible /
singular data, 2 usage or parse errors.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .config import RunConfig
from .exceptions import InfeasibleError, ParseError, SingularityError
from .freqdomain import (freq_data_equations, frf_to_freq_data,
                         hankel_data_equations, is_pe_freq)
from .frf import ClosedLoopExperiment, estimate_frf, run_experiment
from .ocp import build_ocp, ocp_to_dict, solution_to_dict, solve_ocp
from .signals import SpectrumSamples, TimeSeries, is_pe_time
from .simloop import mc_table_to_csv, monte_carlo, run_mpc_benchmark, run_rhc, warmup_window


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "out_dir", None) is not None:
        cfg = cfg.replace(out_dir=args.out_dir)
    if getattr(args, "periods", None) is not None:
        cfg = cfg.replace(excitation=dataclasses.replace(
            cfg.excitation, periods=args.periods))
    return cfg


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _collect(cfg: RunConfig, exp_seed):
    exp = ClosedLoopExperiment(cfg.plant, cfg.controller, cfg.excitation,
                               cfg.noise_std, exp_seed, cfg.discard_periods)
    return run_experiment(exp)


def _data_equations(cfg: RunConfig, scheme: str, exp_seed):
    d, u, y = _collect(cfg, exp_seed)
    if scheme == "deepc":
        return hankel_data_equations(u, y, cfg.ocp.depth)
    est = estimate_frf(d, u, y, cfg.excitation.period_length,
                       cfg.excitation.frequencies)
    data = frf_to_freq_data(est.frequencies, est.g_hat)
    return freq_data_equations(data, cfg.ocp.depth)


def cmd_check_pe(args) -> int:
    if args.domain == "time":
        series = TimeSeries.from_csv(args.data)
        res = is_pe_time(series, args.depth, tol=args.tol)
    else:
        spectrum = SpectrumSamples.from_csv(args.data)
        res = is_pe_freq(spectrum, args.depth, tol=args.tol)
    verdict = "PE" if res.pe else "not PE"
    print(f"rank {res.rank}  required {res.required}  -> {verdict} of order {args.depth}")
    return 0 if res.pe else 1


def cmd_collect(args) -> int:
    cfg = _load_config(args)
    exp_seed, _ = np.random.SeedSequence(cfg.seed).spawn(2)
    d, u, y = _collect(cfg, exp_seed)
    for name, series in (("d", d), ("u", u), ("y", y)):
        path = _out_path(cfg, f"{name}.csv")
        series.to_csv(path, names=[name])
        print(f"wrote {path} ({len(series)} rows)")
    return 0


def cmd_estimate_frf(args) -> int:
    cfg = _load_config(args)
    d = TimeSeries.from_csv(args.d_csv)
    u = TimeSeries.from_csv(args.u_csv)
    y = TimeSeries.from_csv(args.y_csv)
    est = estimate_frf(d, u, y, cfg.excitation.period_length,
                       cfg.excitation.frequencies)
    path = _out_path(cfg, "frf.csv")
    est.to_csv(path)
    print(f"wrote {path} ({est.M} frequencies, {est.periods_used} periods)")
    for m in range(est.M):
        print(f"  w={est.frequencies[m]:.4f}  |G|={abs(est.g_hat[m]):.6f}  "
              f"var={est.variance[m]:.3e}  r99={est.confidence_radius_99[m]:.3e}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    exp_seed, rhc_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    if args.scheme == "mpc":
        rhc = cfg.rhc_config(None, rhc_seed)
        result = run_mpc_benchmark(cfg.plant, rhc)
    else:
        eqs = _data_equations(cfg, args.scheme, exp_seed)
        result = run_rhc(cfg.plant, cfg.rhc_config(eqs, rhc_seed))
    path = _out_path(cfg, f"trajectory_{args.scheme}.csv")
    result.to_csv(path)
    print(f"wrote {path}")
    print(f"cost J = {result.cost_J:.6f}")
    return 0


def cmd_montecarlo(args) -> int:
    cfg = _load_config(args)
    if cfg.mc_runs < 2:
        raise ValueError("monte_carlo.runs must be at least 2")
    rows = monte_carlo(cfg.plant, cfg.campaign(), cfg.mc_periods_list,
                       cfg.mc_runs, cfg.seed, workers=args.workers)
    path = _out_path(cfg, "montecarlo.csv")
    mc_table_to_csv(rows, path)
    print(f"wrote {path}")
    print(f"{'P':>5} {'mean_J':>12} {'var_J':>12} {'failures':>9}")
    for r in rows:
        print(f"{r.periods:>5} {r.mean_J:>12.6f} {r.var_J:>12.6e} {r.failures:>9}")
    return 0


def cmd_dump_ocp(args) -> int:
    cfg = _load_config(args)
    exp_seed, rhc_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    eqs = _data_equations(cfg, args.scheme, exp_seed)
    rng = np.random.default_rng(rhc_seed)
    win_u, win_y, _ = warmup_window(cfg.plant, cfg.warmup, cfg.ocp.T_bar,
                                    cfg.rhc_noise_std, rng)
    prob = build_ocp(eqs, np.concatenate(win_u), np.concatenate(win_y), cfg.ocp)
    sol = solve_ocp(prob)
    path = _out_path(cfg, "ocp.json")
    with open(path, "w") as fh:
        json.dump({"problem": ocp_to_dict(prob),
                   "solution": solution_to_dict(sol)}, fh, indent=1)
        fh.write("\n")
    print(f"wrote {path} (status {sol.solver_status.value})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freepc",
        description="Data-driven predictive control from time- or "
                    "frequency-domain data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-pe", help="persistence-of-excitation rank test")
    p.add_argument("data", help="CSV file (time series or spectrum)")
    p.add_argument("--depth", type=int, required=True, metavar="L",
                   help="order L of the PE test")
    p.add_argument("--domain", choices=["time", "freq"], default="time")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check_pe)

    def common(p, periods=False):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument("--out-dir", help="override config output directory")
        if periods:
            p.add_argument("--periods", type=int,
                           help="override excitation period count")

    p = sub.add_parser("collect", help="run the closed-loop experiment, write d/u/y CSVs")
    common(p, periods=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("estimate-frf", help="estimate the FRF from recorded d/u/y")
    p.add_argument("d_csv"); p.add_argument("u_csv"); p.add_argument("y_csv")
    common(p)
    p.set_defaults(func=cmd_estimate_frf)

    p = sub.add_parser("run", help="closed-loop receding-horizon run")
    common(p, periods=True)
    p.add_argument("--scheme", choices=["deepc", "freepc", "mpc"],
                   default="freepc")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("montecarlo", help="Monte Carlo cost table over period counts")
    common(p)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("dump-ocp", help="dump the first-step OCP and its solution as JSON")
    common(p, periods=True)
    p.add_argument("--scheme", choices=["deepc", "freepc"], default="freepc")
    p.set_defaults(func=cmd_dump_ocp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleError, SingularityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
