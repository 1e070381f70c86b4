"""Command-line front end emitting machine-readable survival curves,
survival-time sweeps, Bloch-sphere point clouds, ensemble distances and
the upsilon-grid search report.

All times and rates are in units where gamma = 1 unless --gamma is
given.  Output is CSV ('.' decimal, '\\n' line ends, '#'-prefixed config
echo before the header row) or JSON (validating against the schemas
shipped in rfunravel/schemas/).  Exit codes: 0 success, 2 usage error,
3 numerical-convergence failure.  UNRAVEL_THREADS overrides the worker
count for sweeps.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .adaptive import mru_ensemble
from .bloch import AtomParams, purity, steady_state
from .diffusive import SseConfig, default_workers, mrcmu_search, simulate_cmu
from .direct import build_direct_grid, direct_moments, sample_direct_ensemble
from .errors import ConvergenceError, DegenerateStateError
from .metrics import distance_to_mru
from .survival import EnsembleMoments, ensemble_survival, survival_time


class UsageError(Exception):
    pass


def _parse_scheme(text: str):
    if text in ("direct", "mru"):
        return text, None
    if text.startswith("cmu:"):
        try:
            ups = complex(text[4:])
        except ValueError as exc:
            raise UsageError(f"cannot parse upsilon in scheme {text!r}") from exc
        if abs(ups) > 1.0 + 1e-12:
            raise UsageError(f"|upsilon| must be <= 1, got {abs(ups)}")
        return "cmu", ups
    raise UsageError(f"unknown scheme {text!r} (expected direct, mru or cmu:UPSILON)")


def _parse_float_list(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse list {text!r}") from exc


def _sse_config(args, seed_offset: int = 0) -> SseConfig:
    return SseConfig(
        dt=args.dt,
        burn_in=args.burn_in,
        duration=args.duration,
        seed=args.seed + seed_offset,
    )


def _scheme_moments(p: AtomParams, scheme: str, ups, args, seed_offset: int = 0):
    if scheme == "mru":
        return EnsembleMoments(0.0, 0.0)
    if scheme == "direct":
        return direct_moments(p, build_direct_grid(p))
    return simulate_cmu(p, ups, _sse_config(args, seed_offset)).moments


def _write_table(args, config: dict, columns, rows):
    rows = [
        [x.item() if isinstance(x, np.generic) else x for x in row] for row in rows
    ]
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        if args.format == "json":
            json.dump({"config": config, "columns": list(columns), "rows": rows}, out, indent=2)
            out.write("\n")
        else:
            for key, val in config.items():
                out.write(f"# {key} = {val}\n")
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _base_config(args, command: str) -> dict:
    cfg = {"command": command, "gamma": args.gamma, "units": "times in 1/gamma, rates in gamma"}
    for key in ("omega", "scheme", "seed", "t_max", "n_points", "n", "duration", "burn_in", "dt"):
        if hasattr(args, key) and getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    return cfg


def cmd_survival(args):
    scheme, ups = _parse_scheme(args.scheme)
    p = AtomParams(args.gamma, args.omega)
    moments = _scheme_moments(p, scheme, ups, args)
    if args.t_max == 0:
        times = np.array([0.0])
    else:
        times = np.linspace(0.0, args.t_max, args.n_points)
    values = np.atleast_1d(ensemble_survival(p, moments, times))
    config = _base_config(args, "survival")
    config["equilibrium"] = purity(steady_state(p))
    _write_table(args, config, ["t", "S"], list(zip(times.tolist(), values.tolist())))


def cmd_survival_time_sweep(args):
    omegas = _parse_float_list(args.omega_list)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    parsed = [_parse_scheme(s) for s in schemes]

    def one(item):
        i, omega = item
        if omega == 0:
            return [omega] + ["degenerate"] * len(schemes) + [""]
        p = AtomParams(args.gamma, omega)
        taus = []
        for j, (scheme, ups) in enumerate(parsed):
            m = _scheme_moments(p, scheme, ups, args, seed_offset=1000 * i + j)
            taus.append(survival_time(p, m))
        return [omega] + taus + [np.pi / (3 * omega)]

    with ThreadPoolExecutor(max_workers=default_workers()) as pool:
        rows = list(pool.map(one, enumerate(omegas)))
    columns = ["omega"] + [f"tau_{s}" for s in schemes] + ["tau_pi_over_3omega"]
    _write_table(args, _base_config(args, "survival-time-sweep"), columns, rows)


def cmd_bloch_cloud(args):
    scheme, ups = _parse_scheme(args.scheme)
    p = AtomParams(args.gamma, args.omega)
    if scheme == "mru":
        ensemble = mru_ensemble(p)
    elif scheme == "direct":
        ensemble = sample_direct_ensemble(p, args.n, args.seed)
    else:
        stats = simulate_cmu(p, ups, _sse_config(args))
        ensemble = stats.sampled_ensemble
        if len(ensemble) > args.n:
            idx = np.linspace(0, len(ensemble) - 1, args.n).astype(int)
            from .survival import Ensemble

            ensemble = Ensemble(
                ensemble.states[idx], np.full(len(idx), 1.0 / len(idx))
            )
    bloch = ensemble.bloch()
    rows = [
        [b[0], b[1], b[2], w] for b, w in zip(bloch.tolist(), ensemble.weights.tolist())
    ]
    _write_table(args, _base_config(args, "bloch-cloud"), ["u", "v", "w", "weight"], rows)


def cmd_distance_sweep(args):
    omegas = _parse_float_list(args.omega_list)
    upsilons = (
        [complex(x) for x in args.upsilon_list.split(",") if x.strip()]
        if args.upsilon_list
        else []
    )
    for ups in upsilons:
        if abs(ups) > 1.0 + 1e-12:
            raise UsageError(f"|upsilon| must be <= 1, got {abs(ups)}")

    def one(item):
        i, omega = item
        p = AtomParams(args.gamma, omega)
        rows = []
        if not args.no_direct:
            # the direct-detection ensemble lies on the u = 0 great circle
            rows.append([omega, "direct", "", 1.0, 0.0])
        for j, ups in enumerate(upsilons):
            stats = simulate_cmu(p, ups, _sse_config(args, seed_offset=1000 * i + j))
            d = distance_to_mru(p, min(stats.mean_abs_u, _u0(p)))
            err = stats.mean_abs_u_err / _u0(p)
            rows.append([omega, "cmu", str(ups), d, err])
        return rows

    with ThreadPoolExecutor(max_workers=default_workers()) as pool:
        nested = list(pool.map(one, enumerate(omegas)))
    rows = [row for group in nested for row in group]
    _write_table(
        args,
        _base_config(args, "distance-sweep"),
        ["omega", "scheme", "upsilon", "distance", "stat_error"],
        rows,
    )


def _u0(p: AtomParams) -> float:
    b = steady_state(p)
    return float(np.sqrt(1.0 - b[1] ** 2 - b[2] ** 2))


def cmd_mrcmu_search(args):
    p = AtomParams(args.gamma, args.omega)
    result = mrcmu_search(
        p, _sse_config(args), n_radii=args.n_radii, n_phases=args.n_phases
    )

    def cell(c):
        return {
            "upsilon_re": c.upsilon.real,
            "upsilon_im": c.upsilon.imag,
            "tau": c.tau,
            "tau_err": c.tau_err,
            "v_var": c.v_var,
            "w_var": c.w_var,
            "refined": c.refined,
        }

    config = _base_config(args, "mrcmu-search")
    config.update({"n_radii": args.n_radii, "n_phases": args.n_phases})
    if args.format == "csv":
        rows = [
            [c.upsilon.real, c.upsilon.imag, c.tau, c.tau_err, c.v_var, c.w_var, int(c.refined)]
            for c in result.cells
        ]
        config["best_upsilon"] = str(result.best.upsilon)
        config["separated"] = result.separated
        _write_table(
            args,
            config,
            ["upsilon_re", "upsilon_im", "tau", "tau_err", "v_var", "w_var", "refined"],
            rows,
        )
        return
    report = {
        "config": config,
        "best": cell(result.best),
        "real_axis_min": cell(result.real_axis_min),
        "cells": [cell(c) for c in result.cells],
        "separated": result.separated,
        "resolution": result.resolution,
    }
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w")
    try:
        json.dump(report, out, indent=2)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _add_common(sp, omega=True):
    sp.add_argument("--gamma", type=float, default=1.0)
    if omega:
        sp.add_argument("--omega", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--duration", type=float, default=None, help="SSE averaging time")
    sp.add_argument("--burn-in", type=float, default=None)
    sp.add_argument("--dt", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfunravel",
        description="Survival analysis of resonance-fluorescence unravelings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("survival", help="ensemble survival curve S(t)")
    _add_common(sp)
    sp.add_argument("--scheme", required=True, help="direct, mru or cmu:UPSILON")
    sp.add_argument("--t-max", type=float, required=True)
    sp.add_argument("--n-points", type=int, default=200)
    sp.set_defaults(func=cmd_survival)

    sp = sub.add_parser("survival-time-sweep", help="survival time vs omega")
    _add_common(sp, omega=False)
    sp.add_argument("--omega-list", required=True, help="comma-separated omegas")
    sp.add_argument("--schemes", default="direct,mru,cmu:1")
    sp.set_defaults(func=cmd_survival_time_sweep)

    sp = sub.add_parser("bloch-cloud", help="stationary-ensemble point cloud")
    _add_common(sp)
    sp.add_argument("--scheme", required=True)
    sp.add_argument("--n", type=int, default=1000)
    sp.set_defaults(func=cmd_bloch_cloud)

    sp = sub.add_parser("distance-sweep", help="distance to the robust ensemble")
    _add_common(sp, omega=False)
    sp.add_argument("--omega-list", required=True)
    sp.add_argument("--upsilon-list", default="-1,0,1")
    sp.add_argument("--no-direct", action="store_true", help="omit the direct-detection row")
    sp.set_defaults(func=cmd_distance_sweep)

    sp = sub.add_parser("mrcmu-search", help="search the upsilon disc for the most robust unraveling")
    _add_common(sp)
    sp.add_argument("--n-radii", type=int, default=9)
    sp.add_argument("--n-phases", type=int, default=16)
    sp.set_defaults(func=cmd_mrcmu_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UsageError, DegenerateStateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
