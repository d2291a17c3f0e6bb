"""
Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical non-convergence
(or an estimate on the box boundary, or a failed self-test criterion),
3 exact-filter grid escape.  ``GCC_THREADS`` caps the worker processes.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .exact_bench import (AGGREGATED_COLUMNS, PER_DESIGN_COLUMNS, GridEscapeError, GridSpec,
                          design_sweep)
from .io import ParseError, read_series, write_csv, write_json
from .levy import LevyParams, increment_fisher
from .mle import ConvergenceError, DegenerateDataError, ParamBox, fit, mc_study
from .montecarlo import worker_count
from .ssm import (FAMILIES, SsmParams, decompose, generic_filter, normalise_family, qmle,
                  qmle_mc_study, simulate_ssm, smoother)
from .voigt import OptimizerError, QuadratureError, VoigtParams, fisher_information

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_GRID = 0, 1, 2, 3

FILTER_COLUMNS = ("t", "y", "x_pred", "h_pred", "e", "psi", "x_filt", "h_filt", "x_smooth",
                  "h_smooth", "e_state", "e_gauss", "e_cauchy", "ll")
SMOOTH_COLUMNS = ("t", "y", "x_smooth", "h_smooth", "gain")
MC_COLUMNS = ("param", "n", "mean", "std", "astd", "alpha_l", "alpha_r")
LEVY_COLUMNS = ("delta", "i_sigma_sigma", "i_sigma_theta", "i_theta_theta", "astd_sigma",
                "astd_theta")
FISHER_COLUMNS = ("row", "mu", "sigma", "gamma")


class UsageError(Exception):
    """Bad combination of options detected after parsing."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def _assignments(text: str) -> dict:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected name=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"{key.strip()}: not a number: {val!r}") from exc
    return out


def _ssm_params(family: str, values: dict) -> SsmParams:
    fam = normalise_family(family)
    allowed = {"mu", "phi", "tau", *FAMILIES[fam]}
    unknown = set(values) - allowed
    if unknown:
        raise UsageError(f"parameters {sorted(unknown)} do not belong to family {fam!r}; "
                         f"expected {sorted(allowed)}")
    missing = allowed - set(values)
    if missing:
        raise UsageError(f"missing parameters {sorted(missing)} for family {fam!r}")
    return SsmParams(family=fam, **values)


def _emit_json(target, payload, config):
    write_json(None if target is None else target, payload, config)


def _config(args) -> dict:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
           if k not in ("handler",)}
    cfg["workers"] = worker_count(getattr(args, "workers", None))
    return cfg


# commands -------------------------------------------------------------------

def cmd_fit_voigt(args) -> int:
    series = read_series(args.input, args.column)
    box = ParamBox.default_for(series.y)
    if args.box:
        fields = {"mu_max", "sigma_min", "sigma_max", "gamma_min", "gamma_max"}
        unknown = set(args.box) - fields
        if unknown:
            raise UsageError(f"unknown box fields {sorted(unknown)}; expected {sorted(fields)}")
        box = replace(box, **args.box)
    code = EXIT_OK
    try:
        res = fit(series.y, box)
    except ConvergenceError as exc:
        if exc.result is None:
            raise
        res, code = exc.result, EXIT_NUMERIC
        print(f"warning: {exc}", file=sys.stderr)
    if res.boundary:
        code = EXIT_NUMERIC
        print(f"warning: estimate on the box boundary for {', '.join(res.boundary)}",
              file=sys.stderr)
    names = ("mu", "sigma", "gamma")
    theta = res.theta_hat.as_array()
    payload = {
        "theta_hat": dict(zip(names, map(float, theta))),
        "std_errors": dict(zip(names, map(float, res.std_errors))),
        "loglik": res.loglik,
        "converged": res.converged,
        "iterations": res.iterations,
        "gradient_norm": res.gradient_norm,
        "n": res.n,
        "boundary": list(res.boundary),
        "box": {"mu_max": box.mu_max, "sigma": [box.sigma_min, box.sigma_max],
                "gamma": [box.gamma_min, box.gamma_max]},
    }
    _emit_json(args.json, payload, _config(args))
    if args.se_csv:
        write_csv(args.se_csv, [{"param": n, "estimate": float(theta[i]),
                                 "std_error": float(res.std_errors[i])}
                                for i, n in enumerate(names)],
                  ("param", "estimate", "std_error"))
    return code


def _filter_rows(y, params: SsmParams) -> tuple[list[dict], object]:
    res = generic_filter(y, params)
    sm = smoother(res)
    if params.family in ("gcc", "cauchy"):
        dec = decompose(res, params)
    elif params.family == "gaussian":
        e_state = res.h_pred * res.psi
        dec = (e_state, res.e - e_state, np.zeros_like(res.e))
    else:
        nan = np.full(len(res), np.nan)
        dec = (nan, nan, nan)
    rows = []
    for t in range(len(res)):
        rows.append({"t": t + 1, "y": float(y[t]), "x_pred": res.x_pred[t],
                     "h_pred": res.h_pred[t], "e": res.e[t], "psi": res.psi[t],
                     "x_filt": res.x_filt[t], "h_filt": res.h_filt[t],
                     "x_smooth": sm.x_smooth[t], "h_smooth": sm.h_smooth[t],
                     "e_state": dec[0][t], "e_gauss": dec[1][t], "e_cauchy": dec[2][t],
                     "ll": res.ll[t]})
    return rows, res


def _family_target(out, family: str, multi: bool):
    if out is None or str(out) == "-" or not multi:
        return out
    p = Path(out)
    return p.with_name(f"{p.stem}_{family}{p.suffix or '.csv'}")


def _families(text: str) -> list[str]:
    if text.strip().lower() == "all":
        return list(FAMILIES)
    return [normalise_family(f) for f in text.split(",") if f.strip()]


def cmd_filter(args, smooth_only: bool = False) -> int:
    series = read_series(args.input, args.column)
    families = _families(args.family)
    multi = len(families) > 1
    if args.params is not None and (args.fit or multi):
        raise UsageError("--params takes a single family and excludes --fit")
    if args.params is None and not args.fit:
        raise UsageError("give either --params or --fit")
    if args.params is not None and families[0] == "gcc" and args.params.get("gamma", 1.0) == 0:
        raise UsageError("family gcc needs gamma > 0; use --family gaussian for a zero Cauchy scale")
    code = EXIT_OK
    blocks = []
    for fam in families:
        if args.fit:
            est = qmle(series.y, fam)
            params = est.params_hat
            block = est.as_dict()
            if not est.converged or est.boundary:
                code = EXIT_NUMERIC
                print(f"warning: {fam}: converged={est.converged}, "
                      f"boundary={list(est.boundary)}", file=sys.stderr)
        else:
            params = _ssm_params(fam, args.params)
            block = None
        rows, res = _filter_rows(series.y, params)
        if block is None:
            block = {"family": fam, "params": {n: getattr(params, n) for n in params.names},
                     "criterion": res.loglik, "closed_form": None, "T": len(res)}
        block["floored_steps"] = int(np.sum(res.floored))
        blocks.append(block)
        target = _family_target(args.out, fam, multi)
        if smooth_only:
            sm = smoother(res)
            rows = [{"t": r["t"], "y": r["y"], "x_smooth": r["x_smooth"],
                     "h_smooth": r["h_smooth"], "gain": sm.gain[i]} for i, r in enumerate(rows)]
            write_csv(target, rows, SMOOTH_COLUMNS)
        elif target is not None or not args.summary:
            write_csv(target, rows, FILTER_COLUMNS)
    if args.summary:
        cfg = _config(args)
        cfg["params"] = args.params
        _emit_json(args.summary, {"families": blocks, "dates": series.dates is not None}, cfg)
    return code


def cmd_smooth(args) -> int:
    return cmd_filter(args, smooth_only=True)


def cmd_simulate(args) -> int:
    params = _ssm_params(args.family, args.params)
    path = simulate_ssm(params, args.T, args.seed, stream=args.stream)
    keys = sorted(path.components)
    rows = [{"t": t + 1, "y": path.y[t], "x": path.x[t], **{k: path.components[k][t] for k in keys}}
            for t in range(args.T)]
    write_csv(args.out, rows, ("t", "y", "x", *keys))
    return EXIT_OK


def cmd_mc(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    if args.mode == "mle":
        values = args.params or {"mu": 1.0, "sigma": 1.0, "gamma": 0.1}
        try:
            theta = VoigtParams(values["mu"], values["sigma"], values["gamma"])
        except KeyError as exc:
            raise UsageError(f"mle design needs mu, sigma and gamma; missing {exc}") from exc
        summary = mc_study(theta, args.n, args.reps, seed=args.seed, workers=args.workers)
    else:
        if args.params is None:
            raise UsageError("qmle mode needs --params")
        params = _ssm_params(args.family, args.params)
        summary = qmle_mc_study(params, args.n, args.reps, seed=args.seed, workers=args.workers,
                                astd_T=args.astd_T)
    write_csv(args.out, summary.rows(), MC_COLUMNS)
    if summary.n_failed:
        print(f"{summary.n_failed} of {summary.reps} replications failed and were excluded",
              file=sys.stderr)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if args.selftest:
        return _selftest(args)
    for phi in args.phi:
        if not abs(phi) < 1:
            raise UsageError(f"phi must satisfy |phi| < 1, got {phi}")
    for lam in args.lambdas:
        if lam < 0:
            raise UsageError(f"lambda must be non-negative, got {lam}")
    spec = GridSpec(n_nodes=args.grid_nodes, half_width=args.grid_half_width,
                    max_expansions=args.max_expansions)
    sweep = design_sweep(args.lambdas, args.phi, args.tau_ratio, T=args.T, seed=args.seed,
                         n_paths=args.paths, grid_spec=spec, workers=args.workers)
    write_csv(args.out, sweep.aggregated, AGGREGATED_COLUMNS)
    if args.designs_out:
        write_csv(args.designs_out, sweep.per_design, PER_DESIGN_COLUMNS)
    if sweep.failures:
        for f in sweep.failures:
            print(f"design lambda={f['lambda']} phi={f['phi']} tau_ratio={f['tau_ratio']} "
                  f"failed: {f['error']}", file=sys.stderr)
        if any("GridEscapeError" in f["error"] for f in sweep.failures):
            return EXIT_GRID
        return EXIT_NUMERIC
    return EXIT_OK


def _selftest(args) -> int:
    from .acceptance import run_all

    def report(line):
        print(line, flush=True)

    results = run_all(only=args.only, report=report)
    if args.json:
        payload = {"criteria": [{"number": r.number, "title": r.title, "passed": r.passed,
                                 "detail": r.detail, "seconds": r.seconds,
                                 "metrics": r.metrics} for r in results]}
        _emit_json(args.json, payload, _config(args))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed", flush=True)
    return EXIT_OK if not failed else EXIT_NUMERIC


def cmd_fisher(args) -> int:
    if args.lambdas:
        rows = []
        for lam in args.lambdas:
            info = fisher_information((0.0, 1.0, lam))
            rows.append({"lambda": lam, "astd_mu": info.astd[0], "astd_sigma": info.astd[1],
                         "astd_gamma": info.astd[2], "ratio": info.astd[1] / info.astd[2],
                         "equality_gap": info.equality_gap})
        write_csv(args.out, rows, ("lambda", "astd_mu", "astd_sigma", "astd_gamma", "ratio",
                                   "equality_gap"))
        return EXIT_OK
    info = fisher_information(VoigtParams(args.mu, args.sigma, args.gamma))
    payload = {"matrix": info.matrix, "neg_hessian": info.neg_hessian, "inverse": info.inverse,
               "astd": dict(zip(("mu", "sigma", "gamma"), map(float, info.astd))),
               "equality_gap": info.equality_gap, "mass": info.mass}
    if args.out:
        names = ("mu", "sigma", "gamma")
        write_csv(args.out, [{"row": n, **dict(zip(names, info.matrix[i]))}
                             for i, n in enumerate(names)], FISHER_COLUMNS)
    _emit_json(args.json, payload, _config(args))
    return EXIT_OK


def cmd_levy_info(args) -> int:
    deltas = args.delta or list(np.logspace(-3, 1, 13))
    rows = []
    for d in deltas:
        info = increment_fisher(LevyParams(args.sigma_bm, args.theta, d))
        inv = np.linalg.inv(info)
        rows.append({"delta": float(d), "i_sigma_sigma": info[0, 0], "i_sigma_theta": info[0, 1],
                     "i_theta_theta": info[1, 1], "astd_sigma": math.sqrt(inv[0, 0]),
                     "astd_theta": math.sqrt(inv[1, 1])})
    write_csv(args.out, rows, LEVY_COLUMNS)
    return EXIT_OK


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gausscauchy", description="Voigt likelihood, robust filtering and "
                     "exact-filter benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_input(p):
        p.add_argument("input", help="CSV with a y column (and optional date column); '-' for stdin")
        p.add_argument("--column", default="y", help="name of the data column (default y)")

    p = sub.add_parser("fit-voigt", help="maximum likelihood fit of V(mu, sigma, gamma)")
    add_input(p)
    p.add_argument("--json", help="result JSON path (default stdout)")
    p.add_argument("--se-csv", help="standard-error table CSV path")
    p.add_argument("--box", type=_assignments,
                   help="override parameter-box fields, e.g. sigma_min=0.01,gamma_max=10")
    p.set_defaults(handler=cmd_fit_voigt)

    for name, handler, what in (("filter", cmd_filter, "filter, smoother and decomposition"),
                                ("smooth", cmd_smooth, "smoothed states")):
        p = sub.add_parser(name, help=f"robust state-space {what}")
        add_input(p)
        p.add_argument("--family", default="gcc",
                       help="measurement family, comma list, or 'all' (default gcc)")
        p.add_argument("--params", type=_assignments,
                       help="fixed parameters, e.g. mu=0,phi=0.95,tau=0.2,sigma=0.4,gamma=0.1")
        p.add_argument("--fit", action="store_true", help="estimate by QMLE first")
        p.add_argument("--out", help="per-step CSV path (family-suffixed for several families)")
        p.add_argument("--summary", help="summary JSON path")
        p.set_defaults(handler=handler)

    p = sub.add_parser("simulate", help="simulate a state-space path")
    p.add_argument("--family", default="gcc")
    p.add_argument("--params", type=_assignments, required=True)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo study of the MLE or QMLE")
    p.add_argument("--mode", choices=("mle", "qmle"), default="mle")
    p.add_argument("--family", default="gcc", help="measurement family (qmle mode)")
    p.add_argument("--params", type=_assignments,
                   help="true parameters (mle default mu=1,sigma=1,gamma=0.1)")
    p.add_argument("--n", type=int, default=1000, help="sample size or path length")
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--astd-T", dest="astd_T", type=int, default=100_000,
                   help="long-path length for the QMLE sandwich aStd")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(handler=cmd_mc)

    p = sub.add_parser("benchmark", help="exact grid-filter benchmark of the GCC approximation")
    p.add_argument("--lambda", dest="lambdas", type=_float_list,
                   default=[0.0, 0.01, 0.05, 0.10, 0.50, 1.00])
    p.add_argument("--phi", type=_float_list, default=[0.90, 0.97, 0.99])
    p.add_argument("--tau-ratio", dest="tau_ratio", type=_float_list, default=[0.25, 0.50, 1.00])
    p.add_argument("--T", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--grid-nodes", dest="grid_nodes", type=int, default=4001)
    p.add_argument("--grid-half-width", dest="grid_half_width", type=float,
                   help="initial state-grid half-width (default from the design)")
    p.add_argument("--max-expansions", dest="max_expansions", type=int, default=3,
                   help="grid widenings allowed before a grid-escape failure")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="aggregated CSV path (default stdout)")
    p.add_argument("--designs-out", dest="designs_out", help="per-design CSV path")
    p.add_argument("--selftest", action="store_true", help="run the acceptance criteria instead")
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers for --selftest")
    p.add_argument("--json", help="self-test JSON report path")
    p.set_defaults(handler=cmd_benchmark)

    p = sub.add_parser("fisher", help="Voigt Fisher information")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--lambda", dest="lambdas", type=_float_list,
                   help="grid of gamma/sigma ratios; emits an aStd CSV instead")
    p.add_argument("--out", help="CSV path")
    p.add_argument("--json", help="JSON path (default stdout)")
    p.set_defaults(handler=cmd_fisher)

    p = sub.add_parser("levy-info", help="per-increment Fisher information of the Levy model")
    p.add_argument("--sigma-bm", dest="sigma_bm", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--delta", type=_float_list, help="interval grid (default 1e-3..10, 13 points)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(handler=cmd_levy_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except GridEscapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except (ConvergenceError, QuadratureError, OptimizerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ParseError, DegenerateDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
