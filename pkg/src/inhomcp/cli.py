"""Command-line entry point: ``inhomcp <subcommand>``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, encode_value, load_config
from .coupling import coupled_run
from .experiments import (emit_report, estimate_lambda_c, sweep, theorem1_verdict,
                          wilson_interval)
from .front_chain import (FrontChain, absorption_probability, estimate_absorption,
                          series_test)
from .model import ModelParams, ProfileError, make_profile, profile_from_dict
from .simulator import StopRule, derive_seed, simulate_run, simulate_trace

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_UNRESOLVED = 3

DEFAULT_SEED = 20240601


def _profile_arg(text):
    path = Path(text)
    if not text.lstrip().startswith("{") and path.exists():
        text = path.read_text()
    try:
        return profile_from_dict(json.loads(text))
    except (json.JSONDecodeError, ProfileError) as exc:
        raise ConfigError(f"invalid --profile: {exc}") from exc


def build_parser():
    parser = argparse.ArgumentParser(prog="inhomcp", description=__doc__)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="master seed (u64)")
    parser.add_argument("--out", help="output directory for reports")
    parser.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, runs=False):
        p.add_argument("--profile", help='JSON, e.g. \'{"kind": "homogeneous", "params": [0.5, 1]}\'')
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--start", type=int)
        p.add_argument("--tmax", type=float)
        p.add_argument("--rmax", type=int)
        if runs:
            p.add_argument("--runs", type=int)

    p = sub.add_parser("simulate", help="one trajectory")
    common(p)
    p.add_argument("--trace", help="write the event trace as CSV")

    p = sub.add_parser("front-chain", help="front-chain series test, bracket and Monte Carlo")
    common(p)
    p.add_argument("--truncation", type=int)
    p.add_argument("--mc-runs", type=int, default=10_000)

    p = sub.add_parser("couple", help="coupled contact/front runs")
    common(p, runs=True)

    p = sub.add_parser("sweep", help="survival estimates over a lambda grid")
    common(p, runs=True)
    p.add_argument("--grid", help="comma separated lambda values")
    p.add_argument("--shared", action="store_true", help="shared-randomness monotone sweep")

    p = sub.add_parser("critical", help="bracket the critical lambda")
    common(p, runs=True)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("classify", help="regime verdict for a profile and lambda")
    common(p)
    p.add_argument("--lambda-c", help="lo,hi bracket of the one-sided critical value")
    return parser


def _merge(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "profile", None):
        cfg.profile = _profile_arg(args.profile)
    for name, attr in (("lam", "lam"), ("start", "start"), ("tmax", "tmax"), ("runs", "runs"),
                       ("tol", "tol"), ("truncation", "truncation")):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "rmax", None) is not None:
        cfg.rmax = args.rmax
    if getattr(args, "grid", None):
        cfg.lambda_grid = tuple(float(x) for x in args.grid.split(","))
    if getattr(args, "lambda_c", None):
        cfg.lambda_c = tuple(float(x) for x in args.lambda_c.split(","))
    if args.seed is not None:
        cfg.seed = args.seed
    if cfg.seed is None:
        cfg.seed = DEFAULT_SEED
    if cfg.profile is None:
        raise ConfigError("a profile is required (--profile or config)")
    if cfg.start < 0 or cfg.tmax <= 0 or cfg.runs < 1:
        raise ConfigError("start must be >= 0, tmax > 0, runs >= 1")
    return cfg


def _stop(cfg):
    rc = cfg.right_cutoff()
    if rc is not None and rc <= cfg.start:
        raise ConfigError("rmax must exceed start")
    return StopRule(cfg.tmax, rc)


def _need_lambda(cfg):
    if cfg.lam is None:
        raise ConfigError("lambda is required")
    return ModelParams(cfg.lam, cfg.profile, cfg.start)


def _print(obj):
    print(json.dumps(encode_value(obj), indent=2, sort_keys=True))


def _run_result_dict(res):
    return {"outcome": res.outcome.value, "extinction_time": res.extinction_time,
            "max_right": res.max_right, "events": res.events, "seed": res.seed,
            "end_time": res.end_time}


def cmd_simulate(args, cfg):
    params = _need_lambda(cfg)
    stop = _stop(cfg)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("time", "event", "site"))
            res = simulate_trace(params, stop, cfg.seed,
                                 lambda t, ev, site: writer.writerow((repr(t), ev, site)))
    else:
        res = simulate_run(params, stop, cfg.seed)
    _print(_run_result_dict(res))
    return EXIT_OK


def cmd_front_chain(args, cfg):
    params = _need_lambda(cfg)
    chain = FrontChain.from_params(params)
    series = series_test(chain)
    truncation = max(cfg.truncation, cfg.start + 2)
    bracket = absorption_probability(chain, cfg.start, truncation)
    runs = args.mc_runs
    absorbed = estimate_absorption(chain, cfg.start, _stop(cfg), runs, cfg.seed)
    lo, hi = wilson_interval(absorbed, runs)
    _print({"series_test": series.verdict.value, "series_ratio": series.ratio,
            "bracket": {"lower": bracket.lower, "upper": bracket.upper,
                        "truncation": bracket.truncation},
            "mc_frequency": absorbed / runs, "wilson_ci": [lo, hi]})
    return EXIT_OK


def cmd_couple(args, cfg):
    params = _need_lambda(cfg)
    stop = StopRule(cfg.tmax, args.rmax)
    eta_alive = xi_alive = violations = 0
    for k in range(cfg.runs):
        res = coupled_run(params, stop, derive_seed(cfg.seed, k))
        eta_alive += res.eta.survived
        xi_alive += res.xi.survived
        violations += res.violations
    _print({"runs": cfg.runs, "violations": violations,
            "eta_survival": eta_alive / cfg.runs, "xi_survival": xi_alive / cfg.runs})
    return EXIT_INVARIANT if violations else EXIT_OK


def _report(args, results, stem):
    if args.out:
        path = Path(args.out) / f"{stem}.{args.format}"
        emit_report(results, args.format, path)
        print(f"wrote {path}", file=sys.stderr)


def cmd_sweep(args, cfg):
    grid = cfg.lambda_grid or ((cfg.lam,) if cfg.lam else None)
    if not grid:
        raise ConfigError("a lambda grid is required (--grid or lambda_grid)")
    results = sweep(cfg.profile, grid, _stop(cfg), cfg.runs, cfg.seed, start=cfg.start,
                    shared=args.shared, level=cfg.ci_level)
    _print([r.as_row() for r in results])
    _report(args, results, "sweep")
    return EXIT_OK


def cmd_critical(args, cfg):
    est = estimate_lambda_c(cfg.profile, _stop(cfg), cfg.runs, cfg.tol, cfg.seed,
                            start=cfg.start, p_floor=cfg.p_floor, level=cfg.ci_level)
    _print({"lo": est.lo, "hi": est.hi, "flag": est.flag, "die_flag": est.die_flag,
            "survive_flag": est.survive_flag,
            "probes": [dict(p.estimate.as_row(), survives=p.survives, forced=p.forced)
                       for p in est.probes]})
    _report(args, [p.estimate for p in sorted(est.probes, key=lambda p: p.estimate.lam)],
            "critical")
    return EXIT_OK if est.resolved else EXIT_UNRESOLVED


def cmd_classify(args, cfg):
    if cfg.lam is None:
        raise ConfigError("lambda is required")
    if cfg.lambda_c is not None:
        lc = cfg.lambda_c
    else:
        est = estimate_lambda_c(make_profile("one_sided"), _stop(cfg), cfg.runs, cfg.tol,
                                cfg.seed, p_floor=cfg.p_floor, level=cfg.ci_level)
        if not est.resolved:
            _print({"error": "one-sided critical value unresolved", "lo": est.lo, "hi": est.hi})
            return EXIT_UNRESOLVED
        lc = (est.lo, est.hi)
    verdict = theorem1_verdict(cfg.profile, cfg.lam, lc)
    out = verdict.to_dict()
    out["lambda_c"] = list(lc)
    _print(out)
    if not verdict.consistent:
        return EXIT_INVARIANT
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "front-chain": cmd_front_chain, "couple": cmd_couple,
            "sweep": cmd_sweep, "critical": cmd_critical, "classify": cmd_classify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
