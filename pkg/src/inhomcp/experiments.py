"""Monte Carlo survival estimates, critical-value bracketing and verdicts."""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .config import encode_value, parse_value
from .coupling import embedded_chain_check, find_N
from .front_chain import FrontChain, SeriesResult, SeriesVerdict, absorption_probability, series_test
from .model import ModelParams, RateProfile, limit_ell
from .simulator import StopRule, _ContactRunner, derive_seed, monotone_runs

__all__ = [
    "CriticalEstimate",
    "Probe",
    "Regime",
    "SurvivalEstimate",
    "Verdict",
    "emit_report",
    "estimate_lambda_c",
    "estimate_survival",
    "horizon_doubling_check",
    "lemma_evidence",
    "load_report",
    "shared_sweep_indicators",
    "sweep",
    "theorem1_verdict",
    "wilson_interval",
]

CSV_FIELDS = ("lambda", "runs", "alive", "p_hat", "wilson_lo", "wilson_hi", "horizon")


def wilson_interval(successes, trials, level=0.95):
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level,
                                                                method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class SurvivalEstimate:
    lam: float
    runs: int
    alive: int
    p_hat: float
    wilson_lo: float
    wilson_hi: float
    horizon: float
    right_cutoff: int | None = None
    level: float = 0.95

    @classmethod
    def from_counts(cls, lam, alive, runs, stop, level=0.95):
        lo, hi = wilson_interval(alive, runs, level)
        p_hat = alive / runs
        return cls(float(lam), int(runs), int(alive), p_hat, min(lo, p_hat), max(hi, p_hat),
                   float(stop.horizon), stop.right_cutoff, level)

    def as_row(self):
        return {"lambda": self.lam, "runs": self.runs, "alive": self.alive, "p_hat": self.p_hat,
                "wilson_lo": self.wilson_lo, "wilson_hi": self.wilson_hi, "horizon": self.horizon}


def _count_alive(runner, master_seed, replicas):
    return sum(runner.run(derive_seed(master_seed, k)).survived for k in replicas)


def estimate_survival(params: ModelParams, stop: StopRule, runs: int, master_seed: int,
                      level: float = 0.95, workers: int = 1) -> SurvivalEstimate:
    """Censored survival frequency over ``runs`` replicas.

    Replica ``k`` is seeded by ``derive_seed(master_seed, k)``; the count is
    the same for any ``workers`` value.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    runner = _ContactRunner(params, stop)
    if workers <= 1:
        alive = _count_alive(runner, master_seed, range(runs))
    else:
        # kernels release the GIL; each thread gets its own runner
        chunks = [range(i, runs, workers) for i in range(workers)]
        with ThreadPoolExecutor(workers) as pool:
            alive = sum(pool.map(
                lambda ch: _count_alive(_ContactRunner(params, stop), master_seed, ch), chunks))
    return SurvivalEstimate.from_counts(params.lam, alive, runs, stop, level)


def shared_sweep_indicators(profile, lambda_grid, stop, runs, master_seed, start=0):
    """Per-replica censored survival at every grid value, on shared randomness.

    Returns a ``(runs, len(grid))`` boolean array and the total containment
    violation count.
    """
    alive = np.zeros((runs, len(lambda_grid)), dtype=bool)
    violations = 0
    for k in range(runs):
        results, v = monotone_runs(profile, lambda_grid, start, stop, derive_seed(master_seed, k))
        alive[k] = [r.survived for r in results]
        violations += v
    return alive, violations


def sweep(profile: RateProfile, lambda_grid, stop: StopRule, runs: int, master_seed: int,
          start: int = 0, shared: bool = False, level: float = 0.95):
    """Survival estimates along a strictly increasing grid of lambda values.

    With ``shared=True`` all grid values reuse one monotone coupling per
    replica, so the estimates are exactly non-decreasing.
    """
    grid = [float(x) for x in lambda_grid]
    if not grid:
        return []
    if any(x <= 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be positive and strictly increasing")
    if shared:
        alive, _ = shared_sweep_indicators(profile, grid, stop, runs, master_seed, start)
        counts = alive.sum(axis=0)
        return [SurvivalEstimate.from_counts(lam, c, runs, stop, level)
                for lam, c in zip(grid, counts)]
    return [estimate_survival(ModelParams(lam, profile, start), stop, runs, master_seed, level)
            for lam in grid]


def horizon_doubling_check(params, stop, runs, master_seed, level=0.95):
    """Estimates at ``T`` and ``2T``; ``ok`` if they differ by less than two CI widths."""
    first = estimate_survival(params, stop, runs, master_seed, level)
    rc = None if stop.right_cutoff is None else 2 * stop.right_cutoff
    second = estimate_survival(params, StopRule(2 * stop.horizon, rc), runs, master_seed, level)
    width = max(first.wilson_hi - first.wilson_lo, second.wilson_hi - second.wilson_lo)
    return first, second, abs(first.p_hat - second.p_hat) < 2 * width


@dataclass(frozen=True)
class Probe:
    lam: float
    estimate: SurvivalEstimate
    survives: bool
    forced: bool  # decided on the point estimate after the run budget ran out


@dataclass(frozen=True)
class CriticalEstimate:
    lo: float
    hi: float
    resolved: bool
    die_flag: bool = False
    survive_flag: bool = False
    probes: tuple = field(default=(), repr=False)

    @property
    def flag(self):
        return "ok" if self.resolved else "unresolved"

    @property
    def width(self):
        return self.hi - self.lo


def estimate_lambda_c(profile: RateProfile, stop: StopRule, runs_per_probe: int, tol: float,
                      master_seed: int, *, start: int = 0, p_floor: float = 0.02,
                      level: float = 0.95, lambda_start: float | None = None,
                      lambda_max: float = 64.0, lambda_min: float = 1e-3,
                      max_runs: int | None = None, max_probes: int = 40) -> CriticalEstimate:
    """Bracket the censored critical value by bisection on lambda.

    A probe survives when the Wilson lower bound exceeds ``p_floor`` and
    dies when the upper bound falls below it; undecided probes are rerun
    with doubled replicas up to ``max_runs`` and then settled on the point
    estimate.  All probes share ``master_seed``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    max_runs = max_runs or 4 * runs_per_probe
    probes = []

    def probe(lam):
        runs = runs_per_probe
        while True:
            est = estimate_survival(ModelParams(lam, profile, start), stop, runs, master_seed, level)
            if est.wilson_lo > p_floor or est.wilson_hi < p_floor:
                p = Probe(lam, est, est.wilson_lo > p_floor, False)
                break
            if 2 * runs > max_runs:
                p = Probe(lam, est, est.p_hat >= p_floor, True)
                break
            runs *= 2
        probes.append(p)
        return p.survives

    if lambda_start is None:
        ell = limit_ell(profile)
        lambda_start = 1.0 / ell if ell is not None and 0 < ell < math.inf else 1.0
    g = float(lambda_start)
    if probe(g):
        hi = g
        while True:
            g /= 2
            if g < lambda_min or len(probes) >= max_probes:
                return CriticalEstimate(0.0, hi, False, survive_flag=True, probes=tuple(probes))
            if not probe(g):
                lo = g
                break
            hi = g
    else:
        lo = g
        while True:
            g *= 2
            if g > lambda_max or len(probes) >= max_probes:
                return CriticalEstimate(lo, math.inf, False, die_flag=True, probes=tuple(probes))
            if probe(g):
                hi = g
                break
            lo = g
    while hi - lo > tol:
        if len(probes) >= max_probes:
            return CriticalEstimate(lo, hi, False, probes=tuple(probes))
        mid = 0.5 * (lo + hi)
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return CriticalEstimate(lo, hi, True, probes=tuple(probes))


class Regime(enum.Enum):
    DIES_OUT_ALL_LAMBDA = "dies_out_all_lambda"
    PHASE_TRANSITION = "phase_transition"
    SURVIVES_ALL_LAMBDA = "survives_all_lambda"
    UNCLASSIFIABLE = "unclassifiable"


@dataclass(frozen=True)
class Verdict:
    regime: Regime
    ell: float | None
    lemma1_applies: bool
    lemma2_applies: bool
    window: tuple | None = None
    position: str | None = None  # "below-window", "inside-window", "above-window"
    series: SeriesResult | None = None

    @property
    def consistent(self):
        """Extinction forced by the limit agrees with the series test."""
        if not self.lemma1_applies:
            return True
        return self.series is not None and self.series.verdict is SeriesVerdict.DIVERGES

    def to_dict(self):
        return {
            "regime": self.regime.value,
            "ell": self.ell,
            "window": list(self.window) if self.window else None,
            "position": self.position,
            "lemma1_applies": self.lemma1_applies,
            "lemma2_applies": self.lemma2_applies,
            "series_test": self.series.verdict.value if self.series else None,
            "consistent": self.consistent,
        }


def theorem1_verdict(profile: RateProfile, lam: float, lambda_c_estimate) -> Verdict:
    """Classify ``(profile, lam)`` by the limit of ``p_up / delta``.

    ``lambda_c_estimate`` is a :class:`CriticalEstimate` or a ``(lo, hi)``
    pair for the one-sided process; its upper end sets the window edge.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    lc_hi = getattr(lambda_c_estimate, "hi", None)
    if lc_hi is None:
        lc_hi = float(lambda_c_estimate[1])
    ell = limit_ell(profile)
    if ell is None:
        return Verdict(Regime.UNCLASSIFIABLE, None, False, False)
    lam_ell = lam * ell
    lemma1 = lam_ell < 1
    lemma2 = lam_ell > lc_hi
    series = series_test(FrontChain.from_params(ModelParams(lam, profile)))
    if ell == 0:
        return Verdict(Regime.DIES_OUT_ALL_LAMBDA, ell, lemma1, lemma2, series=series)
    if math.isinf(ell):
        return Verdict(Regime.SURVIVES_ALL_LAMBDA, ell, lemma1, lemma2, series=series)
    window = (1.0 / ell, lc_hi / ell)
    position = "below-window" if lemma1 else "above-window" if lemma2 else "inside-window"
    return Verdict(Regime.PHASE_TRANSITION, ell, lemma1, lemma2, window, position, series)


def lemma_evidence(profile, lam, lambda_c_hi, truncation=200, depth=10_000):
    """Analytic cross-checks backing a verdict.

    Returns a dict with the front-chain absorption bracket from site 0 and,
    when survival is forced, the comparison site ``N`` and the embedded
    chain report for a ``lambda'`` strictly between ``lambda_c_hi`` and
    ``lam * ell``.
    """
    ell = limit_ell(profile)
    out = {"bracket": absorption_probability(
        FrontChain.from_params(ModelParams(lam, profile)), 0, truncation)}
    if ell is not None and lam * ell > lambda_c_hi:
        lam_prime = 2 * lambda_c_hi if math.isinf(ell) else 0.5 * (lambda_c_hi + lam * ell)
        n = find_N(profile, lam, lam_prime, depth)
        out["lambda_prime"] = lam_prime
        out["N"] = n
        if n is not None:
            out["embedded"] = embedded_chain_check(ModelParams(lam, profile), lam_prime, n, depth)
    return out


def _csv_bytes(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in results:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in r.as_row().values()])
    return buf.getvalue().encode()


def _json_bytes(results):
    rows = [dict(r.as_row(), right_cutoff=r.right_cutoff, level=r.level) for r in results]
    return (json.dumps({"results": encode_value(rows)}, indent=2, sort_keys=True) + "\n").encode()


def _svg_bytes(results):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lam = np.array([r.lam for r in results])
    p = np.array([r.p_hat for r in results])
    err = np.array([[r.p_hat - r.wilson_lo for r in results],
                    [r.wilson_hi - r.p_hat for r in results]])
    with plt.rc_context({"svg.hashsalt": "inhomcp", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.errorbar(lam, p, yerr=err, fmt="o-", capsize=3)
        ax.set_xlabel("lambda")
        ax.set_ylabel("survival frequency")
        ax.set_ylim(-0.02, 1.02)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def emit_report(results, fmt, path):
    """Write ``results`` as ``csv``, ``json`` or ``svg`` to ``path``.

    Output bytes depend only on ``results``.
    """
    if not results:
        raise ValueError("no results to report")
    writers = {"csv": _csv_bytes, "json": _json_bytes, "svg": _svg_bytes}
    if fmt not in writers:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    data = writers[fmt](results)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def load_report(path):
    """Read a JSON report back into :class:`SurvivalEstimate` objects."""
    raw = parse_value(json.loads(Path(path).read_text()))
    return [SurvivalEstimate(row["lambda"], row["runs"], row["alive"], row["p_hat"],
                             row["wilson_lo"], row["wilson_hi"], row["horizon"],
                             row["right_cutoff"], row["level"])
            for row in raw["results"]]
