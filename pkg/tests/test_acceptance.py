"""Acceptance criteria, each run at its stated tolerance.

Every test logs one ``[PASS]``/``[FAIL]`` line, collected in the
"acceptance criteria" section of the pytest summary.
"""
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from inhomcp.coupling import coupled_run, embedded_chain_check, find_N
from inhomcp.experiments import (estimate_lambda_c, estimate_survival, shared_sweep_indicators,
                                 wilson_interval)
from inhomcp.front_chain import (FrontChain, SeriesVerdict, absorption_probability,
                                 estimate_absorption, series_test)
from inhomcp.model import ModelParams, make_profile
from inhomcp.simulator import StopRule, derive_seed, simulate_trace

pytestmark = pytest.mark.acceptance

SEED = 20240601


def test_c1_zero_limit_dies_out(acceptance_log):
    prof = make_profile("power", (1, 0, 1, 1))
    ok = True
    parts = []
    for lam in (5.0, 20.0):
        t0 = time.perf_counter()
        est = estimate_survival(ModelParams(lam, prof), StopRule(500.0, 1000), 5000, SEED)
        elapsed = time.perf_counter() - t0
        verdict = series_test(FrontChain.from_params(ModelParams(lam, prof))).verdict
        good = (est.p_hat <= 0.01 and est.wilson_hi < 0.02 and verdict is SeriesVerdict.DIVERGES
                and elapsed < 120)
        ok &= good
        parts.append(f"lam={lam:g} p_hat={est.p_hat:.4f} wilson_hi={est.wilson_hi:.4f} "
                     f"series={verdict.value} {elapsed:.0f}s")
    assert acceptance_log("C1 zero-limit extinction", ok, "; ".join(parts))


def test_c2_infinite_limit_survives(acceptance_log):
    prof = make_profile("power", (0, 1, 0.5, 1))
    lam = 0.05
    # start where the comparison with a supercritical one-sided process holds
    start = find_N(prof, lam, 4.0)
    t0 = time.perf_counter()
    est = estimate_survival(ModelParams(lam, prof, start), StopRule(500.0, 1000), 5000, SEED)
    elapsed = time.perf_counter() - t0
    ok = est.p_hat >= 0.05 and est.wilson_lo > 0.01 and elapsed < 120
    assert acceptance_log("C2 infinite-limit survival", ok,
                          f"start={start} p_hat={est.p_hat:.4f} wilson_lo={est.wilson_lo:.4f} "
                          f"{elapsed:.0f}s")


def test_c3_phase_transition_window(acceptance_log):
    stop = StopRule(500.0, 1000)
    t0 = time.perf_counter()
    os_est = estimate_lambda_c(make_profile("one_sided"), stop, 1000, 0.2, SEED)
    hom = estimate_lambda_c(make_profile("homogeneous", (0.5, 1.0)), stop, 1000, 0.2, SEED)
    elapsed = time.perf_counter() - t0
    lo_edge, hi_edge = 2 - 0.2, 2 * os_est.hi + 0.2
    ok = (os_est.resolved and os_est.width <= 0.4 and hom.resolved
          and lo_edge <= hom.lo and hom.hi <= hi_edge and elapsed < 900)
    assert acceptance_log("C3 phase-transition window", ok,
                          f"one_sided=[{os_est.lo:.3f},{os_est.hi:.3f}] "
                          f"homogeneous=[{hom.lo:.3f},{hom.hi:.3f}] "
                          f"window=[{lo_edge:.3f},{hi_edge:.3f}] {elapsed:.0f}s")


def test_c4_subthreshold_extinction(acceptance_log):
    prof = make_profile("homogeneous", (0.5, 1.0))
    params = ModelParams(1.5, prof)
    t0 = time.perf_counter()
    est = estimate_survival(params, StopRule(500.0, 1000), 10_000, SEED)
    elapsed = time.perf_counter() - t0
    bracket = absorption_probability(FrontChain.from_params(params), 0, 200)
    ok = (est.wilson_hi < 0.01 and bracket.lower >= 1 - 1e-9 and bracket.upper == 1.0
          and elapsed < 120)
    assert acceptance_log("C4 sub-threshold extinction", ok,
                          f"wilson_hi={est.wilson_hi:.5f} bracket=[{bracket.lower!r},"
                          f"{bracket.upper!r}] {elapsed:.0f}s")


def test_c5_front_chain_oracle(acceptance_log):
    chain = FrontChain.constant(2.0, 1.0)
    t0 = time.perf_counter()
    # shifted start 1 is state 0 of the chain
    bracket = absorption_probability(chain, 0, 64)
    runs = 100_000
    absorbed = estimate_absorption(chain, 0, StopRule(1e3), runs, SEED)
    elapsed = time.perf_counter() - t0
    lo, hi = wilson_interval(absorbed, runs, 0.997)
    ok = (bracket.lower <= 0.5 <= bracket.upper and bracket.width < 1e-9
          and lo <= 0.5 <= hi and elapsed < 60)
    assert acceptance_log("C5 front-chain oracle", ok,
                          f"bracket width={bracket.width:.2e} mc={absorbed / runs:.4f} "
                          f"ci99.7=[{lo:.4f},{hi:.4f}] {elapsed:.0f}s")


def test_c6_coupling_domination(acceptance_log):
    params = ModelParams(2.0, make_profile("homogeneous", (0.5, 1.0)), 5)
    violations = events = eta_alive = xi_alive = 0
    for k in range(1000):
        res = coupled_run(params, StopRule(100.0), derive_seed(SEED, k))
        violations += res.violations
        events += res.eta.events + res.xi.events
        eta_alive += res.eta.survived
        xi_alive += res.xi.survived
    ok = violations == 0 and eta_alive <= xi_alive
    assert acceptance_log("C6 coupling domination", ok,
                          f"violations={violations} events={events} "
                          f"eta_survival={eta_alive / 1000:.3f} xi_survival={xi_alive / 1000:.3f}")


def test_c7_embedded_chain(acceptance_log):
    prof = make_profile("homogeneous", (0.5, 1.0))
    params = ModelParams(8.0, prof)
    good = embedded_chain_check(params, 3.0, 0, 10_000)
    bad = embedded_chain_check(params, 4.1, 0, 10_000)
    ok = (good.birth_ok.all() and good.death_ok.all() and good.passed
          and not bad.passed and not bad.birth_ok[1:].any() and not bad.death_ok[1:].any())
    assert acceptance_log("C7 embedded-chain inequalities", ok,
                          f"lambda'=3: n0={good.n0}; lambda'=4.1: n0={bad.n0}")


def _holding_times(params, n, master):
    class Stop(Exception):
        pass

    out = []

    def sink(t, e, s):
        out.append(t)
        raise Stop

    for k in range(n):
        try:
            simulate_trace(params, StopRule(1e9), derive_seed(master, k), sink, chunk=1)
        except Stop:
            pass
    return np.array(out)


def test_c8_simulator_exactness(acceptance_log):
    triples = [(make_profile("homogeneous", (0.5, 1.0)), 2.0, 3),
               (make_profile("power", (1, 0, 1, 1)), 3.0, 0),
               (make_profile("power", (0.5, 1, 2, 3)), 1.7, 12)]
    pvals = []
    for i, (prof, lam, site) in enumerate(triples):
        rate = (prof.delta(site) + lam * prof.p_up(site)
                + lam * (1 - prof.p_up(site)) * (site >= 1))
        samples = _holding_times(ModelParams(lam, prof, site), 10_000, SEED + i)
        pvals.append(stats.kstest(samples, "expon", args=(0, 1 / rate)).pvalue)
    chain = FrontChain.from_params(ModelParams(2.5, make_profile("power", (0.5, 0, 2, 1))))
    up = np.zeros(20, np.int64)
    down = np.zeros(20, np.int64)
    estimate_absorption(chain, 2, StopRule(200.0, 15), 5000, SEED, counts=(up, down))
    b, d = chain.rates(20)
    misses = []
    for n in range(10):
        ci = stats.binomtest(int(up[n]), int(up[n] + down[n])).proportion_ci(0.99)
        if not ci.low <= b[n] / (b[n] + d[n]) <= ci.high:
            misses.append(n)
    ok = all(p > 0.01 for p in pvals) and not misses
    assert acceptance_log("C8 simulator exactness", ok,
                          "ks p=" + ",".join(f"{p:.3f}" for p in pvals)
                          + f"; jump-frequency CI misses at states {misses}")


def _cli_csv(tmp):
    cmd = [sys.executable, "-m", "inhomcp", "--seed", "7", "--out", str(tmp), "--format", "csv",
           "sweep", "--profile", '{"kind": "homogeneous", "params": [0.5, 1]}',
           "--grid", "0.5,1,2,4,8", "--tmax", "50", "--runs", "200"]
    subprocess.run(cmd, check=True, capture_output=True)
    return (tmp / "sweep.csv").read_bytes()


def test_c9_determinism_and_monotonicity(acceptance_log, tmp_path):
    first = _cli_csv(tmp_path / "a")
    second = _cli_csv(tmp_path / "b")
    alive, violations = shared_sweep_indicators(make_profile("homogeneous", (0.5, 1.0)),
                                                [0.5, 1.0, 2.0, 4.0, 8.0],
                                                StopRule(100.0, 200), 1000, SEED)
    exceptions = int(np.sum(alive[:, :-1] & ~alive[:, 1:]))
    ok = first == second and exceptions == 0 and violations == 0
    assert acceptance_log("C9 determinism and monotonicity", ok,
                          f"csv identical={first == second}; monotonicity exceptions={exceptions};"
                          f" containment violations={violations}")
