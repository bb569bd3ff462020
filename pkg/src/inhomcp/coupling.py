"""Executable versions of the two comparison arguments.

``coupled_run`` drives the contact process and its dominating front process
from one set of clocks and checks domination after every event.
``embedded_chain_check`` and ``find_N`` evaluate the jump-chain inequalities
against the one-sided process with rate ``lambda_prime``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .model import ModelParams, RateProfile
from .simulator import Outcome, RunResult, StopRule, _STATUS, make_rng

__all__ = [
    "CoupledResult",
    "EmbeddedCheck",
    "coupled_run",
    "embedded_chain_check",
    "find_N",
]


@dataclass(frozen=True)
class CoupledResult:
    eta: RunResult
    xi: RunResult
    violations: int


def _result(status, t, max_right, events, seed):
    outcome = _STATUS[int(status)]
    t = float(t)
    return RunResult(outcome, t if outcome is Outcome.EXTINCT else None,
                     int(max_right), int(events), int(seed), t)


def coupled_run(params: ModelParams, stop: StopRule, seed: int,
                counts: tuple | None = None) -> CoupledResult:
    """Run the contact process and the front process on shared randomness.

    The front starts at the initial site with every site to its left
    counted as occupied.  ``counts=(up, down)`` accumulates the front's
    per-state jump counts.
    """
    stop.check(params.initial_site)
    x0 = params.initial_site
    rmax = stop.right_cutoff or 0
    size = stop.right_cutoff + 2 if stop.right_cutoff else max(256, 2 * x0 + 4)
    while True:
        p_up, _, delta = params.profile.tables(size)
        n_count = size if counts is not None else 0
        up = np.zeros(n_count, np.int64)
        down = np.zeros(n_count, np.int64)
        out = np.zeros(7, np.int64)
        code, eta_t, xi_t = kernels.coupled_run_kernel(
            p_up, delta, params.lam, x0, stop.horizon, rmax, make_rng(seed), up, down, out)
        if code != kernels.OVERFLOW:
            break
        size *= 2
    if counts is not None:
        for acc, local in zip(counts, (up, down)):
            k = min(acc.size, local.size)
            acc[:k] += local[:k]
    eta = _result(out[0], eta_t, out[1], out[2], seed)
    xi = _result(out[3], xi_t, out[4], out[5], seed)
    return CoupledResult(eta, xi, int(out[6]))


@dataclass(frozen=True)
class EmbeddedCheck:
    """Per-site outcome of the two jump-probability comparisons on ``[N, N+depth]``."""

    N: int
    birth_ok: np.ndarray
    death_ok: np.ndarray
    n0: int | None

    @property
    def consistent(self):
        # the inequalities are complements of each other
        return bool(np.array_equal(self.birth_ok, self.death_ok))

    @property
    def passed(self):
        return self.n0 is not None and self.consistent


def _exact_rates(profile, lam, sites):
    lam_q = Fraction(lam)
    p = np.atleast_1d(profile.p_up(sites))
    d = np.atleast_1d(profile.delta(sites))
    return [lam_q * Fraction(float(pi)) for pi in p], [Fraction(float(di)) for di in d]


def embedded_chain_check(params: ModelParams, lambda_prime: float, N: int,
                         depth: int) -> EmbeddedCheck:
    """Compare jump probabilities with the one-sided process at rate ``lambda_prime``.

    For each ``n`` in ``[N, N + depth]`` checks, in exact rational
    arithmetic on the floating-point rates,

        lam p / (lam p + delta) > lambda' / (lambda' + 1)
        delta / (lam p + delta) < 1 / (lambda' + 1)

    ``n0`` is the smallest site from which both hold through ``N + depth``.
    """
    if not lambda_prime > 0:
        raise ValueError("lambda_prime must be positive")
    sites = np.arange(N, N + depth + 1)
    births, deaths = _exact_rates(params.profile, params.lam, sites)
    lp = Fraction(lambda_prime)
    birth_bar = lp / (lp + 1)
    death_bar = 1 / (lp + 1)
    birth_ok = np.array([b / (b + d) > birth_bar for b, d in zip(births, deaths)])
    death_ok = np.array([d / (b + d) < death_bar for b, d in zip(births, deaths)])
    both = birth_ok & death_ok
    n0 = None
    if both[-1]:
        fails = np.flatnonzero(~both)
        n0 = int(N + (fails[-1] + 1 if fails.size else 0))
    return EmbeddedCheck(int(N), birth_ok, death_ok, n0)


def find_N(profile: RateProfile, lam: float, lambda_prime: float,
           search_cap: int = 10_000) -> int | None:
    """Smallest ``N`` with ``lam * p_up(n) / delta(n) > lambda_prime`` for all ``n >= N``.

    Sites up to ``search_cap`` are checked exactly; beyond it the profile's
    exact tail infimum must also clear ``lambda_prime``.
    """
    inf_tail, _ = profile.ratio_bounds(search_cap)
    if not lam * inf_tail > lambda_prime:
        return None
    births, deaths = _exact_rates(profile, lam, np.arange(search_cap + 1))
    lp = Fraction(lambda_prime)
    ok = np.array([b > lp * d for b, d in zip(births, deaths)])
    if not ok[-1]:
        return None
    fails = np.flatnonzero(~ok)
    return int(fails[-1] + 1) if fails.size else 0
