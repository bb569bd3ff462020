"""The rightmost-occupant chain of the dominating front process.

States are the sites ``0, 1, 2, ...``.  From ``n`` the chain moves to ``n+1``
at rate ``b_n = lam * p_up(n)`` and, for ``n >= 1``, to ``n-1`` at rate
``d_n = delta(n)``.  The death clock firing at ``0`` is absorption
(extinction).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .model import ModelParams
from .simulator import Outcome, RunResult, StopRule, _STATUS, derive_seed, make_rng

__all__ = [
    "AbsorptionBracket",
    "FrontChain",
    "SeriesResult",
    "SeriesVerdict",
    "absorption_probability",
    "estimate_absorption",
    "series_test",
    "simulate_front",
    "truncated_absorption",
]

EPS = 1e-6
DIVERGENCE_THRESHOLD = 1e12


@dataclass(frozen=True)
class FrontChain:
    """Birth and death rate accessors of the front chain.

    ``tail_ratio_sup(n)``, when known, gives ``sup_{k >= n} d_k / b_k``
    exactly; it is what makes the upper absorption bound rigorous.
    """

    birth: Callable
    death: Callable
    tail_ratio_sup: Callable | None = None

    def __post_init__(self):
        probe = np.arange(64)
        if np.any(np.asarray(self.birth(probe)) <= 0) or np.any(np.asarray(self.death(probe)) <= 0):
            raise ValueError("front chain rates must be strictly positive")

    @classmethod
    def from_params(cls, params: ModelParams):
        prof, lam = params.profile, params.lam

        def birth(n):
            return lam * np.asarray(prof.p_up(n), dtype=float)

        def tail_sup(n):
            lo, _ = prof.ratio_bounds(n)
            return math.inf if lo == 0 else 1.0 / (lam * lo)

        return cls(birth, prof.delta, tail_sup)

    @classmethod
    def constant(cls, b, d):
        if not (b > 0 and d > 0):
            raise ValueError("front chain rates must be strictly positive")
        b, d = float(b), float(d)
        return cls(lambda n: np.full(np.shape(n), b) if np.ndim(n) else b,
                   lambda n: np.full(np.shape(n), d) if np.ndim(n) else d,
                   lambda n: d / b)

    def rates(self, size):
        n = np.arange(size)
        return (np.asarray(self.birth(n), dtype=np.float64),
                np.asarray(self.death(n), dtype=np.float64))


class SeriesVerdict(enum.Enum):
    DIVERGES = "diverges"
    CONVERGES = "converges"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SeriesResult:
    verdict: SeriesVerdict
    ratio: float  # d_i / b_i at the deepest term
    log_partial_sum: float
    reason: str


def series_test(chain: FrontChain, max_terms: int = 10_000) -> SeriesResult:
    """Decide divergence of ``sum_i prod_{j<=i} d_j / b_j`` (i, j >= 1).

    Absorption is certain iff the series diverges.  The ratio test is
    applied to the second half of the computed terms; at ratio 1 the
    series is still declared divergent when the terms stop decreasing,
    since the terms then cannot tend to zero.
    """
    if max_terms < 2:
        raise ValueError("max_terms must be >= 2")
    b, d = chain.rates(max_terms + 1)
    rho = d[1:] / b[1:]
    log_terms = np.cumsum(np.log(rho))
    log_sum = float(logsumexp(log_terms))
    tail = rho[max_terms // 2:]
    last = float(rho[-1])
    if tail.min() > 1.0 + EPS:
        return SeriesResult(SeriesVerdict.DIVERGES, last, log_sum, "ratio")
    if tail.max() < 1.0 - EPS:
        return SeriesResult(SeriesVerdict.CONVERGES, last, log_sum, "ratio")
    if tail.min() >= 1.0:
        reason = "threshold" if log_sum > math.log(DIVERGENCE_THRESHOLD) else "terms"
        return SeriesResult(SeriesVerdict.DIVERGES, last, log_sum, reason)
    return SeriesResult(SeriesVerdict.INCONCLUSIVE, last, log_sum, "ratio near 1")


@dataclass(frozen=True)
class AbsorptionBracket:
    lower: float
    upper: float
    truncation: int

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError(f"malformed bracket [{self.lower}, {self.upper}]")

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)


def _log_gamma(chain, truncation):
    # log of Gamma_i = prod_{j<i} d_j / b_j, i = 0..truncation
    b, d = chain.rates(truncation)
    return np.concatenate(([0.0], np.cumsum(np.log(d / b))))


def absorption_probability(chain: FrontChain, start: int, truncation: int) -> AbsorptionBracket:
    """Rigorous bracket on the probability of absorption from ``start``.

    The lower end treats state ``truncation`` as a survival trap.  The upper
    end adds a geometric bound on the neglected tail, which needs
    ``chain.tail_ratio_sup(truncation) < 1``; otherwise it is 1.
    """
    if truncation <= start + 1:
        raise ValueError("truncation must exceed start + 1")
    log_g = _log_gamma(chain, truncation)
    log_head = logsumexp(log_g[: start + 1])
    log_s = logsumexp(log_g)
    lower = float(-np.expm1(log_head - log_s))
    upper = 1.0
    sup = chain.tail_ratio_sup(truncation) if chain.tail_ratio_sup else math.inf
    if sup < 1.0:
        log_tail = log_g[-1] + math.log(sup) - math.log1p(-sup)
        upper = float(-np.expm1(log_head - np.logaddexp(log_s, log_tail)))
    lower = min(max(lower, 0.0), 1.0)
    upper = min(max(upper, lower), 1.0)
    return AbsorptionBracket(lower, upper, truncation)


def truncated_absorption(chain: FrontChain, start: int, truncation: int) -> float:
    """Absorption probability with state ``truncation`` absorbing-alive.

    Solves the tridiagonal first-step equations directly; agrees with the
    lower end of :func:`absorption_probability`.
    """
    from scipy.linalg import solve_banded

    if truncation <= start + 1:
        raise ValueError("truncation must exceed start + 1")
    m = truncation  # unknowns h_0..h_{m-1}; h_m = 0, death at 0 -> 1
    b, d = chain.rates(m)
    tot = b + d
    ab = np.zeros((3, m))
    ab[1] = 1.0
    ab[0, 1:] = -b[:-1] / tot[:-1]  # coefficient of h_{n+1} in row n
    ab[2, :-1] = -d[1:] / tot[1:]  # coefficient of h_{n-1} in row n
    rhs = np.zeros(m)
    rhs[0] = d[0] / tot[0]
    h = solve_banded((1, 1), ab, rhs)
    return float(h[start])


def simulate_front(chain: FrontChain, start: int, stop: StopRule, seed: int,
                   counts: tuple | None = None) -> RunResult:
    """Exact trajectory of the front chain; deterministic in ``seed``.

    ``counts=(up, down)`` accumulates per-state jump counts into the two
    integer arrays (states beyond their length are not counted).
    """
    return _front(chain, start, stop, seed, counts, {})


def _front(chain, start, stop, seed, counts, tables):
    stop.check(start)
    rmax = stop.right_cutoff or 0
    size = stop.right_cutoff + 2 if stop.right_cutoff else max(256, 2 * start + 4, *tables)
    while True:
        if size not in tables:
            tables[size] = chain.rates(size)
        b, d = tables[size]
        up = np.zeros(size, np.int64)
        down = np.zeros(size, np.int64)
        status, t, max_right, events = kernels.front_chain_run(
            b, d, start, stop.horizon, rmax, make_rng(seed), counts is not None, up, down)
        if status != kernels.OVERFLOW:
            break
        size *= 2
    if counts is not None:
        for acc, local in zip(counts, (up, down)):
            k = min(acc.size, local.size)
            acc[:k] += local[:k]
    outcome = _STATUS[status]
    t = float(t)
    return RunResult(outcome, t if outcome is Outcome.EXTINCT else None,
                     int(max_right), int(events), int(seed), t)


def estimate_absorption(chain: FrontChain, start: int, stop: StopRule, runs: int,
                        master_seed: int, counts: tuple | None = None) -> int:
    """Number of absorbed runs out of ``runs`` replicas."""
    absorbed = 0
    tables = {}
    for k in range(runs):
        res = _front(chain, start, stop, derive_seed(master_seed, k), counts, tables)
        absorbed += res.outcome is Outcome.EXTINCT
    return absorbed
