"""Exact continuous-time simulation of the inhomogeneous contact process."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .model import ModelParams

__all__ = [
    "Configuration",
    "Event",
    "Outcome",
    "RunResult",
    "StopRule",
    "derive_seed",
    "make_rng",
    "monotone_runs",
    "simulate_run",
    "simulate_trace",
    "step_rates",
]

_MASK64 = (1 << 64) - 1


class Outcome(enum.Enum):
    EXTINCT = "extinct"
    ALIVE = "alive"
    ESCAPED = "escaped"


_STATUS = {
    kernels.EXTINCT: Outcome.EXTINCT,
    kernels.ALIVE: Outcome.ALIVE,
    kernels.ESCAPED: Outcome.ESCAPED,
}


class Event(NamedTuple):
    kind: str  # "birth" or "death"
    site: int


@dataclass(frozen=True)
class Configuration:
    """Finite set of occupied sites, kept sorted."""

    occupied: tuple = ()

    def __post_init__(self):
        sites = sorted(set(int(x) for x in self.occupied))
        if sites and sites[0] < 0:
            raise ValueError("sites must be non-negative")
        object.__setattr__(self, "occupied", tuple(sites))

    def __contains__(self, site):
        return site in set(self.occupied)

    def __len__(self):
        return len(self.occupied)


@dataclass(frozen=True)
class StopRule:
    """Censoring: stop at time ``horizon`` or once a site ``>= right_cutoff`` is occupied."""

    horizon: float
    right_cutoff: int | None = None

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.right_cutoff is not None and self.right_cutoff <= 0:
            raise ValueError("right_cutoff must be a positive integer")

    def check(self, start):
        if self.right_cutoff is not None and self.right_cutoff <= start:
            raise ValueError("right_cutoff must exceed the initial site")


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    extinction_time: float | None
    max_right: int
    events: int
    seed: int
    end_time: float = math.nan

    @property
    def survived(self):
        """Alive at the horizon or escaped right: the censored survival event."""
        return self.outcome is not Outcome.EXTINCT


def derive_seed(master_seed, k):
    """64-bit seed of replica ``k``; a pure function of ``(master_seed, k)``."""
    ss = np.random.SeedSequence(int(master_seed) & _MASK64, spawn_key=(int(k),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def step_rates(config, params):
    """Enabled transitions out of ``config`` with their exact rates."""
    if not len(config):
        raise ValueError("empty configuration: the process is already dead")
    occupied = set(config.occupied)
    prof = params.profile
    out = []
    for n in config.occupied:
        out.append((Event("death", n), float(prof.delta(n))))
        p = float(prof.p_up(n))
        if n + 1 not in occupied:
            out.append((Event("birth", n + 1), params.lam * p))
        if n >= 1 and n - 1 not in occupied and p < 1.0:
            out.append((Event("birth", n - 1), params.lam * (1.0 - p)))
    return out


class _ContactRunner:
    """Holds rate tables for one parameter set and reuses them across seeds."""

    def __init__(self, params, stop):
        stop.check(params.initial_site)
        self.params = params
        self.stop = stop
        if stop.right_cutoff is not None:
            size = stop.right_cutoff + 2
        else:
            size = max(256, 2 * params.initial_site + 4)
        self._set_size(size)

    def _set_size(self, size):
        self.size = size
        self.p_up, self.p_down, self.delta = self.params.profile.tables(size)
        self.cap = kernels.tree_capacity(size)

    def run(self, seed, sink=None, chunk=4096):
        params, stop = self.params, self.stop
        rng = make_rng(seed)
        occ = np.zeros(self.size + 1, np.uint8)
        tree = np.zeros(2 * self.cap)
        tstate = np.zeros(1)
        istate = np.zeros(3, np.int64)
        kernels.contact_init(params.initial_site, occ, tree, self.cap, self.p_up,
                             self.p_down, self.delta, params.lam, istate)
        record = sink is not None
        n_buf = chunk if record else 0
        rec_time = np.empty(n_buf)
        rec_kind = np.empty(n_buf, np.int8)
        rec_site = np.empty(n_buf, np.int64)
        rmax = stop.right_cutoff or 0
        while True:
            status, n_rec = kernels.contact_advance(
                occ, tree, self.cap, self.p_up, self.p_down, self.delta, params.lam,
                stop.horizon, rmax, rng, tstate, istate, record, rec_time, rec_kind, rec_site)
            for i in range(n_rec):
                sink(float(rec_time[i]), "birth" if rec_kind[i] == kernels.BIRTH else "death",
                     int(rec_site[i]))
            if status == kernels.OVERFLOW:
                occ, tree = self._grow(occ, tree)
            elif status != kernels.TRACE_FULL:
                break
        outcome = _STATUS[status]
        t = float(tstate[0])
        return RunResult(outcome, t if outcome is Outcome.EXTINCT else None,
                         int(istate[1]), int(istate[0]), int(seed), t)

    def _grow(self, occ, tree):
        old_cap = self.cap
        self._set_size(2 * self.size)
        new_occ = np.zeros(self.size + 1, np.uint8)
        new_occ[: occ.size] = occ
        new_tree = np.zeros(2 * self.cap)
        new_tree[self.cap: self.cap + old_cap] = tree[old_cap: 2 * old_cap]
        kernels.tree_rebuild(new_tree, self.cap)
        return new_occ, new_tree


def simulate_run(params: ModelParams, stop: StopRule, seed: int) -> RunResult:
    """One exact trajectory; identical arguments give an identical result."""
    return _ContactRunner(params, stop).run(seed)


def simulate_trace(params: ModelParams, stop: StopRule, seed: int,
                   sink: Callable[[float, str, int], object], chunk: int = 4096) -> RunResult:
    """As :func:`simulate_run`, calling ``sink(time, event, site)`` per transition.

    Events are streamed in chunks of ``chunk``; an exception raised by the
    sink stops the run and propagates.  The trajectory does not depend on
    ``chunk``.
    """
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    return _ContactRunner(params, stop).run(seed, sink=sink, chunk=chunk)


def _grown_run(initial_size, attempt):
    size = initial_size
    while True:
        result = attempt(size)
        if result is not None:
            return result
        size *= 2


def monotone_runs(profile, lams, start, stop, seed):
    """Simulate the process for every value in ``lams`` on shared randomness.

    ``lams`` must be strictly increasing.  Returns ``(results, violations)``
    where ``results[g]`` is the :class:`RunResult` at ``lams[g]`` and
    ``violations`` counts containment failures (always expected to be 0).
    """
    lams = np.asarray(lams, dtype=np.float64)
    if lams.size == 0:
        return [], 0
    if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
        raise ValueError("lambda grid must be positive and strictly increasing")
    stop.check(start)
    G = lams.size
    rmax = stop.right_cutoff or 0
    initial = stop.right_cutoff + 2 if stop.right_cutoff else max(256, 2 * start + 4)

    def attempt(size):
        p_up, _, delta = profile.tables(size)
        status = np.empty(G, np.int64)
        times = np.empty(G)
        max_right = np.empty(G, np.int64)
        events = np.empty(G, np.int64)
        code, violations = kernels.monotone_run_kernel(
            p_up, delta, lams, start, stop.horizon, rmax, make_rng(seed),
            status, times, max_right, events)
        if code == kernels.OVERFLOW:
            return None
        results = []
        for g in range(G):
            outcome = _STATUS[int(status[g])]
            t = float(times[g])
            results.append(RunResult(outcome, t if outcome is Outcome.EXTINCT else None,
                                     int(max_right[g]), int(events[g]), int(seed), t))
        return results, int(violations)

    return _grown_run(initial, attempt)
