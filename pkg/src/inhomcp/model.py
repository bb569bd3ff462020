"""Rate profiles and model parameters for the inhomogeneous contact process.

A profile fixes, for every site ``n >= 0``, the probability ``p_up(n)`` that a
birth from ``n`` lands on ``n + 1`` and the death rate ``delta(n)``.  The
boundary rule ``p_up(0) = 1`` is forced for every family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FAMILIES",
    "ModelParams",
    "ProfileError",
    "RateProfile",
    "limit_ell",
    "make_profile",
    "profile_from_dict",
]

FAMILIES = ("homogeneous", "one_sided", "power", "tabulated")


class ProfileError(ValueError):
    """Raised for invalid profile parameters."""


def _sites(n):
    arr = np.asarray(n)
    if np.any(arr < 0):
        raise ValueError("site index must be non-negative")
    return arr


@dataclass(frozen=True)
class RateProfile:
    """Site-dependent birth direction and death rates.

    Immutable; safe to share between replicas.  ``p_up``, ``delta`` and
    ``ratio`` accept an int or an integer array.
    """

    kind: str
    params: tuple = ()
    p_table: tuple = ()
    d_table: tuple = ()
    declared_limit: float | None = field(default=None, compare=False)

    def p_up(self, n):
        n = _sites(n)
        if self.kind == "homogeneous":
            out = np.full(n.shape, float(self.params[0]))
        elif self.kind == "one_sided":
            out = np.ones(n.shape)
        elif self.kind == "power":
            a, _, c, _ = self.params
            out = np.minimum(1.0, c * (np.asarray(n, dtype=float) + 1.0) ** (-a))
        else:
            table = np.asarray(self.p_table, dtype=float)
            out = table[np.minimum(n, table.size - 1)]
        out = np.where(n == 0, 1.0, out)
        return float(out) if out.ndim == 0 else out

    def delta(self, n):
        n = _sites(n)
        if self.kind == "homogeneous":
            out = np.full(n.shape, float(self.params[1]))
        elif self.kind == "one_sided":
            out = np.ones(n.shape)
        elif self.kind == "power":
            _, b, _, d = self.params
            out = np.asarray(d * (np.asarray(n, dtype=float) + 1.0) ** (-b))
        else:
            table = np.asarray(self.d_table, dtype=float)
            out = table[np.minimum(n, table.size - 1)]
        return float(out) if out.ndim == 0 else out

    def ratio(self, n):
        """``p_up(n) / delta(n)``."""
        return np.divide(self.p_up(n), self.delta(n))

    def tables(self, size):
        """Arrays ``(p_up, p_down, delta)`` for sites ``0 .. size-1``."""
        n = np.arange(size)
        p = np.asarray(self.p_up(n), dtype=np.float64)
        p_down = 1.0 - p
        p_down[0] = 0.0
        return p, p_down, np.asarray(self.delta(n), dtype=np.float64)

    def ratio_bounds(self, n):
        """Exact ``(inf, sup)`` of ``ratio(k)`` over all ``k >= n``.

        Every family is eventually monotone in the ratio, so the extremes are
        attained on a finite head or approached by the limit.
        """
        n = int(n)
        if self.kind in ("homogeneous", "one_sided"):
            r = float(self.ratio(n))
            return r, r
        if self.kind == "tabulated":
            last = max(len(self.p_table), len(self.d_table))
            vals = np.atleast_1d(self.ratio(np.arange(n, max(n, last) + 1)))
            return float(vals.min()), float(vals.max())
        a, b, c, _ = self.params
        # non-decreasing while clamped, monotone after: extremes sit at n,
        # around the clamp exit, or at the limit
        cands = {n}
        lim = self.declared_limit
        extra = []
        if a > 0 and c > 1:
            log_exit = math.log(c) / a
            if log_exit < 40:
                exit_site = math.ceil(math.exp(log_exit)) - 1
                cands.update(k for k in (exit_site - 1, exit_site, exit_site + 1) if k >= n)
            else:
                # clamp outlasts any float-resolvable site: ratio is (k+1)^b / d there
                extra.append(1.0 / self.params[3] if b == 0 else math.inf)
        vals = np.array([float(self.ratio(k)) for k in sorted(cands)] + extra)
        return float(min(vals.min(), lim)), float(max(vals.max(), lim))

    def to_dict(self):
        if self.kind == "tabulated":
            return {"kind": "tabulated", "p": list(self.p_table), "delta": list(self.d_table)}
        return {"kind": self.kind, "params": list(self.params)}


def _check_p(p):
    if not (0.0 < p <= 1.0) or math.isnan(p):
        raise ProfileError(f"probability {p!r} outside (0, 1]")


def _check_d(d):
    if not (d > 0.0) or math.isinf(d):
        raise ProfileError(f"death rate {d!r} must be positive and finite")


def make_profile(kind, params=(), *, p=None, delta=None):
    """Build a :class:`RateProfile` of one of the built-in families.

    ``homogeneous(p, d)``, ``one_sided()``, ``power(a, b, c, d)`` with
    ``p_up(n) = min(1, c (n+1)^-a)`` and ``delta(n) = d (n+1)^-b``, or
    ``tabulated`` from explicit lists (pass ``p=`` and ``delta=``, or
    ``params=(p_list, d_list)``), extended by their last entry.
    """
    params = tuple(params)
    if kind == "homogeneous":
        if len(params) != 2:
            raise ProfileError("homogeneous takes (p, d)")
        pv, dv = (float(x) for x in params)
        _check_p(pv)
        _check_d(dv)
        return RateProfile("homogeneous", (pv, dv), declared_limit=pv / dv)
    if kind == "one_sided":
        if params:
            raise ProfileError("one_sided takes no parameters")
        return RateProfile("one_sided", (), declared_limit=1.0)
    if kind == "power":
        if len(params) != 4:
            raise ProfileError("power takes (a, b, c, d)")
        a, b, c, d = (float(x) for x in params)
        if a < 0 or b < 0:
            raise ProfileError("power exponents must be non-negative")
        if not c > 0 or math.isinf(c):
            raise ProfileError("power scale c must be positive and finite")
        _check_d(d)
        if a > b:
            lim = 0.0
        elif a < b:
            lim = math.inf
        else:
            lim = (min(1.0, c) if a == 0 else c) / d
        return RateProfile("power", (a, b, c, d), declared_limit=lim)
    if kind == "tabulated":
        if p is None and delta is None and len(params) == 2:
            p, delta = params
        if not p or not delta:
            raise ProfileError("tabulated needs non-empty p and delta tables")
        pt = [float(x) for x in p]
        dt = [float(x) for x in delta]
        for x in pt[1:]:
            _check_p(x)
        for x in dt:
            _check_d(x)
        pt[0] = 1.0
        return RateProfile("tabulated", (), tuple(pt), tuple(dt))
    raise ProfileError(f"unknown profile kind {kind!r}; expected one of {FAMILIES}")


def profile_from_dict(data):
    """Inverse of :meth:`RateProfile.to_dict`."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ProfileError("profile must be an object with a 'kind' key")
    kind = data["kind"]
    if kind == "tabulated":
        return make_profile("tabulated", p=data.get("p"), delta=data.get("delta"))
    return make_profile(kind, data.get("params", ()))


def limit_ell(profile, horizon=10_000, tol=1e-6):
    """Limit of ``p_up(n) / delta(n)``; ``None`` when it cannot be decided.

    Built-in families return their analytic limit.  Otherwise the ratio is
    examined on ``[horizon // 2, horizon]``.
    """
    if horizon < 10:
        raise ValueError("horizon must be >= 10")
    if profile.declared_limit is not None:
        return profile.declared_limit
    r = np.asarray(profile.ratio(np.arange(horizon // 2, horizon + 1)), dtype=float)
    mean = float(r.mean())
    if r.max() - r.min() < tol * (1.0 + abs(mean)):
        return mean
    steps = np.diff(r)
    if np.all(steps >= 0) and r.min() > 1.0 / tol:
        return math.inf
    if np.all(steps <= 0) and r.max() < tol:
        return 0.0
    return None


@dataclass(frozen=True)
class ModelParams:
    lam: float
    profile: RateProfile
    initial_site: int = 0

    def __post_init__(self):
        if not self.lam > 0 or math.isinf(self.lam):
            raise ValueError(f"lambda must be positive and finite, got {self.lam!r}")
        if int(self.initial_site) != self.initial_site or self.initial_site < 0:
            raise ValueError("initial_site must be a non-negative integer")
        object.__setattr__(self, "initial_site", int(self.initial_site))
