"""Event loops for the exact simulations.

Each kernel draws from a ``numpy.random.Generator`` passed in by the caller,
so a seed fixes the trajectory regardless of backend (see ``_accel``).

Site selection uses a sum tree over per-site total rates; internal nodes are
always recomputed from their children, so the tree never accumulates
cancellation error and is reproducible when it is regrown.

``OVERFLOW`` means the rate tables are too short.  The contact kernel
returns it with the state intact and the caller regrows and resumes; the
other kernels are rerun from the same seed with longer tables.  Either way
the trajectory does not depend on the table length.
"""
import numpy as np

from ._accel import kernel

RUNNING = -1
EXTINCT = 0
ALIVE = 1
ESCAPED = 2
OVERFLOW = 3
TRACE_FULL = 4

DEATH = 0
BIRTH = 1


def tree_capacity(size):
    cap = 1
    while cap < size:
        cap *= 2
    return cap


@kernel
def tree_set(tree, cap, i, w):
    j = i + cap
    tree[j] = w
    j >>= 1
    while j >= 1:
        tree[j] = tree[2 * j] + tree[2 * j + 1]
        j >>= 1


@kernel
def tree_rebuild(tree, cap):
    for j in range(cap - 1, 0, -1):
        tree[j] = tree[2 * j] + tree[2 * j + 1]


@kernel
def tree_find(tree, cap, u):
    """Leaf index whose cumulative weight bracket holds ``u``, and the residual."""
    j = 1
    while j < cap:
        left = tree[2 * j]
        if u < left or tree[2 * j + 1] <= 0.0:
            if u >= left:
                u = left
            j = 2 * j
        else:
            u -= left
            j = 2 * j + 1
    return j - cap, u


@kernel
def _cp_weight(n, occ, p_up, p_down, delta, lam):
    if occ[n] == 0:
        return 0.0
    w = delta[n]
    if occ[n + 1] == 0:
        w += lam * p_up[n]
    if n >= 1 and occ[n - 1] == 0:
        w += lam * p_down[n]
    return w


@kernel
def _cp_refresh(i, occ, tree, cap, p_up, p_down, delta, lam):
    lo = i - 1 if i >= 1 else 0
    for n in range(lo, i + 2):
        tree_set(tree, cap, n, _cp_weight(n, occ, p_up, p_down, delta, lam))


@kernel
def contact_init(x0, occ, tree, cap, p_up, p_down, delta, lam, istate):
    occ[x0] = 1
    _cp_refresh(x0, occ, tree, cap, p_up, p_down, delta, lam)
    istate[0] = 0  # events
    istate[1] = x0  # max_right
    istate[2] = 1  # occupied count


@kernel
def contact_advance(occ, tree, cap, p_up, p_down, delta, lam, horizon, rmax, rng,
                    tstate, istate, record, rec_time, rec_kind, rec_site):
    """Run the contact process until it ends, overflows, or the record fills.

    ``tstate[0]`` is the clock; ``istate`` holds events, max_right and the
    occupied count.  ``occ`` is one longer than the rate tables.  Returns a
    status code and the number of recorded events.
    """
    size = p_up.shape[0]
    n_rec = 0
    rec_cap = rec_time.shape[0]
    while True:
        if record and n_rec >= rec_cap:
            return TRACE_FULL, n_rec
        total = tree[1]
        t = tstate[0] + rng.exponential(1.0) / total
        if t > horizon:
            tstate[0] = horizon
            return ALIVE, n_rec
        u = rng.random() * total
        site, u = tree_find(tree, cap, u)
        d = delta[site]
        right = lam * p_up[site] if occ[site + 1] == 0 else 0.0
        left = lam * p_down[site] if (site >= 1 and occ[site - 1] == 0) else 0.0
        if u < d or (right <= 0.0 and left <= 0.0):
            kind = DEATH
            target = site
        else:
            u -= d
            kind = BIRTH
            if right > 0.0 and (u < right or left <= 0.0):
                target = site + 1
            else:
                target = site - 1
        tstate[0] = t
        istate[0] += 1
        if record:
            rec_time[n_rec] = t
            rec_kind[n_rec] = kind
            rec_site[n_rec] = target
            n_rec += 1
        if kind == DEATH:
            occ[target] = 0
            istate[2] -= 1
            _cp_refresh(target, occ, tree, cap, p_up, p_down, delta, lam)
            if istate[2] == 0:
                return EXTINCT, n_rec
        else:
            occ[target] = 1
            istate[2] += 1
            _cp_refresh(target, occ, tree, cap, p_up, p_down, delta, lam)
            if target > istate[1]:
                istate[1] = target
                if rmax > 0 and target >= rmax:
                    return ESCAPED, n_rec
            if target >= size - 2:
                # event applied; caller regrows the tables before resuming
                return OVERFLOW, n_rec


@kernel
def front_chain_run(b, d, start, horizon, rmax, rng, count, up_counts, down_counts):
    """Birth-death chain with death at state 0 absorbing.

    Returns ``(status, time, max_right, events)``.
    """
    size = b.shape[0]
    n = start
    t = 0.0
    events = 0
    max_right = start
    while True:
        rate = b[n] + d[n]
        t += rng.exponential(1.0) / rate
        if t > horizon:
            return ALIVE, horizon, max_right, events
        events += 1
        if rng.random() * rate < b[n]:
            if count:
                up_counts[n] += 1
            n += 1
            if n >= size - 1:
                return OVERFLOW, t, max_right, events
            if n > max_right:
                max_right = n
                if rmax > 0 and n >= rmax:
                    return ESCAPED, t, max_right, events
        else:
            if count:
                down_counts[n] += 1
            if n == 0:
                return EXTINCT, t, max_right, events
            n -= 1


@kernel
def coupled_run_kernel(p_up, delta, lam, x0, horizon, rmax, rng, up_counts, down_counts, out):
    """Contact process ``eta`` and front process ``xi`` on shared clocks.

    Every site ``n <= r`` (the xi front) carries a death clock at rate
    ``delta[n]`` and right/left birth arrows at rates ``lam*p_up[n]`` and
    ``lam*(1-p_up[n])``.  ``eta`` uses all clocks at its occupied sites; xi
    uses only the death clock and right arrow at ``r``.

    ``out`` (int64, length 7) receives eta status, eta max_right, eta events,
    xi status, xi max_right, xi events, domination violations.  Returns
    ``(code, eta_time, xi_time)`` where code is OVERFLOW or 0.
    """
    size = p_up.shape[0]
    cap = 1
    while cap < size:
        cap *= 2
    tree = np.zeros(2 * cap)
    occ = np.zeros(size + 1, np.uint8)
    occ[x0] = 1
    for n in range(x0 + 1):
        tree_set(tree, cap, n, delta[n] + lam)
    r = x0
    xi_alive = True
    eta_count = 1
    eta_max = x0
    eta_status = RUNNING
    xi_status = RUNNING
    eta_time = 0.0
    xi_time = 0.0
    eta_events = 0
    xi_events = 0
    eta_right = x0
    xi_right = x0
    violations = 0
    t = 0.0
    while eta_status == RUNNING or xi_status == RUNNING:
        total = tree[1]
        if total <= 0.0:
            break
        t += rng.exponential(1.0) / total
        if t > horizon:
            break
        u = rng.random() * total
        site, u = tree_find(tree, cap, u)
        dn = delta[site]
        if u < dn:
            # death clock at site
            if occ[site] == 1:
                occ[site] = 0
                eta_count -= 1
                eta_events += 1
                if site == eta_max:
                    while eta_max >= 0 and occ[eta_max] == 0:
                        eta_max -= 1
                if eta_count == 0 and eta_status == RUNNING:
                    eta_status = EXTINCT
                    eta_time = t
            if xi_alive and site == r:
                xi_events += 1
                if down_counts.shape[0] > r:
                    down_counts[r] += 1
                tree_set(tree, cap, r, 0.0)
                if r == 0:
                    xi_alive = False
                    if xi_status == RUNNING:
                        xi_status = EXTINCT
                        xi_time = t
                else:
                    r -= 1
        else:
            u -= dn
            if u < lam * p_up[site] or p_up[site] >= 1.0:
                target = site + 1
            else:
                target = site - 1
            if target >= size - 1:
                return OVERFLOW, 0.0, 0.0
            if occ[site] == 1 and occ[target] == 0:
                occ[target] = 1
                eta_count += 1
                eta_events += 1
                if target > eta_max:
                    eta_max = target
                if target > eta_right:
                    eta_right = target
                    if rmax > 0 and target >= rmax and eta_status == RUNNING:
                        eta_status = ESCAPED
                        eta_time = t
            if xi_alive and site == r and target == r + 1:
                xi_events += 1
                if up_counts.shape[0] > r:
                    up_counts[r] += 1
                r += 1
                tree_set(tree, cap, r, delta[r] + lam)
                if r > xi_right:
                    xi_right = r
                    if rmax > 0 and r >= rmax and xi_status == RUNNING:
                        xi_status = ESCAPED
                        xi_time = t
        # domination: eta is inside [0, r] while xi lives, empty once xi is dead
        if xi_alive:
            if eta_max > r:
                violations += 1
        elif eta_count > 0:
            violations += 1
    if eta_status == RUNNING:
        eta_status = ALIVE
        eta_time = horizon
    if xi_status == RUNNING:
        xi_status = ALIVE
        xi_time = horizon
    out[0] = eta_status
    out[1] = eta_right
    out[2] = eta_events
    out[3] = xi_status
    out[4] = xi_right
    out[5] = xi_events
    out[6] = violations
    return 0, eta_time, xi_time


@kernel
def monotone_run_kernel(p_up, delta, lams, x0, horizon, rmax, rng,
                        status, times, max_right, events):
    """Contact processes for increasing ``lams`` driven by one graphical construction.

    Birth arrows fire at rate ``lams[-1]*p`` and carry a uniform mark; the
    process with rate ``lams[g]`` accepts the arrow iff
    ``mark * lams[-1] < lams[g]``.  Deaths are shared.  Returns
    ``(code, violations)``; violations count sites where a smaller-lambda
    process is occupied but a larger one is not.
    """
    size = p_up.shape[0]
    G = lams.shape[0]
    top = G - 1
    lam_top = lams[top]
    cap = 1
    while cap < size:
        cap *= 2
    tree = np.zeros(2 * cap)
    occ = np.zeros((G, size + 1), np.uint8)
    count = np.zeros(G, np.int64)
    for g in range(G):
        occ[g, x0] = 1
        count[g] = 1
        status[g] = RUNNING
        times[g] = 0.0
        max_right[g] = x0
        events[g] = 0
    tree_set(tree, cap, x0, delta[x0] + lam_top)
    undecided = G
    violations = 0
    t = 0.0
    while undecided > 0:
        total = tree[1]
        if total <= 0.0:
            break
        t += rng.exponential(1.0) / total
        if t > horizon:
            break
        u = rng.random() * total
        site, u = tree_find(tree, cap, u)
        dn = delta[site]
        if u < dn:
            changed = site
            for g in range(G):
                if occ[g, site] == 1:
                    occ[g, site] = 0
                    count[g] -= 1
                    events[g] += 1
                    if count[g] == 0 and status[g] == RUNNING:
                        status[g] = EXTINCT
                        times[g] = t
                        undecided -= 1
            tree_set(tree, cap, site, 0.0)
        else:
            u -= dn
            if u < lam_top * p_up[site] or p_up[site] >= 1.0:
                target = site + 1
            else:
                target = site - 1
            if target >= size - 1:
                return OVERFLOW, violations
            changed = target
            mark = rng.random() * lam_top
            for g in range(G):
                if (g == top or mark < lams[g]) and occ[g, site] == 1 and occ[g, target] == 0:
                    occ[g, target] = 1
                    count[g] += 1
                    events[g] += 1
                    if target > max_right[g]:
                        max_right[g] = target
                        if rmax > 0 and target >= rmax and status[g] == RUNNING:
                            status[g] = ESCAPED
                            times[g] = t
                            undecided -= 1
            if occ[top, target] == 1:
                tree_set(tree, cap, target, delta[target] + lam_top)
        for g in range(top):
            if occ[g, changed] > occ[g + 1, changed]:
                violations += 1
    for g in range(G):
        if status[g] == RUNNING:
            if count[g] == 0:
                status[g] = EXTINCT
                times[g] = t
            else:
                status[g] = ALIVE
                times[g] = horizon
    return 0, violations
