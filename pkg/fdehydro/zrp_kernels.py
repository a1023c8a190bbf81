"""Compiled event loops for the zero-range process.

All occupied sites ring at the same rate, so an event is: draw an exponential
holding time at rate (jump rate x |occupied|), pick an occupied site uniformly
from a dense array, pick a direction.  Swap-remove keeps the occupied set O(1).

The arrays passed in are owned by the caller and updated in place.  A kernel
always stops at t_target; the pending holding time is discarded, which is exact
because holding times are memoryless.
"""

import numpy as np
from numba import njit


@njit
def _remove_occupied(occ, pos, n_occ, x):
    i = pos[x]
    last = occ[n_occ - 1]
    occ[i] = last
    pos[last] = i
    pos[x] = -1
    return n_occ - 1


@njit
def _add_occupied(occ, pos, n_occ, x):
    occ[n_occ] = x
    pos[x] = n_occ
    return n_occ + 1


@njit
def build_occupied(counts):
    """Return (occ, pos, n_occ) for a count array."""
    n = counts.size
    occ = np.empty(n, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    n_occ = 0
    for x in range(n):
        if counts[x] > 0:
            occ[n_occ] = x
            pos[x] = n_occ
            n_occ += 1
    return occ, pos, n_occ


@njit
def _target(rng, x, n):
    if rng.random() < 0.5:
        return x - 1 if x > 0 else n - 1
    return x + 1 if x < n - 1 else 0


@njit
def advance(counts, occ, pos, n_occ, t, t_target, rate, rng):
    """Run the process from t to t_target.

    Returns:
        (n_occ, t_target, events)
    """
    n = counts.size
    events = 0
    while n_occ > 0:
        dt = rng.exponential(1.0 / (rate * n_occ))
        if t + dt > t_target:
            break
        t += dt
        x = occ[int(rng.random() * n_occ)]
        y = _target(rng, x, n)
        counts[x] -= 1
        if counts[x] == 0:
            n_occ = _remove_occupied(occ, pos, n_occ, x)
        if counts[y] == 0:
            n_occ = _add_occupied(occ, pos, n_occ, y)
        counts[y] += 1
        events += 1
    return n_occ, t_target, events


@njit
def advance_coupled(lower, upper, occ, pos, n_occ, t, t_target, rate, rng):
    """Run the basic coupling from t to t_target.

    occ/pos track the occupied sites of the upper copy.  A ring at x moves the
    upper particle, and the lower one too when the lower copy is occupied at x.

    Returns:
        (n_occ, t_target, events, violations)
    """
    n = upper.size
    events = 0
    violations = 0
    while n_occ > 0:
        dt = rng.exponential(1.0 / (rate * n_occ))
        if t + dt > t_target:
            break
        t += dt
        x = occ[int(rng.random() * n_occ)]
        y = _target(rng, x, n)
        if lower[x] > 0:
            lower[x] -= 1
            lower[y] += 1
        upper[x] -= 1
        if upper[x] == 0:
            n_occ = _remove_occupied(occ, pos, n_occ, x)
        if upper[y] == 0:
            n_occ = _add_occupied(occ, pos, n_occ, y)
        upper[y] += 1
        if lower[x] > upper[x]:
            violations += 1
        if lower[y] > upper[y]:
            violations += 1
        events += 1
    return n_occ, t_target, events, violations


@njit
def window_sums(counts, ell):
    """Return (B, G): particles and occupied sites in x+1..x+ell for every x."""
    n = counts.size
    block = np.zeros(n, dtype=np.int64)
    occupied = np.zeros(n, dtype=np.int64)
    for x in range(n):
        for i in range(1, ell + 1):
            z = (x + i) % n
            block[x] += counts[z]
            if counts[z] > 0:
                occupied[x] += 1
    return block, occupied


@njit
def _window_terms(f_value, count, block, occupied, ell, cutoff_mass):
    b = float(block)
    g = 1.0 if count > 0 else 0.0
    first = f_value * (g - b / (ell + b))
    if b <= cutoff_mass:
        second = f_value * (occupied / ell - b / (ell - 1.0 + b))
    else:
        second = 0.0
    return first, second


@njit
def window_terms(counts, f_values, block, occupied, ell, cutoff_mass):
    """Return per-window contributions of both one-block statistics."""
    n = counts.size
    first = np.empty(n, dtype=np.float64)
    second = np.empty(n, dtype=np.float64)
    for w in range(n):
        first[w], second[w] = _window_terms(
            f_values[w], counts[w], block[w], occupied[w], ell, cutoff_mass
        )
    return first, second


@njit
def _mark_windows(z, ell, n, stamp, marker, affected, m):
    for i in range(1, ell + 1):
        w = (z - i + n) % n
        if stamp[w] != marker:
            stamp[w] = marker
            affected[m] = w
            m += 1
    if stamp[z] != marker:
        stamp[z] = marker
        affected[m] = z
        m += 1
    return m


@njit
def advance_one_block(
    counts,
    occ,
    pos,
    n_occ,
    t,
    t_target,
    rate,
    rng,
    f_values,
    block,
    occupied,
    first,
    second,
    ell,
    cutoff_mass,
):
    """Run the process and integrate both one-block sums over [t, t_target].

    block/occupied/first/second are kept in step with counts; each event
    touches O(ell) windows.

    Returns:
        (n_occ, t_target, events, integral_first, integral_second,
         sum_first, sum_second)
    """
    n = counts.size
    sum_first = first.sum()
    sum_second = second.sum()
    integral_first = 0.0
    integral_second = 0.0
    stamp = np.zeros(n, dtype=np.int64)
    affected = np.empty(2 * ell + 2, dtype=np.int64)
    events = 0
    while True:
        if n_occ == 0:
            integral_first += sum_first * (t_target - t)
            integral_second += sum_second * (t_target - t)
            break
        dt = rng.exponential(1.0 / (rate * n_occ))
        if t + dt > t_target:
            integral_first += sum_first * (t_target - t)
            integral_second += sum_second * (t_target - t)
            break
        integral_first += sum_first * dt
        integral_second += sum_second * dt
        t += dt
        x = occ[int(rng.random() * n_occ)]
        y = _target(rng, x, n)

        marker = events + 1
        m = _mark_windows(x, ell, n, stamp, marker, affected, 0)
        m = _mark_windows(y, ell, n, stamp, marker, affected, m)
        for j in range(m):
            w = affected[j]
            sum_first -= first[w]
            sum_second -= second[w]

        counts[x] -= 1
        x_emptied = counts[x] == 0
        y_was_empty = counts[y] == 0
        counts[y] += 1
        if x_emptied:
            n_occ = _remove_occupied(occ, pos, n_occ, x)
        if y_was_empty:
            n_occ = _add_occupied(occ, pos, n_occ, y)
        for i in range(1, ell + 1):
            w = (x - i + n) % n
            block[w] -= 1
            if x_emptied:
                occupied[w] -= 1
            w = (y - i + n) % n
            block[w] += 1
            if y_was_empty:
                occupied[w] += 1

        for j in range(m):
            w = affected[j]
            first[w], second[w] = _window_terms(
                f_values[w], counts[w], block[w], occupied[w], ell, cutoff_mass
            )
            sum_first += first[w]
            sum_second += second[w]
        events += 1
    return (
        n_occ,
        t_target,
        events,
        integral_first,
        integral_second,
        sum_first,
        sum_second,
    )
