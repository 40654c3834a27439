"""Compiled inner loops of the event-driven simulator.

Health codes: 0 = S, 1 = I, 2 = Q. Group 1 is vaccinated (index < n_v),
group 0 is not; ``counts[3 * g + h]`` follows the trajectory column order.
Randomness comes from a caller-filled buffer of uniforms on [0, 1); a call
returns ``NEED_RNG`` when fewer than ``RESERVE`` values remain.

``prm`` layout: lam_n, lam_v, pq_n, pq_v, sigma_n, sigma_v, theta, beta, tau.
"""

import numpy as np
from numba import njit

S, I, Q = 0, 1, 2
ACTIVATION, RECOVERY, TESTING = 0, 1, 2

RUNNING, NEED_RNG, HORIZON, EXTINCT, MAX_EVENTS = 0, 1, 2, 3, 4
RESERVE = 12

BB_COMPLETE, BB_CSR = 0, 1


@njit(cache=True, nogil=True)
def _pick(u, m):
    i = int(u * m)
    return m - 1 if i >= m else i


@njit(cache=True, nogil=True)
def _list_add(j, lst, pos, sizes, which):
    pos[j] = sizes[which]
    lst[sizes[which]] = j
    sizes[which] += 1


@njit(cache=True, nogil=True)
def _list_remove(j, lst, pos, sizes, which):
    p = pos[j]
    last = lst[sizes[which] - 1]
    lst[p] = last
    pos[last] = p
    pos[j] = -1
    sizes[which] -= 1


@njit(cache=True, nogil=True)
def set_health(j, new, n_v, health, counts, inf_list, inf_pos, sick_list, sick_pos, sizes):
    old = health[j]
    if old == new:
        return
    g = 1 if j < n_v else 0
    counts[3 * g + old] -= 1
    counts[3 * g + new] += 1
    if old == I:
        _list_remove(j, inf_list, inf_pos, sizes, 0)
    if new == I:
        _list_add(j, inf_list, inf_pos, sizes, 0)
    if old == S:
        _list_add(j, sick_list, sick_pos, sizes, 1)
    elif new == S:
        _list_remove(j, sick_list, sick_pos, sizes, 1)
    health[j] = new


@njit(cache=True, nogil=True)
def draw_event(u, k, n, n_v, health, prm, sizes, inf_list, sick_list,
               bb_mode, indptr, indices, bound):
    """Draw one event without applying it.

    Returns ``(k, dt, kind, initiator, partner, target, new_state)``; a
    ``target`` of -1 means the event leaves every health state unchanged.
    """
    n_i = sizes[0]
    n_iq = sizes[1]
    beta = prm[7]
    tau = prm[8]
    rate = n + beta * n_iq + tau * n_i
    dt = -np.log(1.0 - u[k]) / rate
    x = u[k + 1] * rate
    k += 2

    if x < n or n_iq == 0:
        j = _pick(u[k], n)
        k += 1
        if health[j] == Q:
            return k, dt, ACTIVATION, j, -1, -1, -1
        gj = j < n_v
        same = u[k] < prm[6]
        k += 1
        if bb_mode == BB_COMPLETE:
            if same:
                lo = 0 if gj else n_v
                hi = n_v if gj else n
                m = hi - lo - 1
                if m <= 0:
                    k += 1
                    return k, dt, ACTIVATION, j, -1, -1, -1
                kk = lo + _pick(u[k], m)
            else:
                kk = _pick(u[k], n - 1)
            if kk >= j:
                kk += 1
        else:
            if same:
                if gj:
                    lo = indptr[j]
                    hi = bound[j]
                else:
                    lo = bound[j]
                    hi = indptr[j + 1]
            else:
                lo = indptr[j]
                hi = indptr[j + 1]
            m = hi - lo
            if m == 0:
                k += 1
                return k, dt, ACTIVATION, j, -1, -1, -1
            kk = indices[lo + _pick(u[k], m)]
        k += 1

        hj = health[j]
        hk = health[kk]
        if hk == Q or hj == hk:
            return k, dt, ACTIVATION, j, kk, -1, -1
        if hj == S:
            s = j
            i = kk
        else:
            s = kk
            i = j
        sigma = prm[5] if i < n_v else prm[4]
        blocked = u[k] < sigma
        k += 1
        if blocked:
            return k, dt, ACTIVATION, j, kk, -1, -1
        vacc = s < n_v
        lam = prm[1] if vacc else prm[0]
        infected = u[k] < lam
        k += 1
        if not infected:
            return k, dt, ACTIVATION, j, kk, -1, -1
        pq = prm[3] if vacc else prm[2]
        new = Q if u[k] < pq else I
        k += 1
        return k, dt, ACTIVATION, j, kk, s, new

    if x < n + beta * n_iq or n_i == 0:
        who = sick_list[_pick(u[k], n_iq)]
        k += 1
        return k, dt, RECOVERY, who, -1, who, S

    who = inf_list[_pick(u[k], n_i)]
    k += 1
    return k, dt, TESTING, who, -1, who, Q


@njit(cache=True, nogil=True)
def advance(u, k, t, t_end, max_events, stop_on_extinction,
            n, n_v, health, counts, prm, sizes, inf_list, inf_pos, sick_list, sick_pos,
            bb_mode, indptr, indices, bound, sample_times, samples, si, last):
    """Run events until the horizon, extinction, ``max_events`` or a drained buffer.

    Samples at ``sample_times[si:]`` are written with the state holding at that
    instant (right-continuous). ``last`` receives the most recent event record:
    time, kind, initiator, partner, target, old state, new state.
    Returns ``(status, t, k, si)``.
    """
    events = 0
    n_samples = sample_times.shape[0]
    while True:
        if stop_on_extinction and sizes[1] == 0:
            return EXTINCT, t, k, si
        if u.shape[0] - k < RESERVE:
            return NEED_RNG, t, k, si
        k, dt, kind, initiator, partner, target, new = draw_event(
            u, k, n, n_v, health, prm, sizes, inf_list, sick_list,
            bb_mode, indptr, indices, bound)
        t_next = t + dt
        while si < n_samples and sample_times[si] < t_next and sample_times[si] <= t_end:
            for c in range(6):
                samples[si, c] = counts[c]
            si += 1
        if t_next > t_end:
            return HORIZON, t_end, k, si
        old = -1
        if target >= 0:
            old = health[target]
            set_health(target, new, n_v, health, counts, inf_list, inf_pos,
                       sick_list, sick_pos, sizes)
        t = t_next
        last[0] = t
        last[1] = kind
        last[2] = initiator
        last[3] = partner
        last[4] = target
        last[5] = old
        last[6] = new
        events += 1
        if events >= max_events:
            return MAX_EVENTS, t, k, si


@njit(cache=True, nogil=True)
def sample_frozen(u, k, n_trials, n, n_v, health, prm, sizes, inf_list, sick_list,
                  bb_mode, indptr, indices, bound, to_i, to_q, partner_groups):
    """Draw ``n_trials`` independent next-events from one frozen configuration.

    Tallies per-individual S->I and S->Q outcomes and, for activations, the
    (initiator group, partner group) pairs. Returns ``(done, k)``.
    """
    done = 0
    while done < n_trials:
        if u.shape[0] - k < RESERVE:
            return done, k
        k, dt, kind, initiator, partner, target, new = draw_event(
            u, k, n, n_v, health, prm, sizes, inf_list, sick_list,
            bb_mode, indptr, indices, bound)
        if kind == ACTIVATION:
            if partner >= 0:
                gi = 1 if initiator < n_v else 0
                gp = 1 if partner < n_v else 0
                partner_groups[gi, gp] += 1
            if target >= 0 and health[target] == S:
                if new == I:
                    to_i[target] += 1
                else:
                    to_q[target] += 1
        done += 1
    return done, k
