"""Compiled slot loop.

Mirrors ``policy.decide`` + ``dynamics.resolve_actual`` + ``dynamics.step_queues``
exactly (same tie rules, same float operation order); the test suite checks
trace equality against the pure-Python reference engine.
"""
import numpy as np
from numba import njit

QUADRATIC = 0
MAX_WEIGHT = 1


@njit(cache=True, nogil=True)
def _halve(gap, low, high, cap):
    if gap >= 2 * cap:
        return cap
    if gap <= 0:
        return 0
    lo = gap // 2
    hi = -((-gap) // 2)
    g_hi = (high - hi) ** 2 + (low + hi) ** 2
    g_lo = (high - lo) ** 2 + (low + lo) ** 2
    return hi if g_hi < g_lo else lo


@njit(cache=True, nogil=True)
def run_chunk(policy, V, event, observed, link_best,
              rewards, data, s_q_max, s_j_max, link_src, link_dst,
              K, Q, J, K_max, Q_max, burn_in, t0,
              y0_sums, backlog_sums, max_obs, violations,
              record, tr_y0, tr_K, tr_Q, tr_J, tr_sq, tr_sj, tr_fmt):
    T = event.shape[0]
    n = K.shape[0]
    F = rewards.shape[1]
    L = link_src.shape[0]
    ub = np.zeros(n, np.int64)
    rb = np.zeros((n, n), np.int64)
    fmt = np.zeros(n, np.int64)
    sq = np.zeros(n, np.int64)
    sj = np.zeros(n, np.int64)
    u = np.zeros(n, np.int64)
    a = np.zeros((n, n), np.int64)
    sq_act = np.zeros(n, np.int64)
    sj_act = np.zeros(n, np.int64)
    a_act = np.zeros((n, n), np.int64)
    d = np.zeros(n, np.int64)

    for t in range(T):
        ub[:] = 0
        rb[:, :] = 0
        for k in range(L):
            if link_dst[k] < 0:
                ub[link_src[k]] = link_best[t, k]
            else:
                rb[link_src[k], link_dst[k]] = link_best[t, k]

        y0 = 0.0
        for i in range(n):
            best_f = 0
            if observed[t, i]:
                best_val = 0.0
                for f in range(F):
                    if policy == QUADRATIC:
                        val = float((K[i] + data[i, f]) ** 2) - 2.0 * V * rewards[i, f]
                    else:
                        val = float(K[i] * data[i, f]) - V * rewards[i, f]
                    if f == 0 or val < best_val:
                        best_f = f
                        best_val = val
                d[i] = data[i, best_f]
                y0 += rewards[i, best_f]
            else:
                d[i] = 0
            fmt[i] = best_f

            if policy == QUADRATIC:
                sq[i] = _halve(K[i] - Q[i], Q[i], K[i], s_q_max[i])
                sj[i] = _halve(K[i] - J[i], J[i], K[i], s_j_max[i])
                u[i] = min(max(Q[i], 0), ub[i])
            else:
                sq[i] = s_q_max[i] if K[i] > Q[i] else 0
                sj[i] = s_j_max[i] if K[i] > J[i] else 0
                u[i] = ub[i] if Q[i] > 0 else 0

        for i in range(n):
            for m in range(n):
                if m == i:
                    a[i, m] = 0
                elif policy == QUADRATIC:
                    a[i, m] = _halve(J[i] - Q[m], Q[m], J[i], rb[i, m])
                else:
                    a[i, m] = rb[i, m] if J[i] > Q[m] else 0

        # record the start-of-slot state
        tg = t0 + t
        y0_sums[0] += y0
        if tg >= burn_in:
            y0_sums[1] += y0
        for i in range(n):
            backlog_sums[0, i] += K[i]
            backlog_sums[1, i] += Q[i]
            backlog_sums[2, i] += J[i]
            if tg >= burn_in:
                backlog_sums[3, i] += K[i] + Q[i] + J[i]
        if record:
            tr_y0[t] = y0
            for i in range(n):
                tr_K[t, i] = K[i]
                tr_Q[t, i] = Q[i]
                tr_J[t, i] = J[i]
                tr_sq[t, i] = sq[i]
                tr_sj[t, i] = sj[i]
                tr_fmt[t, i] = fmt[i]

        # actual transfers
        for i in range(n):
            sq_act[i] = min(K[i], sq[i])
            sj_act[i] = min(K[i] - sq_act[i], sj[i])
            budget = J[i] + sj_act[i]
            for m in range(n):
                take = min(budget, a[i, m])
                a_act[i, m] = take
                budget -= take

        # queue update
        for i in range(n):
            out_req = 0
            for m in range(n):
                out_req += a[i, m]
            K_new = max(K[i] - sq[i] - sj[i], 0) + d[i]
            J_new = max(J[i] - out_req + sj_act[i], 0)
            inc = 0
            for m in range(n):
                inc += a_act[m, i]
            Q_new = max(Q[i] - u[i] + sq_act[i], 0) + inc
            K[i] = K_new
            J[i] = J_new
            Q[i] = Q_new

        for i in range(n):
            if K[i] > K_max[i]:
                violations[0] += 1
            if J[i] > K_max[i]:
                violations[0] += 1
            if Q[i] > Q_max[i]:
                violations[0] += 1
            if K[i] > max_obs[0, i]:
                max_obs[0, i] = K[i]
            if Q[i] > max_obs[1, i]:
                max_obs[1, i] = Q[i]
            if J[i] > max_obs[2, i]:
                max_obs[2, i] = J[i]
