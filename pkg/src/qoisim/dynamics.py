"""Queue evolution and the deterministic backlog bounds of the quadratic policy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DecisionVector, QueueVector, Scenario, SlotRealization


@dataclass(frozen=True)
class ActualTransfers:
    """Data actually moved in one slot.

    ``u_act`` (actual uplink delivery, ``min(u, Q + s_q_act)``) is not needed
    by the queue update but makes conservation checks exact.
    """

    s_q_act: tuple[int, ...]
    s_j_act: tuple[int, ...]
    a_act: tuple[tuple[int, ...], ...]
    u_act: tuple[int, ...]


def resolve_actual(state: QueueVector, dec: DecisionVector) -> ActualTransfers:
    """Uplink-first internal moves; relay shortfalls filled by ascending destination."""
    n = len(state.K)
    s_q_act, s_j_act, a_act, u_act = [], [], [], []
    for i in range(n):
        sq = min(state.K[i], dec.s_q[i])
        sj = min(state.K[i] - sq, dec.s_j[i])
        s_q_act.append(sq)
        s_j_act.append(sj)
        budget = state.J[i] + sj
        row = []
        for m in range(n):
            take = min(budget, dec.a[i][m])
            row.append(take)
            budget -= take
        a_act.append(tuple(row))
        u_act.append(min(dec.u[i], state.Q[i] + sq))
    return ActualTransfers(tuple(s_q_act), tuple(s_j_act), tuple(a_act), tuple(u_act))


def admitted_data(slot: SlotRealization, dec: DecisionVector) -> tuple[int, ...]:
    return tuple(slot.options[i][f].data for i, f in enumerate(dec.format))


def slot_reward(slot: SlotRealization, dec: DecisionVector) -> float:
    y0 = 0.0
    for i, f in enumerate(dec.format):
        y0 += slot.options[i][f].reward
    return y0


def step_queues(state: QueueVector, dec: DecisionVector, act: ActualTransfers,
                admitted_d) -> QueueVector:
    n = len(state.K)
    K = [max(state.K[i] - dec.s_q[i] - dec.s_j[i], 0) + admitted_d[i] for i in range(n)]
    J = [max(state.J[i] - sum(dec.a[i]) + act.s_j_act[i], 0) for i in range(n)]
    Q = [max(state.Q[i] - dec.u[i] + act.s_q_act[i], 0) + sum(act.a_act[m][i] for m in range(n))
         for i in range(n)]
    return QueueVector(tuple(K), tuple(Q), tuple(J))


def requested_bounds(state: QueueVector, dec: DecisionVector) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Upper bounds on the next (J, Q) computed from requested quantities only."""
    n = len(state.K)
    J = tuple(max(state.J[i] - sum(dec.a[i]) + dec.s_j[i], 0) for i in range(n))
    Q = tuple(max(state.Q[i] - dec.u[i] + dec.s_q[i], 0) + sum(dec.a[m][i] for m in range(n))
              for i in range(n))
    return J, Q


@dataclass(frozen=True)
class BoundConstants:
    K_max: np.ndarray
    Q_max: np.ndarray
    E: float
    inadmissible: np.ndarray  # True where no format can ever be admitted at this V

    def violations(self, K, Q, J) -> int:
        K, Q, J = (np.asarray(x) for x in (K, Q, J))
        return int(np.sum(K > self.K_max) + np.sum(J > self.K_max) + np.sum(Q > self.Q_max))


def admission_thresholds(sc: Scenario, V: float | None = None) -> list[list[float]]:
    """Per device, ``(2 V r - d^2) / (2 d)`` for every non-blank format."""
    V = sc.V if V is None else V
    return [[(2.0 * V * f.reward - f.data ** 2) / (2.0 * f.data) for f in dev.formats[1:]]
            for dev in sc.devices]


def drift_constant(sc: Scenario) -> float:
    """Constant of the linearized drift-plus-penalty bound."""
    s_q, s_j, u_max, a_max = sc.s_q_max, sc.s_j_max, sc.u_max, sc.a_max
    total = 0.0
    for i, dev in enumerate(sc.devices):
        total += float(s_q[i] + s_j[i] + dev.d_max) ** 2
        total += float(s_q[i] + u_max[i] + a_max[:, i].sum()) ** 2
        total += float(s_j[i] + a_max[i, :].sum()) ** 2
    return 0.5 * total


def compute_bounds(sc: Scenario, V: float | None = None) -> BoundConstants:
    n = sc.n_devices
    K_max = np.zeros(n)
    flags = np.zeros(n, dtype=bool)
    for i, (dev, th) in enumerate(zip(sc.devices, admission_thresholds(sc, V))):
        top = max(th, default=-1.0)
        if top < 0:
            # nothing beyond the blank format is ever admitted: K stays at 0
            K_max[i] = dev.d_max
            flags[i] = True
        else:
            K_max[i] = top + dev.d_max
    Q_max = K_max.max() + sc.a_max.sum(axis=0) + sc.s_q_max
    return BoundConstants(K_max, Q_max, drift_constant(sc), flags)
