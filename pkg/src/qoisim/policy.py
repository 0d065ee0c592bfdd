"""Per-slot decisions: the separable quadratic policy and the max-weight baseline.

Every argmin breaks ties toward the smaller action value (or smaller format
index).  This is a repo convention; the analysis is indifferent to it.
"""
from __future__ import annotations

import enum
from numbers import Integral
from typing import Iterable, Sequence

from .model import DecisionVector, FormatOption, QueueVector, Scenario, SlotRealization


class PolicyKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    MAX_WEIGHT = "max_weight"

    @classmethod
    def parse(cls, text: "str | PolicyKind") -> "PolicyKind":
        if isinstance(text, PolicyKind):
            return text
        key = text.strip().lower().replace("-", "_")
        aliases = {"qd": "quadratic", "mw": "max_weight", "maxweight": "max_weight"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown policy {text!r}; expected quadratic or maxweight") from None

    @property
    def short(self) -> str:
        return "quadratic" if self is PolicyKind.QUADRATIC else "maxweight"


# ---------------------------------------------------------------------------
# Quadratic policy subproblems
# ---------------------------------------------------------------------------

def qd_select_format(K_n: int, options: Sequence[FormatOption], V: float) -> int:
    """Admission control: argmin over formats of ``(K + d)^2 - 2 V r``."""
    best_f, best_val = 0, None
    for f, opt in enumerate(options):
        val = (K_n + opt.data) ** 2 - 2.0 * V * opt.reward
        if best_val is None or val < best_val:
            best_f, best_val = f, val
    return best_f


def _halve(gap: int, low: int, high: int, cap: int) -> int:
    # minimizer of (high - x)^2 + (low + x)^2 over {0..cap}, gap = high - low
    if gap >= 2 * cap:
        return cap
    if gap <= 0:
        return 0
    lo, hi = gap // 2, -(-gap // 2)
    g = lambda x: (high - x) ** 2 + (low + x) ** 2  # noqa: E731
    return hi if g(hi) < g(lo) else lo


def qd_route_uplink(K_n: int, Q_n: int, s_q_max: int) -> int:
    """Uplink routing: minimize ``(K - s)^2 + (Q + s)^2`` over ``{0..s_q_max}``."""
    return _halve(K_n - Q_n, Q_n, K_n, s_q_max)


def qd_route_relay(K_n: int, J_n: int, s_j_max: int) -> int:
    """Relay routing: minimize ``(K - s)^2 + (J + s)^2`` over ``{0..s_j_max}``."""
    return _halve(K_n - J_n, J_n, K_n, s_j_max)


def _nearest(target: float, feasible: Iterable[int]) -> int:
    # smaller value wins on equal distance
    return min(sorted(set(feasible)), key=lambda x: abs(x - target))


def qd_allocate_uplink(Q_n: int, feasible: "int | Iterable[int]") -> int:
    """Closest feasible rate to ``Q_n``.

    ``feasible`` is either the best rate (meaning ``{0..best}``) or an explicit
    collection of rates.
    """
    if isinstance(feasible, Integral):
        return int(min(max(Q_n, 0), feasible))
    return _nearest(Q_n, feasible)


def qd_allocate_relay(J_n: int, Q_m: int, feasible: "int | Iterable[int]") -> int:
    """Relay allocation on link n -> m: minimize ``(J_n - a)^2 + (Q_m + a)^2``.

    For an explicit rate set the two feasible points nearest ``(J_n - Q_m)/2``
    are both evaluated.
    """
    if isinstance(feasible, Integral):
        return _halve(J_n - Q_m, Q_m, J_n, int(feasible))
    values = sorted(set(feasible))
    target = (J_n - Q_m) / 2
    first = _nearest(target, values)
    rest = [v for v in values if v != first]
    cands = [first] + ([_nearest(target, rest)] if rest else [])
    g = lambda x: (J_n - x) ** 2 + (Q_m + x) ** 2  # noqa: E731
    return min(sorted(cands), key=g)


def qd_decide(sc: Scenario, state: QueueVector, slot: SlotRealization, V: float) -> DecisionVector:
    n = sc.n_devices
    fmt = tuple(qd_select_format(state.K[i], slot.options[i], V) for i in range(n))
    s_q = tuple(qd_route_uplink(state.K[i], state.Q[i], int(sc.s_q_max[i])) for i in range(n))
    s_j = tuple(qd_route_relay(state.K[i], state.J[i], int(sc.s_j_max[i])) for i in range(n))
    u = tuple(qd_allocate_uplink(state.Q[i], slot.uplink_best[i]) for i in range(n))
    a = tuple(
        tuple(0 if m == i else qd_allocate_relay(state.J[i], state.Q[m], slot.relay_best[i][m])
              for m in range(n))
        for i in range(n))
    return DecisionVector(fmt, s_q, s_j, u, a)


# ---------------------------------------------------------------------------
# Max-weight baseline
# ---------------------------------------------------------------------------

def mw_select_format(K_n: int, options: Sequence[FormatOption], V: float) -> int:
    best_f, best_val = 0, None
    for f, opt in enumerate(options):
        val = K_n * opt.data - V * opt.reward
        if best_val is None or val < best_val:
            best_f, best_val = f, val
    return best_f


def mw_decide(sc: Scenario, state: QueueVector, slot: SlotRealization, V: float) -> DecisionVector:
    """Bang-bang minimizer of the linearized drift-plus-penalty bound.

    Each variable goes to its maximum when its weight is strictly favourable
    and to 0 otherwise (including on a zero weight).
    """
    n = sc.n_devices
    K, Q, J = state.K, state.Q, state.J
    fmt = tuple(mw_select_format(K[i], slot.options[i], V) for i in range(n))
    s_q = tuple(int(sc.s_q_max[i]) if K[i] > Q[i] else 0 for i in range(n))
    s_j = tuple(int(sc.s_j_max[i]) if K[i] > J[i] else 0 for i in range(n))
    u = tuple(slot.uplink_best[i] if Q[i] > 0 else 0 for i in range(n))
    a = tuple(
        tuple(slot.relay_best[i][m] if m != i and J[i] > Q[m] else 0 for m in range(n))
        for i in range(n))
    return DecisionVector(fmt, s_q, s_j, u, a)


def decide(kind: "PolicyKind | str", sc: Scenario, state: QueueVector, slot: SlotRealization,
           V: float | None = None) -> DecisionVector:
    kind = PolicyKind.parse(kind)
    V = sc.V if V is None else V
    if kind is PolicyKind.QUADRATIC:
        return qd_decide(sc, state, slot, V)
    return mw_decide(sc, state, slot, V)
