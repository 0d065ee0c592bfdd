"""Brute-force references for the test suite and the ``verify`` command.

Nothing here is on the control path.  Everything is deliberately naive:
joint enumeration instead of separation, grids instead of closed forms,
and exact rational arithmetic where inequalities are compared.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dynamics import admitted_data, resolve_actual, step_queues
from .lpsolver import LpInstance
from .model import (BLANK, ChannelSpec, DecisionVector, DeviceSpec, FormatOption, QueueVector, Scenario,
                    SlotRealization, reference_formats, sample_slot)

DEFAULT_BUDGET = 10 ** 7
CHUNK = 1 << 18


class OracleBudgetError(RuntimeError):
    """The requested enumeration exceeds the configured candidate budget."""


class InfeasibleGridError(RuntimeError):
    """No grid point satisfies the constraints."""


@dataclass(frozen=True)
class SmallInstanceCaps:
    max_queue: int = 12
    max_rate: int = 4
    max_devices: int = 3
    grid_step: float = 0.01
    budget: int = DEFAULT_BUDGET

    def check_state(self, state: QueueVector) -> None:
        n = len(state.K)
        if n > self.max_devices:
            raise OracleBudgetError(f"{n} devices exceed cap {self.max_devices}")
        if max(state.K + state.Q + state.J, default=0) > self.max_queue:
            raise OracleBudgetError(f"backlog exceeds cap {self.max_queue}")


# ---------------------------------------------------------------------------
# Joint decision
# ---------------------------------------------------------------------------

def joint_objective(state: QueueVector, slot: SlotRealization, dec: DecisionVector, V) -> Fraction:
    """Objective minimized by the quadratic policy, evaluated exactly."""
    K, Q, J = state.K, state.Q, state.J
    n = len(K)
    total = Fraction(0)
    for i in range(n):
        opt = slot.options[i][dec.format[i]]
        sq, sj, u = dec.s_q[i], dec.s_j[i], dec.u[i]
        acc = (K[i] - sq) ** 2 + (K[i] - sj) ** 2 + (K[i] + opt.data) ** 2
        acc += (Q[i] - u) ** 2 + (Q[i] + sq) ** 2 + (J[i] + sj) ** 2
        acc += sum((Q[i] + dec.a[m][i]) ** 2 for m in range(n))
        acc += sum((J[i] - dec.a[i][m]) ** 2 for m in range(n))
        total += acc - 2 * Fraction(V) * Fraction(opt.reward)
    return total


def _decision_key(dec: DecisionVector) -> tuple:
    return (dec.format, dec.s_q, dec.s_j, dec.u, tuple(v for row in dec.a for v in row))


def oracle_joint_decision(sc: Scenario, state: QueueVector, slot: SlotRealization, V: float, *,
                          uplink_set: Iterable[Sequence[int]] | None = None,
                          relay_set: Iterable[Sequence[Sequence[int]]] | None = None,
                          caps: SmallInstanceCaps = SmallInstanceCaps()) -> tuple[DecisionVector, Fraction]:
    """Global minimizer of :func:`joint_objective` by exhaustive enumeration.

    ``uplink_set`` (joint uplink rate vectors) and ``relay_set`` (joint N x N
    relay matrices) override the product-form sets ``{0..best}`` built from
    ``slot``; use them for coupled channels.  Ties resolve to the
    lexicographically smallest decision.
    """
    caps.check_state(state)
    n = sc.n_devices
    K, Q, J = (np.array(x, dtype=np.int64) for x in (state.K, state.Q, state.J))

    if uplink_set is None:
        U = np.array(list(itertools.product(*(range(b + 1) for b in slot.uplink_best))), dtype=np.int64)
    else:
        U = np.array(sorted({tuple(int(v) for v in u) for u in uplink_set}), dtype=np.int64).reshape(-1, n)
    if relay_set is None:
        pairs = [(i, m) for i in range(n) for m in range(n) if i != m]
        grids = itertools.product(*(range(slot.relay_best[i][m] + 1) for i, m in pairs))
        mats = []
        for combo in grids:
            a = np.zeros((n, n), dtype=np.int64)
            for (i, m), v in zip(pairs, combo):
                a[i, m] = v
            mats.append(a)
        A = np.array(mats, dtype=np.int64).reshape(-1, n, n)
    else:
        A = np.array(sorted({tuple(tuple(int(v) for v in row) for row in a) for a in relay_set}),
                     dtype=np.int64).reshape(-1, n, n)
        if np.any(A[:, np.arange(n), np.arange(n)] != 0):
            raise ValueError("relay_set contains a self-relay")

    n_fmt = [len(slot.options[i]) for i in range(n)]
    s_q_dom = [int(v) + 1 for v in sc.s_q_max]
    s_j_dom = [int(v) + 1 for v in sc.s_j_max]
    dims = n_fmt + s_q_dom + s_j_dom + [len(U), len(A)]
    size = int(np.prod(dims, dtype=object))
    if size > caps.budget:
        raise OracleBudgetError(f"{size} candidate actions exceed the budget of {caps.budget}")

    data = [np.array([o.data for o in slot.options[i]], dtype=np.int64) for i in range(n)]
    reward = [np.array([o.reward for o in slot.options[i]], dtype=float) for i in range(n)]

    best_val, kept = None, []
    for start in range(0, size, CHUNK):
        flat = np.arange(start, min(start + CHUNK, size))
        idx = np.unravel_index(flat, dims)
        f_idx, sq, sj = idx[:n], idx[n:2 * n], idx[2 * n:3 * n]
        u, a = U[idx[3 * n]], A[idx[3 * n + 1]]
        integer = np.zeros(len(flat), dtype=np.int64)
        penalty = np.zeros(len(flat))
        for i in range(n):
            d = data[i][f_idx[i]]
            integer += (K[i] - sq[i]) ** 2 + (K[i] - sj[i]) ** 2 + (K[i] + d) ** 2
            integer += (Q[i] - u[:, i]) ** 2 + (Q[i] + sq[i]) ** 2 + (J[i] + sj[i]) ** 2
            integer += ((Q[i] + a[:, :, i]) ** 2).sum(axis=1)
            integer += ((J[i] - a[:, i, :]) ** 2).sum(axis=1)
            penalty += reward[i][f_idx[i]]
        val = integer - 2.0 * V * penalty
        lo = val.min()
        # float screening; exact comparison happens below
        tol = 1e-9 * max(1.0, abs(lo))
        if best_val is None or lo < best_val - tol:
            best_val, kept = lo, []
        if lo <= best_val + tol:
            best_val = min(best_val, lo)
            kept.append(flat[val <= best_val + tol])

    def build(k: int) -> DecisionVector:
        idx = np.unravel_index(k, dims)
        a = A[idx[3 * n + 1]]
        return DecisionVector(tuple(int(v) for v in idx[:n]), tuple(int(v) for v in idx[n:2 * n]),
                              tuple(int(v) for v in idx[2 * n:3 * n]),
                              tuple(int(v) for v in U[idx[3 * n]]),
                              tuple(tuple(int(v) for v in row) for row in a))

    cands = [build(int(k)) for chunk in kept for k in chunk]
    scored = [(joint_objective(state, slot, d, V), _decision_key(d), d) for d in cands]
    obj, _, dec = min(scored, key=lambda s: (s[0], s[1]))
    return dec, obj


# ---------------------------------------------------------------------------
# LP references
# ---------------------------------------------------------------------------

def _grid(x_max: float, step: float) -> np.ndarray:
    g = np.arange(0.0, x_max, step)
    return np.append(g, x_max)


def oracle_lp_step(inst: LpInstance, Z, V: float, grid_step: float = 0.01,
                   budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Grid minimizer of ``sum_i [sum_j (Z_j + a_ji x_i)^2 - 2 V c_i x_i]``."""
    Z = np.asarray(Z, dtype=float)
    grids = [_grid(float(xm), grid_step) for xm in inst.x_max]
    if sum(len(g) for g in grids) > budget:
        raise OracleBudgetError("grid exceeds budget")
    x = np.empty(inst.n)
    for i, g in enumerate(grids):
        vals = ((Z[:, None] + inst.A[:, i][:, None] * g[None, :]) ** 2).sum(axis=0) - 2.0 * V * inst.c[i] * g
        x[i] = g[int(np.argmin(vals))]
    return x


@dataclass(frozen=True)
class LpOptimum:
    x: np.ndarray
    value: float
    method: str


def oracle_lp_solve(inst: LpInstance, grid_step: float | None = None, *, method: str = "auto",
                    budget: int = DEFAULT_BUDGET, tol: float = 1e-9) -> LpOptimum:
    """Maximize ``c . x`` over ``A x <= b``, ``0 <= x <= x_max``.

    ``method="grid"`` scans a feasible grid (n <= 3, gives a lower bound within
    the grid resolution).  ``method="vertex"`` enumerates every basic point of
    the polytope and is exact up to ``tol``; ``"auto"`` picks vertex.
    """
    if method == "auto":
        method = "vertex"
    if method == "grid":
        return _lp_grid(inst, 0.01 if grid_step is None else grid_step, budget)
    if method == "vertex":
        return _lp_vertex(inst, budget, tol)
    raise ValueError(f"unknown method {method!r}")


def _lp_grid(inst: LpInstance, step: float, budget: int) -> LpOptimum:
    if inst.n > 3:
        raise OracleBudgetError("grid solve supports n <= 3")
    grids = [_grid(float(xm), step) for xm in inst.x_max]
    size = int(np.prod([len(g) for g in grids]))
    if size > budget:
        raise OracleBudgetError(f"{size} grid points exceed the budget of {budget}")
    mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, inst.n)
    ok = np.all(mesh @ inst.A.T <= inst.b + 1e-12, axis=1)
    if not ok.any():
        raise InfeasibleGridError("no feasible grid point")
    vals = np.where(ok, mesh @ inst.c, -np.inf)
    k = int(np.argmax(vals))
    return LpOptimum(mesh[k], float(vals[k]), "grid")


def _lp_vertex(inst: LpInstance, budget: int, tol: float) -> LpOptimum:
    n = inst.n
    G = np.vstack([inst.A, np.eye(n), -np.eye(n)])
    h = np.concatenate([inst.b, inst.x_max, np.zeros(n)])
    rows = range(len(G))
    count = 0
    best_x, best_v = None, -np.inf
    for combo in itertools.combinations(rows, n):
        count += 1
        if count > budget:
            raise OracleBudgetError("vertex enumeration exceeds budget")
        sub = G[list(combo)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, h[list(combo)])
        if np.all(G @ x <= h + tol * (1 + np.abs(h))):
            v = float(inst.c @ x)
            if v > best_v:
                best_x, best_v = x, v
    if best_x is None:
        raise InfeasibleGridError("polytope is empty")
    return LpOptimum(np.clip(best_x, 0.0, inst.x_max), best_v, "vertex")


# ---------------------------------------------------------------------------
# Inequality checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QueueBoundTerms:
    lhs: Fraction
    quadratic: Fraction
    linear: Fraction
    C: Fraction
    C_prime: Fraction


def queue_bound_terms(x, a: Sequence, b: Sequence, a_caps=None, b_caps=None) -> QueueBoundTerms:
    """Exact evaluation of both sides of the two-link backlog inequality."""
    x = Fraction(x)
    a = [Fraction(v) for v in a]
    b = [Fraction(v) for v in b]
    am = [abs(v) for v in a] if a_caps is None else [Fraction(v) for v in a_caps]
    bm = [abs(v) for v in b] if b_caps is None else [Fraction(v) for v in b_caps]
    if x < 0 or any(v < 0 for v in b):
        raise ValueError("x and b must be non-negative")
    if len(am) != len(a) or len(bm) != len(b):
        raise ValueError("caps must match the lengths of a and b")
    if any(abs(v) > c for v, c in zip(a, am)) or any(v > c for v, c in zip(b, bm)):
        raise ValueError("a value exceeds its cap")
    C = 2 * (sum(am[i] * am[k] for i in range(len(am)) for k in range(i))
             + sum(bm[j] * bm[k] for j in range(len(bm)) for k in range(j))
             + sum(p * q for p in am for q in bm))
    C_prime = (sum(am) + sum(bm)) ** 2
    lhs = (max(x + sum(a), Fraction(0)) + sum(b)) ** 2 - x ** 2
    quad = sum((x + v) ** 2 for v in a) + sum((x + v) ** 2 for v in b) - (len(a) + len(b)) * x ** 2 + C
    lin = 2 * x * (sum(a) + sum(b)) + C_prime
    return QueueBoundTerms(lhs, quad, lin, C, C_prime)


def verify_lemma1(x, a: Sequence, b: Sequence, a_caps=None, b_caps=None) -> tuple[bool, bool]:
    """``(lhs <= quadratic, quadratic <= linear)``; caps default to ``|a_i|``, ``b_j``."""
    t = queue_bound_terms(x, a, b, a_caps, b_caps)
    return t.lhs <= t.quadratic, t.quadratic <= t.linear


@dataclass(frozen=True)
class DriftChain:
    """Drift-plus-penalty of one slot and its three successive upper bounds."""

    actual: Fraction
    pure: Fraction
    square: Fraction
    linear: Fraction

    @property
    def ordered(self) -> bool:
        return self.actual <= self.pure <= self.square <= self.linear


def _D(sc: Scenario, state: QueueVector, i: int) -> int:
    n = sc.n_devices
    sq, sj = int(sc.s_q_max[i]), int(sc.s_j_max[i])
    dm, um = sc.devices[i].d_max, int(sc.u_max[i])
    a_in = [int(v) for v in sc.a_max[:, i]]
    a_out = [int(v) for v in sc.a_max[i, :]]
    K, Q, J = state.K[i], state.Q[i], state.J[i]
    D = -3 * K ** 2 - (2 + n) * Q ** 2 - (1 + n) * J ** 2
    D += 2 * sq * sj + 2 * sq * dm + 2 * sj * dm
    D += 2 * um * sq + 2 * um * sum(a_in) + 2 * sq * sum(a_in)
    D += sum(a_in[m] * a_in[k] for m in range(n) for k in range(n) if k != m)
    D += 2 * sj * sum(a_out)
    D += sum(a_out[m] * a_out[k] for m in range(n) for k in range(n) if k != m)
    return D


def drift_bound_chain(sc: Scenario, state: QueueVector, slot: SlotRealization,
                      dec: DecisionVector, V) -> DriftChain:
    """Exact values of the one-slot drift-plus-penalty and its bounds for ``dec``."""
    n = sc.n_devices
    V = Fraction(V)
    K, Q, J = state.K, state.Q, state.J
    r = [Fraction(slot.options[i][dec.format[i]].reward) for i in range(n)]
    d = admitted_data(slot, dec)
    L = lambda s: Fraction(sum(k * k for k in s.K + s.Q + s.J), 2)  # noqa: E731

    nxt = step_queues(state, dec, resolve_actual(state, dec), d)
    actual = L(nxt) - L(state) - V * sum(r)

    pure = Fraction(0)
    square = Fraction(0)
    linear = Fraction(0)
    for i in range(n):
        a_in = sum(dec.a[m][i] for m in range(n))
        a_out = sum(dec.a[i])
        sq, sj, u = dec.s_q[i], dec.s_j[i], dec.u[i]
        pure += ((max(K[i] - sq - sj, 0) + d[i]) ** 2 - K[i] ** 2
                 + (max(Q[i] - u + sq, 0) + a_in) ** 2 - Q[i] ** 2
                 + max(J[i] - a_out + sj, 0) ** 2 - J[i] ** 2 - 2 * V * r[i])
        square += ((K[i] - sq) ** 2 + (K[i] - sj) ** 2 + (K[i] + d[i]) ** 2
                   + (Q[i] - u) ** 2 + (Q[i] + sq) ** 2
                   + sum((Q[i] + dec.a[m][i]) ** 2 for m in range(n))
                   + sum((J[i] - dec.a[i][m]) ** 2 for m in range(n))
                   + (J[i] + sj) ** 2 - 2 * V * r[i] + _D(sc, state, i))
        linear += (K[i] * (d[i] - sq - sj) + Q[i] * (sq + a_in - u)
                   + J[i] * (sj - a_out) - V * r[i])
    E = Fraction(0)
    for i in range(n):
        E += (int(sc.s_q_max[i]) + int(sc.s_j_max[i]) + sc.devices[i].d_max) ** 2
        E += (int(sc.s_q_max[i]) + int(sc.u_max[i]) + int(sc.a_max[:, i].sum())) ** 2
        E += (int(sc.s_j_max[i]) + int(sc.a_max[i, :].sum())) ** 2
    return DriftChain(actual, pure / 2, square / 2, linear + E / 2)



# ---------------------------------------------------------------------------
# Randomized suites (tests and the ``verify`` command)
# ---------------------------------------------------------------------------

SUITES = ("oracle", "lemma1", "lemma3", "drift")
ORACLE_V_VALUES = (0.0, 10.0, 800.0)
SUITE_CANDIDATE_CAP = 400_000   # keeps one oracle sample well under a second


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int
    failures: list

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def line(self) -> str:
        return f"{self.name}: {self.passed}/{self.total} passed"


def _uniform_channel(src: int, dst: int | None, top: int) -> ChannelSpec:
    rates = tuple(range(top + 1))
    return ChannelSpec(src, dst, rates, tuple([1.0 / len(rates)] * len(rates)))


def random_small_scenario(rng: np.random.Generator, n: int, max_rate: int = 4,
                          formats: Sequence[FormatOption] | None = None, V: float = 0.0) -> Scenario:
    """Uniform channels with caps in ``0..max_rate``; internal shift caps set to the
    smallest positive values the scenario invariants allow."""
    formats = tuple(reference_formats() if formats is None else formats)
    up = [int(rng.integers(0, max_rate + 1)) for _ in range(n)]
    rel = {(i, m): int(rng.integers(0, max_rate + 1)) for i in range(n) for m in range(n) if i != m}
    out = [sum(v for (s, _), v in rel.items() if s == i) for i in range(n)]
    devices = [DeviceSpec(i + 1, formats, max(up[i], 1), max(out[i], 1), float(rng.uniform(0.2, 1.0)))
               for i in range(n)]
    channels = [_uniform_channel(i + 1, None, up[i]) for i in range(n)]
    channels += [_uniform_channel(i + 1, m + 1, v) for (i, m), v in rel.items()]
    return Scenario(tuple(devices), tuple(channels), float(rng.uniform(0.2, 1.0)), V, 1000, 0)


def enumeration_size(sc: Scenario, slot: SlotRealization) -> int:
    n = sc.n_devices
    size = 1
    for i in range(n):
        size *= len(slot.options[i]) * (int(sc.s_q_max[i]) + 1) * (int(sc.s_j_max[i]) + 1)
        size *= slot.uplink_best[i] + 1
        size *= int(np.prod([slot.relay_best[i][m] + 1 for m in range(n) if m != i]))
    return size


def random_oracle_case(rng: np.random.Generator, caps: SmallInstanceCaps = SmallInstanceCaps(),
                       max_candidates: int = SUITE_CANDIDATE_CAP):
    """A random (scenario, state, slot, V) whose joint action space fits ``max_candidates``."""
    n = int(rng.integers(1, caps.max_devices + 1))
    while True:
        sc = random_small_scenario(rng, n, int(rng.integers(1, caps.max_rate + 1)))
        slot = sample_slot(sc, rng)
        if enumeration_size(sc, slot) > max_candidates:
            continue
        state = QueueVector(*(tuple(int(v) for v in rng.integers(0, caps.max_queue + 1, n)) for _ in range(3)))
        V = float(rng.choice(ORACLE_V_VALUES))
        return sc, state, slot, V


def _random_decision(rng, sc: Scenario, slot: SlotRealization) -> DecisionVector:
    n = sc.n_devices
    return DecisionVector(
        tuple(int(rng.integers(0, len(slot.options[i]))) for i in range(n)),
        tuple(int(rng.integers(0, sc.s_q_max[i] + 1)) for i in range(n)),
        tuple(int(rng.integers(0, sc.s_j_max[i] + 1)) for i in range(n)),
        tuple(int(rng.integers(0, slot.uplink_best[i] + 1)) for i in range(n)),
        tuple(tuple(0 if m == i else int(rng.integers(0, slot.relay_best[i][m] + 1)) for m in range(n))
              for i in range(n)))


def _random_formats(rng) -> tuple[FormatOption, ...]:
    k = int(rng.integers(1, 4))
    return (BLANK,) + tuple(FormatOption(float(rng.integers(1, 31)), int(rng.integers(1, 61))) for _ in range(k))


def _oracle_sample(rng):
    from .policy import qd_decide
    sc, state, slot, V = random_oracle_case(rng)
    dec = qd_decide(sc, state, slot, V)
    got = joint_objective(state, slot, dec, V)
    _, best = oracle_joint_decision(sc, state, slot, V)
    return got == best, (state, slot, V, got, best)


def _lemma1_sample(rng, mag: float = 100.0):
    x = rng.uniform(0, mag)
    a = rng.uniform(-mag, mag, int(rng.integers(0, 5)))
    b = rng.uniform(0, mag, int(rng.integers(0, 5)))
    a_caps = [rng.uniform(abs(v), mag) for v in a]
    b_caps = [rng.uniform(v, mag) for v in b]
    first, second = verify_lemma1(x, a.tolist(), b.tolist(), a_caps, b_caps)
    return first and second, (x, a.tolist(), b.tolist())


def _lemma3_sample(rng, horizon: int = 2000):
    from .simulator import run
    n = int(rng.integers(1, 4))
    base = random_small_scenario(rng, n, 6)
    devices = tuple(DeviceSpec(d.index, _random_formats(rng), d.s_q_max, d.s_j_max, d.observe_prob)
                    for d in base.devices)
    V = float(rng.choice([0.0, 1.0, 10.0, 100.0, 800.0]))
    sc = base.replace(devices=devices, V=V)
    res = run(sc, "quadratic", horizon=horizon, seed=int(rng.integers(0, 2 ** 31)))
    return res.metrics.bound_violations == 0, (sc, res.metrics.bound_violations)


def _drift_sample(rng):
    from .policy import qd_decide
    n = int(rng.integers(1, 4))
    sc = random_small_scenario(rng, n, 5)
    slot = sample_slot(sc, rng)
    state = QueueVector(*(tuple(int(v) for v in rng.integers(0, 40, n)) for _ in range(3)))
    V = float(rng.choice([0.0, 10.0, 800.0]))
    qd = qd_decide(sc, state, slot, V)
    hat = _random_decision(rng, sc, slot)
    c_qd = drift_bound_chain(sc, state, slot, qd, V)
    c_hat = drift_bound_chain(sc, state, slot, hat, V)
    ok = c_qd.ordered and c_hat.ordered and c_qd.square <= c_hat.square
    return ok, (state, slot, V, c_qd, c_hat)


_SAMPLERS = {"oracle": _oracle_sample, "lemma1": _lemma1_sample,
             "lemma3": _lemma3_sample, "drift": _drift_sample}


def run_suite(name: str, samples: int, seed: int = 0, keep_failures: int = 5) -> SuiteResult:
    if name not in _SAMPLERS:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng([seed, SUITES.index(name)])
    passed, failures = 0, []
    for _ in range(samples):
        ok, info = _SAMPLERS[name](rng)
        if ok:
            passed += 1
        elif len(failures) < keep_failures:
            failures.append(info)
    return SuiteResult(name, passed, samples, failures)


def lp_drift_bound_chain(inst: LpInstance, Z, x, V) -> tuple[Fraction, Fraction, Fraction]:
    """``(actual, quadratic, linear)`` one-iteration drift-plus-penalty of the LP
    iteration at queues ``Z`` and decision ``x``; each value bounds the previous."""
    Zf = [Fraction(float(v)) for v in Z]
    xf = [Fraction(float(v)) for v in x]
    A = [[Fraction(float(v)) for v in row] for row in inst.A]
    b = [Fraction(float(v)) for v in inst.b]
    c = [Fraction(float(v)) for v in inst.c]
    xm = [Fraction(float(v)) for v in inst.x_max]
    V = Fraction(V)
    m, n = inst.m, inst.n
    y0 = sum(ci * xi for ci, xi in zip(c, xf))
    load = [sum(A[j][i] * xf[i] for i in range(n)) for j in range(m)]
    nxt = [max(Zf[j] + load[j] - b[j], Fraction(0)) for j in range(m)]
    actual = sum(nxt[j] ** 2 - Zf[j] ** 2 for j in range(m)) / 2 - V * y0
    H = [2 * (sum(abs(A[j][i]) * abs(A[j][k]) * xm[i] * xm[k] for i in range(n) for k in range(i))
              + sum(abs(A[j][i]) * abs(b[j]) * xm[i] for i in range(n))) for j in range(m)]
    quad = sum(sum((Zf[j] + A[j][i] * xf[i]) ** 2 for j in range(m)) - 2 * V * c[i] * xf[i] for i in range(n)) / 2
    quad += sum((Zf[j] - b[j]) ** 2 - (n + 1) * Zf[j] ** 2 + H[j] for j in range(m)) / 2
    E = sum((sum(abs(A[j][i]) * xm[i] for i in range(n)) + abs(b[j])) ** 2 for j in range(m))
    linear = sum(Zf[j] * (load[j] - b[j]) for j in range(m)) - V * y0 + E
    return actual, quad, linear
