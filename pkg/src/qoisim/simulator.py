"""Slotted main loop, run metrics, V sweeps and CSV emission.

Each slot: sample the randomness, decide, resolve actual transfers, update
queues, record.  Two engines run the identical loop: ``"fast"`` (compiled,
used by default) and ``"reference"`` (plain Python over the ``policy`` and
``dynamics`` functions, used to cross-check the compiled one).
"""
from __future__ import annotations

import csv
import io
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernel
from .dynamics import BoundConstants, admitted_data, compute_bounds, resolve_actual, slot_reward, step_queues
from .model import QueueVector, Scenario, make_rng, realization, sample_block
from .policy import PolicyKind, decide

CHUNK = 1 << 16
MOVING_AVERAGE_WINDOW = 500

SUMMARY_HEADER = ["policy", "V", "seed", "avg_y0", "avg_backlog_total",
                  "max_K", "max_Q", "max_J", "bound_violations"]


class BoundViolationWarning(RuntimeWarning):
    """The quadratic policy exceeded its deterministic backlog bounds (a bug)."""


@dataclass(frozen=True)
class SlotTrace:
    slot: int
    y0: float
    K: tuple[int, ...]
    Q: tuple[int, ...]
    J: tuple[int, ...]
    s_q: tuple[int, ...]
    s_j: tuple[int, ...]
    format: tuple[int, ...]


@dataclass
class Trace:
    """Per-slot record; queue columns hold the state at the start of each slot."""

    y0: np.ndarray
    K: np.ndarray
    Q: np.ndarray
    J: np.ndarray
    s_q: np.ndarray
    s_j: np.ndarray
    format: np.ndarray

    @classmethod
    def empty(cls, T: int, n: int) -> "Trace":
        z = lambda: np.zeros((T, n), dtype=np.int64)  # noqa: E731
        return cls(np.zeros(T), z(), z(), z(), z(), z(), z())

    def __len__(self):
        return len(self.y0)

    def __getitem__(self, t: int) -> SlotTrace:
        row = lambda a: tuple(int(v) for v in a[t])  # noqa: E731
        return SlotTrace(t, float(self.y0[t]), row(self.K), row(self.Q), row(self.J),
                         row(self.s_q), row(self.s_j), row(self.format))

    @property
    def backlog_total(self) -> np.ndarray:
        return self.K.sum(axis=1) + self.Q.sum(axis=1) + self.J.sum(axis=1)


@dataclass(frozen=True)
class RunMetrics:
    policy: str
    V: float
    seed: int
    horizon: int
    burn_in: int
    avg_y0: float
    avg_y0_after_burn_in: float
    avg_backlog: np.ndarray          # (3, N): rows K, Q, J
    avg_backlog_total: float
    avg_backlog_total_after_burn_in: float
    max_observed: np.ndarray         # (3, N), over slots 0..T inclusive
    bound_violations: int
    final_state: QueueVector

    def summary_row(self) -> list:
        mx = self.max_observed
        return [self.policy, _fmt(self.V), self.seed, _fmt(self.avg_y0), _fmt(self.avg_backlog_total),
                int(mx[0].max()), int(mx[1].max()), int(mx[2].max()), self.bound_violations]


@dataclass
class RunResult:
    metrics: RunMetrics
    trace: Trace | None
    bounds: BoundConstants


def _fmt(x: float) -> str:
    return repr(float(x))


def run(sc: Scenario, kind: "PolicyKind | str", *, trace: bool = False,
        initial: QueueVector | None = None, burn_in: int = 0, horizon: int | None = None,
        V: float | None = None, seed: int | None = None, engine: str = "fast") -> RunResult:
    """Simulate ``horizon`` slots of one (scenario, policy) pair."""
    kind = PolicyKind.parse(kind)
    V = sc.V if V is None else float(V)
    seed = sc.seed if seed is None else int(seed)
    T = sc.horizon if horizon is None else int(horizon)
    n = sc.n_devices
    state0 = initial if initial is not None else QueueVector.zeros(n)
    bounds = compute_bounds(sc, V)
    rng = make_rng(seed)

    if engine == "fast":
        out = _run_fast(sc, kind, V, T, state0, bounds, rng, burn_in, trace)
    elif engine == "reference":
        out = _run_reference(sc, kind, V, T, state0, bounds, rng, burn_in, trace)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    y0_sums, backlog_sums, max_obs, violations, final, tr = out

    denom = max(T, 1)
    denom_b = max(T - burn_in, 1)
    metrics = RunMetrics(
        policy=kind.short, V=V, seed=seed, horizon=T, burn_in=burn_in,
        avg_y0=float(y0_sums[0]) / denom,
        avg_y0_after_burn_in=float(y0_sums[1]) / denom_b,
        avg_backlog=backlog_sums[:3] / denom,
        avg_backlog_total=float(backlog_sums[:3].sum()) / denom,
        avg_backlog_total_after_burn_in=float(backlog_sums[3].sum()) / denom_b,
        max_observed=max_obs,
        bound_violations=violations,
        final_state=final,
    )
    if kind is PolicyKind.QUADRATIC and violations and bounds.violations(state0.K, state0.Q, state0.J) == 0:
        warnings.warn(f"quadratic policy exceeded deterministic backlog bounds {violations} times "
                      f"(V={V}, seed={seed})", BoundViolationWarning, stacklevel=2)
    return RunResult(metrics, tr, bounds)


def _run_fast(sc, kind, V, T, state0, bounds, rng, burn_in, want_trace):
    n = sc.n_devices
    rewards, data = sc.format_table
    link_src, link_dst, _, _ = sc.link_tables
    K = np.array(state0.K, dtype=np.int64)
    Q = np.array(state0.Q, dtype=np.int64)
    J = np.array(state0.J, dtype=np.int64)
    y0_sums = np.zeros(2)
    backlog_sums = np.zeros((4, n), dtype=np.int64)
    max_obs = np.stack([K, Q, J]).copy()
    viol = np.zeros(1, dtype=np.int64)
    tr = Trace.empty(T, n) if want_trace else None
    dummy1, dummy2 = np.zeros(0), np.zeros((0, n), dtype=np.int64)
    code = _kernel.QUADRATIC if kind is PolicyKind.QUADRATIC else _kernel.MAX_WEIGHT

    for t0 in range(0, T, CHUNK):
        size = min(CHUNK, T - t0)
        blk = sample_block(sc, rng, size)
        if tr is not None:
            sl = slice(t0, t0 + size)
            bufs = (tr.y0[sl], tr.K[sl], tr.Q[sl], tr.J[sl], tr.s_q[sl], tr.s_j[sl], tr.format[sl])
        else:
            bufs = (dummy1,) + (dummy2,) * 6
        _kernel.run_chunk(code, V, blk.event, blk.observed, blk.link_best,
                          rewards, data, sc.s_q_max, sc.s_j_max, link_src, link_dst,
                          K, Q, J, bounds.K_max, bounds.Q_max, burn_in, t0,
                          y0_sums, backlog_sums, max_obs, viol, tr is not None, *bufs)
    final = QueueVector(tuple(K.tolist()), tuple(Q.tolist()), tuple(J.tolist()))
    return y0_sums, backlog_sums, max_obs, int(viol[0]), final, tr


def _run_reference(sc, kind, V, T, state, bounds, rng, burn_in, want_trace):
    n = sc.n_devices
    y0_sums = np.zeros(2)
    backlog_sums = np.zeros((4, n), dtype=np.int64)
    max_obs = np.array([state.K, state.Q, state.J], dtype=np.int64)
    violations = 0
    tr = Trace.empty(T, n) if want_trace else None
    for t0 in range(0, T, CHUNK):
        size = min(CHUNK, T - t0)
        blk = sample_block(sc, rng, size)
        for k in range(size):
            t = t0 + k
            slot = realization(sc, blk, k)
            dec = decide(kind, sc, state, slot, V)
            y0 = slot_reward(slot, dec)
            y0_sums[0] += y0
            if t >= burn_in:
                y0_sums[1] += y0
            cur = np.array([state.K, state.Q, state.J], dtype=np.int64)
            backlog_sums[:3] += cur
            if t >= burn_in:
                backlog_sums[3] += cur.sum(axis=0)
            if tr is not None:
                tr.y0[t] = y0
                tr.K[t], tr.Q[t], tr.J[t] = state.K, state.Q, state.J
                tr.s_q[t], tr.s_j[t], tr.format[t] = dec.s_q, dec.s_j, dec.format
            act = resolve_actual(state, dec)
            state = step_queues(state, dec, act, admitted_data(slot, dec))
            violations += bounds.violations(state.K, state.Q, state.J)
            np.maximum(max_obs, np.array([state.K, state.Q, state.J]), out=max_obs)
    return y0_sums, backlog_sums, max_obs, violations, state, tr


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QOI_THREADS", "1")))
    except ValueError:
        return 1


def sweep_v(sc: Scenario, kinds: Iterable["PolicyKind | str"], v_values: Sequence[float],
            seeds: Sequence[int] | None = None, horizon: int | None = None,
            burn_in: int = 0) -> list[RunMetrics]:
    """One run per (policy, V, seed); results ordered policy-major, then V, then seed."""
    if not v_values:
        raise ValueError("v_values must be non-empty")
    seeds = [sc.seed] if seeds is None else list(seeds)
    jobs = [(PolicyKind.parse(k), float(v), s) for k in kinds for v in v_values for s in seeds]

    def one(job):
        kind, v, s = job
        return run(sc, kind, V=v, seed=s, horizon=horizon, burn_in=burn_in).metrics

    workers = min(_threads(), len(jobs))
    if workers == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(one, jobs))


def summary_csv(rows: Iterable[RunMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for m in rows:
        w.writerow(m.summary_row())
    return buf.getvalue()


def trace_header(n: int) -> list[str]:
    return (["slot", "y0"] + [f"K_{i}" for i in range(1, n + 1)]
            + [f"Q_{i}" for i in range(1, n + 1)] + [f"J_{i}" for i in range(1, n + 1)])


def write_trace_csv(fh, trace: Trace) -> None:
    n = trace.K.shape[1]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(trace_header(n))
    for t in range(len(trace)):
        w.writerow([t, repr(float(trace.y0[t])), *trace.K[t].tolist(), *trace.Q[t].tolist(),
                    *trace.J[t].tolist()])


def moving_average(values: np.ndarray, window: int = MOVING_AVERAGE_WINDOW) -> np.ndarray:
    """Trailing moving average; the first ``window - 1`` entries average what is available."""
    values = np.asarray(values, dtype=float)
    c = np.cumsum(np.concatenate([[0.0], values]))
    idx = np.arange(1, len(values) + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def running_average(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.cumsum(values) / np.arange(1, len(values) + 1)


def backlog_slope(trace: Trace, burn_in: int = 0) -> float:
    """Least-squares slope of total backlog against slot index (units per slot)."""
    y = trace.backlog_total[burn_in:].astype(float)
    t = np.arange(burn_in, burn_in + len(y), dtype=float)
    return float(np.polyfit(t, y, 1)[0])
