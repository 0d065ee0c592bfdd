"""Linear programs solved by virtual-queue iteration.

Problem form::

    maximize    c . x
    subject to  A x <= b,   0 <= x <= x_max

Each constraint row gets a virtual queue ``Z_j``.  Every iteration picks
``x(t)`` from ``Z(t)`` (quadratic or max-weight rule), then
``Z_j(t+1) = max(Z_j(t) + A_j . x(t) - b_j, 0)``.  The answer is the running
average ``x_bar(t) = (1/t) sum_{tau<t} x(tau)``.
"""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .policy import PolicyKind


class LpFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LpInstance:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    x_max: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        x_max = np.asarray(self.x_max, dtype=float).reshape(-1)
        m, n = A.shape
        if len(c) != n or len(x_max) != n or len(b) != m:
            raise ValueError(f"inconsistent dimensions: c {len(c)}, A {A.shape}, b {len(b)}, x_max {len(x_max)}")
        if not all(np.all(np.isfinite(v)) for v in (c, A, b, x_max)):
            raise ValueError("c, A, b and x_max must be finite")
        if np.any(x_max <= 0):
            raise ValueError("x_max must be strictly positive")
        for name, v in (("c", c), ("A", A), ("b", b), ("x_max", x_max)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def col_sq(self) -> np.ndarray:
        return (self.A ** 2).sum(axis=0)


@dataclass(frozen=True)
class LpSolverState:
    Z: np.ndarray
    x: np.ndarray        # last decision (zeros before the first iteration)
    x_sum: np.ndarray
    y_sum: float
    t: int
    V: float

    @classmethod
    def initial(cls, inst: LpInstance, V: float, Z0=None) -> "LpSolverState":
        Z = np.zeros(inst.m) if Z0 is None else np.maximum(np.asarray(Z0, dtype=float), 0.0)
        return cls(Z, np.zeros(inst.n), np.zeros(inst.n), 0.0, 0, float(V))

    @property
    def x_bar(self) -> np.ndarray:
        return self.x_sum / self.t if self.t else np.zeros_like(self.x_sum)

    @property
    def y_bar(self) -> float:
        """Time-averaged objective ``(1/t) sum_{tau<t} c . x(tau)``."""
        return self.y_sum / self.t if self.t else 0.0


def quadratic_decision(inst: LpInstance, Z: np.ndarray, V: float) -> np.ndarray:
    """Minimizer of ``sum_i [sum_j (Z_j + a_ji x_i)^2 - 2 V c_i x_i]`` over the box."""
    num = inst.c * V - inst.A.T @ Z
    den = inst.col_sq
    x = np.empty(inst.n)
    live = den > 0
    x[live] = np.clip(num[live] / den[live], 0.0, inst.x_max[live])
    # a zero column leaves a linear objective -2 V c_i x_i
    dead = ~live
    x[dead] = np.where(inst.c[dead] > 0, inst.x_max[dead], 0.0)
    return x


def maxweight_decision(inst: LpInstance, Z: np.ndarray, V: float) -> np.ndarray:
    coef = V * inst.c - inst.A.T @ Z
    return np.where(coef > 0, inst.x_max, 0.0)


def decision(kind: "PolicyKind | str", inst: LpInstance, Z: np.ndarray, V: float) -> np.ndarray:
    if PolicyKind.parse(kind) is PolicyKind.QUADRATIC:
        return quadratic_decision(inst, Z, V)
    return maxweight_decision(inst, Z, V)


def _advance(state: LpSolverState, inst: LpInstance, x: np.ndarray) -> LpSolverState:
    Z = np.maximum(state.Z + inst.A @ x - inst.b, 0.0)
    return LpSolverState(Z, x, state.x_sum + x, state.y_sum + float(inst.c @ x), state.t + 1, state.V)


def lp_step_quadratic(state: LpSolverState, inst: LpInstance) -> LpSolverState:
    return _advance(state, inst, quadratic_decision(inst, state.Z, state.V))


def lp_step_maxweight(state: LpSolverState, inst: LpInstance) -> LpSolverState:
    return _advance(state, inst, maxweight_decision(inst, state.Z, state.V))


def lp_drift_constant(inst: LpInstance) -> float:
    """``sum_j (sum_i |a_ji| x_max_i + |b_j|)^2``."""
    return float(((np.abs(inst.A) @ inst.x_max + np.abs(inst.b)) ** 2).sum())


def default_y0_max(inst: LpInstance) -> float:
    return float(np.maximum(inst.c, 0.0) @ inst.x_max)


def lp_residual_bound(inst: LpInstance, V: float, t: int, y0_opt: float,
                      y0_max: float | None = None) -> np.ndarray:
    """Worst-case constraint violation of ``x_bar(t)``, one entry per constraint."""
    if t < 1:
        raise ValueError("t must be >= 1")
    y0_max = default_y0_max(inst) if y0_max is None else y0_max
    if y0_max < y0_opt:
        raise ValueError(f"y0_max ({y0_max}) must be >= y0_opt ({y0_opt})")
    E = lp_drift_constant(inst)
    return np.full(inst.m, math.sqrt((2.0 * E + 2.0 * V * (y0_max - y0_opt)) / t))


def slater_queue_bound(inst: LpInstance, V: float, eps: float, y0_eps: float,
                       y0_max: float | None = None) -> np.ndarray:
    """Uniform-in-time cap on each ``Z_j`` given a point with slack ``eps`` on every row
    and objective ``y0_eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    y0_max = default_y0_max(inst) if y0_max is None else y0_max
    E = lp_drift_constant(inst)
    return (V * (y0_max - y0_eps) + E) / eps + np.abs(inst.A) @ inst.x_max


@dataclass
class LpTrace:
    """Row ``k`` describes time ``t = k + 1``: the decision ``x(k)`` and the
    resulting ``x_bar(t)``, ``Z(t)`` and time-averaged objective."""

    x: np.ndarray
    x_bar: np.ndarray
    Z: np.ndarray
    objective: np.ndarray


@dataclass
class LpReport:
    policy: str
    V: float
    iterations: int
    x_bar: np.ndarray
    x_final: np.ndarray      # decision the policy takes at t = iterations
    Z: np.ndarray
    residuals: np.ndarray    # A x_bar - b
    objective: float         # time-averaged objective
    E: float
    residual_bound: np.ndarray | None = None
    trace: LpTrace | None = field(default=None, repr=False)


def solve_lp(inst: LpInstance, V: float, iterations: int, kind: "PolicyKind | str" = "quadratic", *,
             trace: bool = False, y0_opt: float | None = None, y0_max: float | None = None,
             Z0=None) -> LpReport:
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    kind = PolicyKind.parse(kind)
    step = lp_step_quadratic if kind is PolicyKind.QUADRATIC else lp_step_maxweight
    state = LpSolverState.initial(inst, V, Z0)
    tr = None
    if trace:
        tr = LpTrace(np.zeros((iterations, inst.n)), np.zeros((iterations, inst.n)),
                     np.zeros((iterations, inst.m)), np.zeros(iterations))
    for k in range(iterations):
        state = step(state, inst)
        if tr is not None:
            tr.x[k], tr.x_bar[k], tr.Z[k], tr.objective[k] = state.x, state.x_bar, state.Z, state.y_bar
    x_bar = state.x_bar
    bound = None
    if y0_opt is not None:
        bound = lp_residual_bound(inst, V, iterations, y0_opt, y0_max)
    return LpReport(
        policy=kind.short, V=float(V), iterations=iterations, x_bar=x_bar,
        x_final=decision(kind, inst, state.Z, V), Z=state.Z,
        residuals=inst.A @ x_bar - inst.b, objective=state.y_bar,
        E=lp_drift_constant(inst), residual_bound=bound, trace=tr,
    )


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_ROW = re.compile(r"^(.*?)<=\s*(\S+)$")
_BOUND = re.compile(r"^0\s*<=\s*x_(\d+)\s*<=\s*(\S+)$")


def loads_lp(text: str) -> LpInstance:
    """Parse::

        maximize 2 1
        subject_to
          1 1 <= 4
          5 3 <= 15
        bounds
          0 <= x_1 <= 10
          0 <= x_2 <= 10
    """
    c = None
    rows, rhs, bounds = [], [], {}
    section = None

    def nums(tokens, lineno):
        try:
            return [float(t) for t in tokens]
        except ValueError:
            raise LpFormatError(f"line {lineno}: expected numbers, got {' '.join(tokens)!r}") from None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0].lower()
        if head == "maximize":
            c = nums(line.split()[1:], lineno)
            section = None
        elif head == "subject_to":
            section = "rows"
        elif head == "bounds":
            section = "bounds"
        elif section == "rows":
            m = _ROW.match(line)
            if m is None:
                raise LpFormatError(f"line {lineno}: expected 'a_1 ... a_n <= b'")
            rows.append(nums(m.group(1).split(), lineno))
            rhs.append(nums([m.group(2)], lineno)[0])
        elif section == "bounds":
            m = _BOUND.match(line)
            if m is None:
                raise LpFormatError(f"line {lineno}: expected '0 <= x_i <= x_max'")
            bounds[int(m.group(1))] = nums([m.group(2)], lineno)[0]
        else:
            raise LpFormatError(f"line {lineno}: unexpected {line!r}")

    if c is None:
        raise LpFormatError("missing 'maximize' line")
    n = len(c)
    for k, r in enumerate(rows):
        if len(r) != n:
            raise LpFormatError(f"constraint {k + 1} has {len(r)} coefficients, expected {n}")
    if sorted(bounds) != list(range(1, n + 1)):
        raise LpFormatError(f"bounds must be given for x_1..x_{n}, got {sorted(bounds)}")
    A = np.array(rows, dtype=float).reshape(len(rows), n)
    try:
        return LpInstance(np.array(c), A, np.array(rhs), np.array([bounds[i] for i in range(1, n + 1)]))
    except ValueError as exc:
        raise LpFormatError(str(exc)) from None


def load_lp(path: str | Path) -> LpInstance:
    return loads_lp(Path(path).read_text())


def dumps_lp(inst: LpInstance) -> str:
    g = lambda v: f"{float(v):g}"  # noqa: E731
    lines = ["maximize " + " ".join(g(v) for v in inst.c), "subject_to"]
    lines += ["  " + " ".join(g(v) for v in row) + f" <= {g(bj)}" for row, bj in zip(inst.A, inst.b)]
    lines.append("bounds")
    lines += [f"  0 <= x_{i + 1} <= {g(v)}" for i, v in enumerate(inst.x_max)]
    return "\n".join(lines) + "\n"


def trace_header(n: int, m: int) -> list[str]:
    return (["iter"] + [f"x_{i}" for i in range(1, n + 1)] + [f"xbar_{i}" for i in range(1, n + 1)]
            + [f"Z_{j}" for j in range(1, m + 1)] + ["objective"])


def write_trace_csv(fh, tr: LpTrace) -> None:
    w = csv.writer(fh, lineterminator="\n")
    n, m = tr.x.shape[1], tr.Z.shape[1]
    w.writerow(trace_header(n, m))
    for k in range(len(tr.objective)):
        w.writerow([k + 1, *map(repr, tr.x[k].tolist()), *map(repr, tr.x_bar[k].tolist()),
                    *map(repr, tr.Z[k].tolist()), repr(float(tr.objective[k]))])


def summary_header(n: int) -> list[str]:
    return (["policy", "V", "iters"] + [f"xbar_{i}" for i in range(1, n + 1)]
            + [f"x_{i}" for i in range(1, n + 1)] + ["objective", "max_residual"])


def summary_csv(rep: LpReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = len(rep.x_bar)
    w.writerow(summary_header(n))
    w.writerow([rep.policy, repr(rep.V), rep.iterations, *(f"{v:.6f}" for v in rep.x_bar),
                *(f"{v:.6f}" for v in rep.x_final), f"{rep.objective:.6f}",
                f"{float(rep.residuals.max(initial=0.0)):.6f}"])
    return buf.getvalue()
