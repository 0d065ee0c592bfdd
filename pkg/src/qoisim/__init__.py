"""Quality-of-information maximization in a two-hop wireless network.

Simulator for the fully separable quadratic drift-plus-penalty policy and the
max-weight baseline, plus the virtual-queue linear-program solver built from
the same quadratic idea.
"""
from .model import (BLANK, ChannelSpec, DecisionVector, DeviceSpec, FormatOption, QueueVector,
                    Scenario, ScenarioError, SlotRealization, load_scenario, loads_scenario,
                    make_rng, sample_block, sample_slot)
from .policy import PolicyKind, decide
from .dynamics import compute_bounds, resolve_actual, step_queues
from .simulator import RunMetrics, run, sweep_v
from .lpsolver import LpInstance, load_lp, loads_lp, lp_residual_bound, solve_lp

__version__ = "0.1.0"

__all__ = [
    "BLANK", "ChannelSpec", "DecisionVector", "DeviceSpec", "FormatOption", "QueueVector",
    "Scenario", "ScenarioError", "SlotRealization", "load_scenario", "loads_scenario",
    "make_rng", "sample_block", "sample_slot", "PolicyKind", "decide", "compute_bounds",
    "resolve_actual", "step_queues", "RunMetrics", "run", "sweep_v", "LpInstance", "load_lp",
    "loads_lp", "lp_residual_bound", "solve_lp",
]
