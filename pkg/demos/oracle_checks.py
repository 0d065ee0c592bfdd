"""Brute-force cross-checks of the closed-form policy and the bounds.

    python3 demos/oracle_checks.py [samples-scale]
"""
import sys
import time

import numpy as np

from qoisim import decide
from qoisim.oracle import SUITES, oracle_joint_decision, random_oracle_case, run_suite

scale = float(sys.argv[1]) if len(sys.argv) > 1 else 0.1
samples = {"oracle": 1000, "lemma1": 10000, "lemma3": 20, "drift": 2000}

# one case in detail: the separable decision and the exhaustive search agree
rng = np.random.default_rng(1)
sc, state, slot, V = random_oracle_case(rng)
dec = decide("quadratic", sc, state, slot, V)
best, obj = oracle_joint_decision(sc, state, slot, V)
print(f"N={sc.n_devices} V={V} K={state.K} Q={state.Q} J={state.J}")
print(f"  closed form s_q={dec.s_q} s_j={dec.s_j} format={dec.format}")
print(f"  exhaustive  s_q={best.s_q} s_j={best.s_j} format={best.format} objective={obj}")

for name in SUITES:
    t0 = time.perf_counter()
    res = run_suite(name, max(1, int(samples[name] * scale)), seed=0)
    print(f"{res.line()} ({time.perf_counter() - t0:.1f}s)")
