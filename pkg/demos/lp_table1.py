"""Virtual-queue LP iteration on the two-variable example.

    python3 demos/lp_table1.py [iters]
"""
import sys
from pathlib import Path

import numpy as np

from qoisim import load_lp, lp_residual_bound, solve_lp
from qoisim.oracle import oracle_lp_solve

ROOT = Path(__file__).resolve().parents[1]
iters = int(sys.argv[1]) if len(sys.argv) > 1 else 500
V = 200.0

inst = load_lp(ROOT / "scenarios" / "table1.lp")
opt = oracle_lp_solve(inst)
print(f"exact optimum x*={np.round(opt.x, 6).tolist()} value={opt.value:.6f}")

for kind in ("quadratic", "maxweight"):
    rep = solve_lp(inst, V, iters, kind, trace=True, y0_opt=opt.value)
    print(f"\n{kind}: x_bar={np.round(rep.x_bar, 6).tolist()} x(T)={np.round(rep.x_final, 6).tolist()} "
          f"Z={np.round(rep.Z, 3).tolist()}")
    print(f"  max residual {rep.residuals.max():.5f}, bound {rep.residual_bound.max():.5f}, E={rep.E}")
    for t in (10, 50, 100, 250, iters):
        if t <= iters:
            k = t - 1
            print(f"  t={t:>4} x={np.round(rep.trace.x[k], 4).tolist()} "
                  f"x_bar={np.round(rep.trace.x_bar[k], 4).tolist()}")

# the quadratic iterate settles at the optimum itself; max-weight jumps
# between box corners and only its running average approaches x*
b = lp_residual_bound(inst, V, iters, opt.value)
print(f"\nresidual bound at t={iters}: {b.max():.5f}")
