"""Reward/backlog trade-off as V grows, quadratic policy against max-weight.

    python3 demos/tradeoff.py [scenario.cfg] [horizon]
"""
import sys
from pathlib import Path

from qoisim import compute_bounds, load_scenario, sweep_v

ROOT = Path(__file__).resolve().parents[1]
path = sys.argv[1] if len(sys.argv) > 1 else ROOT / "scenarios" / "two-device.cfg"
horizon = int(sys.argv[2]) if len(sys.argv) > 2 else 200_000
V_VALUES = (10, 50, 100, 400, 800)

sc = load_scenario(path)
rows = sweep_v(sc, ["quadratic", "maxweight"], V_VALUES, horizon=horizon)
by = {(m.policy, m.V): m for m in rows}

print(f"{sc.n_devices} devices, {horizon} slots, seed {sc.seed}")
print(f"{'V':>6} {'y0 qd':>8} {'y0 mw':>8} {'backlog qd':>11} {'backlog mw':>11} {'K_max':>7}")
for V in V_VALUES:
    qd, mw = by[("quadratic", float(V))], by[("maxweight", float(V))]
    kmax = compute_bounds(sc, V).K_max.max()
    print(f"{V:>6} {qd.avg_y0:>8.3f} {mw.avg_y0:>8.3f} {qd.avg_backlog_total:>11.1f} "
          f"{mw.avg_backlog_total:>11.1f} {kmax:>7.0f}")

# reward climbs toward its optimum while backlog grows roughly linearly in V;
# the quadratic policy pays much less backlog for the same reward
