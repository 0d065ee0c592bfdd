import io
import warnings

import numpy as np
import pytest

from qoisim.model import QueueVector
from qoisim.simulator import (SUMMARY_HEADER, BoundViolationWarning, backlog_slope, moving_average, run,
                              running_average, summary_csv, sweep_v, trace_header, write_trace_csv)

from conftest import single_device


@pytest.mark.parametrize("kind", ["quadratic", "maxweight"])
def test_fast_engine_matches_reference(two_device, kind):
    a = run(two_device, kind, horizon=3000, seed=5, trace=True, V=400)
    b = run(two_device, kind, horizon=3000, seed=5, trace=True, V=400, engine="reference")
    for name in ("y0", "K", "Q", "J", "s_q", "s_j", "format"):
        assert np.array_equal(getattr(a.trace, name), getattr(b.trace, name)), name
    assert a.metrics.avg_y0 == b.metrics.avg_y0
    assert np.array_equal(a.metrics.avg_backlog, b.metrics.avg_backlog)
    assert a.metrics.final_state == b.metrics.final_state


def test_fast_engine_matches_reference_five_devices(five_device):
    a = run(five_device, "quadratic", horizon=1500, seed=9, trace=True)
    b = run(five_device, "quadratic", horizon=1500, seed=9, trace=True, engine="reference")
    assert np.array_equal(a.trace.Q, b.trace.Q) and np.array_equal(a.trace.y0, b.trace.y0)


def test_chunk_boundary_is_invisible(two_device, monkeypatch):
    import qoisim.simulator as sim
    a = run(two_device, "quadratic", horizon=5000, seed=2, trace=True)
    monkeypatch.setattr(sim, "CHUNK", 777)
    b = run(two_device, "quadratic", horizon=5000, seed=2, trace=True)
    assert np.array_equal(a.trace.K, b.trace.K) and a.metrics.avg_y0 == b.metrics.avg_y0


def test_no_events_no_reward():
    r = run(single_device(event_prob=0.0), "quadratic", horizon=500)
    assert r.metrics.avg_y0 == 0 and r.metrics.avg_backlog_total == 0


def test_rerun_is_identical(two_device):
    a = run(two_device, "quadratic", horizon=20000, seed=3).metrics
    b = run(two_device, "quadratic", horizon=20000, seed=3).metrics
    assert summary_csv([a]) == summary_csv([b])


def test_trace_records_start_of_slot_state(two_device):
    r = run(two_device, "quadratic", horizon=50, seed=1, trace=True)
    assert r.trace[0].K == (0, 0)
    assert r.trace.y0[:50].sum() / 50 == pytest.approx(r.metrics.avg_y0)


def test_warning_on_bound_violation(two_device):
    # a start far above the bounds cannot be excused, but is also not flagged
    big = QueueVector((5000, 0), (0, 0), (0, 0))
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundViolationWarning)
        r = run(two_device, "quadratic", horizon=10, initial=big)
    assert r.metrics.bound_violations > 0


def test_quadratic_bounds_hold(two_device):
    r = run(two_device, "quadratic", horizon=200_000, seed=8)
    assert r.metrics.bound_violations == 0
    assert (r.metrics.max_observed[0] <= r.bounds.K_max).all()


def test_support_bang_bang_vs_smooth(two_device):
    mw = run(two_device, "maxweight", horizon=5000, seed=4, trace=True).trace
    qd = run(two_device, "quadratic", horizon=5000, seed=4, trace=True).trace
    assert set(np.unique(mw.s_q)) <= {0, 30}
    assert len(set(np.unique(qd.s_q)) - {0, 30}) > 0


def test_backlog_is_not_growing(two_device):
    r = run(two_device, "quadratic", horizon=200_000, seed=6, trace=True)
    # a mean backlog of a few hundred units cannot drift by more than ~0.001 units/slot
    assert abs(backlog_slope(r.trace, burn_in=20_000)) < 1e-3


def test_burn_in_average(two_device):
    r = run(two_device, "quadratic", horizon=4000, burn_in=1000, seed=1, trace=True)
    assert r.metrics.avg_y0_after_burn_in == pytest.approx(r.trace.y0[1000:].mean())


def test_sweep_order_and_degenerate_case(two_device):
    rows = sweep_v(two_device, ["quadratic", "maxweight"], [10, 100], seeds=[1, 2], horizon=2000)
    assert [(m.policy, m.V, m.seed) for m in rows] == [
        ("quadratic", 10.0, 1), ("quadratic", 10.0, 2), ("quadratic", 100.0, 1), ("quadratic", 100.0, 2),
        ("maxweight", 10.0, 1), ("maxweight", 10.0, 2), ("maxweight", 100.0, 1), ("maxweight", 100.0, 2)]
    one = sweep_v(two_device, ["quadratic"], [100], seeds=[1], horizon=2000)[0]
    assert summary_csv([one]) == summary_csv([run(two_device, "quadratic", V=100, seed=1, horizon=2000).metrics])


def test_sweep_threads_agree(two_device, monkeypatch):
    a = sweep_v(two_device, ["quadratic"], [10, 100, 800], horizon=3000)
    monkeypatch.setenv("QOI_THREADS", "3")
    b = sweep_v(two_device, ["quadratic"], [10, 100, 800], horizon=3000)
    assert summary_csv(a) == summary_csv(b)


def test_sweep_rejects_empty(two_device):
    with pytest.raises(ValueError):
        sweep_v(two_device, ["quadratic"], [])


def test_csv_headers(two_device):
    assert summary_csv([]).strip().split(",") == SUMMARY_HEADER
    r = run(two_device, "quadratic", horizon=5, trace=True)
    buf = io.StringIO()
    write_trace_csv(buf, r.trace)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(trace_header(2)) == "slot,y0,K_1,K_2,Q_1,Q_2,J_1,J_2"
    assert len(lines) == 6


def test_moving_and_running_average():
    x = np.arange(1, 11, dtype=float)
    assert moving_average(x, 3)[-1] == 9.0 and moving_average(x, 3)[0] == 1.0
    assert running_average(x)[-1] == 5.5
