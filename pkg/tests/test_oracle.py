import itertools

import numpy as np
import pytest

from qoisim.lpsolver import LpInstance, quadratic_decision
from qoisim.model import BLANK, ChannelSpec, DecisionVector, DeviceSpec, QueueVector, Scenario, SlotRealization, \
    reference_formats
from qoisim.oracle import (InfeasibleGridError, OracleBudgetError, SmallInstanceCaps, joint_objective,
                           drift_bound_chain, queue_bound_terms, oracle_joint_decision, oracle_lp_solve,
                           oracle_lp_step, random_oracle_case, run_suite, verify_lemma1)
from qoisim.policy import qd_decide

FMT = reference_formats()


def small_pair(cap=3):
    devs = tuple(DeviceSpec(i, FMT, cap, cap) for i in (1, 2))
    chans = (ChannelSpec(1, None, (cap,), (1.0,)), ChannelSpec(2, None, (cap,), (1.0,)),
             ChannelSpec(1, 2, (cap,), (1.0,)), ChannelSpec(2, 1, (cap,), (1.0,)))
    return Scenario(devs, chans, 1.0, 10.0, 10, 0)


def slot(event=True, cap=3):
    o = FMT if event else (BLANK,) * 4
    return SlotRealization(event, (o, o), (cap, cap), ((0, cap), (cap, 0)))


def test_zero_state_no_event():
    sc = small_pair()
    dec, obj = oracle_joint_decision(sc, QueueVector.zeros(2), slot(False), 10.0)
    assert dec == DecisionVector.zeros(2) and obj == 0


def test_matches_composed_policy_on_random_cases():
    rng = np.random.default_rng(0)
    for _ in range(60):
        sc, state, sl, V = random_oracle_case(rng)
        _, best = oracle_joint_decision(sc, state, sl, V)
        assert joint_objective(state, sl, qd_decide(sc, state, sl, V), V) == best


def test_enumeration_order_irrelevant():
    sc = small_pair()
    s = QueueVector((9, 4), (2, 7), (5, 0))
    up = [(u1, u2) for u1 in range(4) for u2 in range(4)]
    a = oracle_joint_decision(sc, s, slot(), 10.0, uplink_set=up)
    b = oracle_joint_decision(sc, s, slot(), 10.0, uplink_set=list(reversed(up)))
    assert a == b


def test_coupled_relay_set_respected():
    sc = small_pair()
    s = QueueVector((0, 0), (0, 0), (12, 12))
    coupled = [((0, a), (b, 0)) for a, b in itertools.product(range(4), repeat=2) if a + b <= 3]
    dec, obj = oracle_joint_decision(sc, s, slot(), 10.0, relay_set=coupled)
    assert dec.a[0][1] + dec.a[1][0] <= 3
    free = qd_decide(sc, s, slot(), 10.0)
    assert free.a[0][1] + free.a[1][0] == 6  # product form would break the coupling
    assert obj >= joint_objective(s, slot(), free, 10.0)


def test_budget_enforced():
    sc = small_pair(cap=3)
    with pytest.raises(OracleBudgetError):
        oracle_joint_decision(sc, QueueVector.zeros(2), slot(), 1.0, caps=SmallInstanceCaps(budget=1000))
    with pytest.raises(OracleBudgetError):
        oracle_joint_decision(sc, QueueVector((13, 0), (0, 0), (0, 0)), slot(), 1.0)


def test_lp_step_grid(table1):
    x = oracle_lp_step(table1, np.zeros(3), 200, 0.01)
    assert np.allclose(x, [10, 10], atol=0.01)
    zero = LpInstance([0.0, 0.0], [[1, 1]], [1], [1, 1])
    assert oracle_lp_step(zero, np.zeros(1), 5.0).tolist() == [0, 0]


def test_lp_step_random_z():
    rng = np.random.default_rng(1)
    inst = LpInstance(rng.uniform(0, 3, 2), rng.uniform(-2, 4, (3, 2)), rng.uniform(0, 5, 3), [5.0, 5.0])
    for _ in range(100):
        Z = rng.uniform(0, 400, 3)
        assert np.abs(quadratic_decision(inst, Z, 200) - oracle_lp_step(inst, Z, 200, 0.01)).max() <= 0.01


def test_lp_solve_table1(table1):
    v = oracle_lp_solve(table1)
    assert np.allclose(v.x, [2.5, 5 / 6]) and v.value == pytest.approx(35 / 6)
    g = oracle_lp_solve(table1, 0.01, method="grid")
    assert g.value <= v.value + 1e-12 and v.value - g.value < 0.02


def test_lp_solve_trivial_cases():
    inst = LpInstance([1.0, 2.0], [[1, 1]], [1e9], [3.0, 4.0])
    assert oracle_lp_solve(inst).x.tolist() == [3.0, 4.0]
    origin = LpInstance([1.0, 2.0], [[2, 1], [0, 3]], [0, 0], [3.0, 4.0])
    assert oracle_lp_solve(origin).value == 0 and oracle_lp_solve(origin, 0.1, method="grid").value == 0
    with pytest.raises(InfeasibleGridError):
        oracle_lp_solve(LpInstance([1.0], [[1.0]], [-1.0], [2.0]))
    with pytest.raises(OracleBudgetError):
        oracle_lp_solve(LpInstance([1.0] * 4, [[1.0] * 4], [1.0], [1.0] * 4), method="grid")


def test_verify_lemma1_examples():
    assert verify_lemma1(0, [], []) == (True, True)
    t = queue_bound_terms(5, [-3], [2])
    assert (t.lhs, t.C, t.quadratic) == (-9, 12, 15)
    assert verify_lemma1(5, [-3], [2]) == (True, True)


def test_queue_bound_caps_checked():
    with pytest.raises(ValueError):
        queue_bound_terms(1, [5], [], a_caps=[4])


def test_drift_chain_on_example_state():
    sc = small_pair()
    s = QueueVector((9, 4), (2, 7), (5, 0))
    dec = qd_decide(sc, s, slot(), 10.0)
    assert drift_bound_chain(sc, s, slot(), dec, 10.0).ordered


@pytest.mark.parametrize("name, n", [("oracle", 20), ("lemma1", 500), ("lemma3", 3), ("drift", 200)])
def test_suites_pass(name, n):
    r = run_suite(name, n, seed=1)
    assert r.ok, r.failures
    assert r.line() == f"{name}: {n}/{n} passed"
