import numpy as np
import pytest

from antex.baselines import (
    HANDCODED_RULES, HandCodedController, NetworkController, NullController, fixed_topology_genome,
    make_controller,
)
from antex.frames import Z_ABOVE, Z_BELOW, Z_DONTCARE, Z_DUMP, Z_LEVEL, SensorFrame, random_frame
from antex.tissue import ActivationParams, Genome, LatticePosition, develop, infer

from conftest import decision, genome, motor


def rule_oracle(f: SensorFrame) -> set:
    if f.U1:
        return {1, 4, 7, 10, 12}
    if f.S1:
        return {4}
    z = {f.Z2, f.Z3}
    out = set()
    if Z_DUMP in z and f.L1 > 0:
        out |= {2, 3, 4}
    if Z_DONTCARE in z:
        out |= {3, 4, 12} if f.L1 > 0 else {2, 4}
    if Z_LEVEL in z:
        out |= {2, 4}
    if Z_BELOW in z:
        out |= {2, 7, 11}
    if Z_ABOVE in z:
        out |= {2} | ({8, 11} if f.M1 == 0 else {9})
    return out or {2, 4}


def test_rule_table_matches_oracle(rng):
    ctrl = HandCodedController()
    bad = 0
    for _ in range(100_000):
        f = random_frame(rng)
        if ctrl.decide(f).indices() != rule_oracle(f):
            bad += 1
    assert bad == 0


def _frame(**kw):
    base = dict(Z1=0, Z2=Z_ABOVE, Z3=Z_ABOVE, Z4=0, E1=0, E2=0, B1=3, L1=0, S1=0, D1=3, H1=0, R1=0, U1=0, M1=0)
    base.update(kw)
    return SensorFrame(**base)


def test_rule_examples():
    c = HandCodedController()
    assert c.decide(_frame(U1=1, S1=1)).indices() == {1, 4, 7, 10, 12}
    assert c.decide(_frame(S1=1)).indices() == {4}
    assert c.decide(_frame(Z2=Z_DUMP, Z3=Z_DUMP, L1=2)).indices() == {2, 3, 4}
    assert {2, 3, 4} <= c.decide(_frame(Z2=Z_DUMP, L1=1)).indices()


def test_rule_table_lists_twelve_rows():
    assert [r[0] for r in HANDCODED_RULES] == list(range(1, 13))


def test_null_controller():
    assert not any(NullController().decide(_frame()).active)


def test_fixed_genome_shape(rng):
    g = fixed_topology_genome(rng)
    t = develop(g)
    assert t.n_motor == 64 and t.n_decision == 0 and not t.gated
    assert sorted(set(t.motor_binding[t.motor_binding >= 0])) == list(range(12))


def test_fixed_zero_weights():
    # sigma = 0 everywhere: down with theta1 > 0 is on, theta1 <= 0 is off
    on = ActivationParams(0, 0, 0.5, 0.0)
    off = ActivationParams(0, 0, 0.0, 0.0)
    g = genome([motor(0, 0, 0, act=on), motor(0, 0, 1, act=on), motor(0, 0, 2, act=on),
                motor(0, 0, 3, 3, act=on), motor(1, 0, 3, 6, act=off)], kind="fixed")
    bv = infer(develop(g), _frame())
    assert bv.indices() == {3}


def test_single_path_gate():
    # one chain from the Z2=Level input neuron to behavior 2
    from antex.frames import SENSOR_OFFSETS
    sw = np.zeros(51)
    sw[SENSOR_OFFSETS[1] + Z_LEVEL] = 14.0  # sigma = 1 iff Z2 is Level
    gate = ActivationParams(0, 1, 0.0, 0.5)
    w = np.zeros(9)
    w[4] = 1.0  # input directly below
    g = genome([motor(0, 0, 0, sw=sw, act=gate), motor(0, 0, 1, w=w, act=gate),
                motor(0, 0, 2, w=w, act=gate), motor(0, 0, 3, 2, w=w, act=gate)], kind="fixed")
    ctrl = NetworkController(g)
    for z2 in range(5):
        assert ctrl.decide(_frame(Z2=z2)).indices() == ({2} if z2 == Z_LEVEL else set())


def test_fixed_equals_fully_gated_ant(rng):
    fixed = fixed_topology_genome(rng)
    ant = Genome(fixed.tissue, [g for g in fixed.genes] + [decision(9, 9, 1, c=1.0, ext=(9, 9, 9))], "ant")
    tf, ta = develop(fixed), develop(ant)
    for _ in range(2000):
        f = random_frame(rng)
        assert infer(tf, f).active == infer(ta, f).active


def test_make_controller(rng):
    assert isinstance(make_controller("handcoded"), HandCodedController)
    assert isinstance(make_controller("null"), NullController)
    assert isinstance(make_controller("fixed", 1), NetworkController)
    with pytest.raises(ValueError):
        make_controller("nope")
