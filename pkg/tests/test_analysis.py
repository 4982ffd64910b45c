import numpy as np
import pytest

from antex.analysis import (
    DetectorCounts, duty_cycle, detect, instrumented_run, read_activity, robot_count_histogram,
    scalability_sweep, write_activity,
)
from antex.baselines import HandCodedController, NetworkController, NullController
from antex.frames import BLADE_BELOW, BLADE_LEVEL, Z_DUMP, BehaviorVector, SensorFrame, random_frame
from antex.sim import DETECTOR_NAMES, ScenarioConfig, evaluate_batch
from antex.tissue import random_genome


def detector_oracle(f, b, turn):
    """Table 3 predicates; b is a dict of behavior name -> 0/1, turn in {None, 'left', 'right'}."""
    fwd, back, rt, tr, tl = b["fwd"], b["back"], b["rt"], b["tr"], b["tl"]
    dump = f.Z2 == Z_DUMP and f.Z3 == Z_DUMP and f.L1 > 0 and fwd == 1
    return {
        "level": f.B1 == BLADE_LEVEL and f.L1 > 0 and fwd == 1,
        "collision_avoidance": f.S1 == 1 and fwd == 0 and rt == 0 and (tr != tl or back == 1),
        "stuck_avoidance": f.U1 == 1 and fwd == 0 and (back == 1 or rt == 1 or tl != tr),
        "cut_dig": f.B1 == BLADE_BELOW and fwd == 1,
        "correct_dump": dump and (
            (rt == 0 and tl == tr)
            or (rt == 1 and turn == "left" and tr == 1 and tl == 0)
            or (rt == 1 and turn == "right" and tr == 0 and tl == 1)),
    }


def random_case(rng):
    f = random_frame(rng)
    if rng.random() < 0.3:  # enrich the rare dump case
        d = f.__dict__ | {"Z2": Z_DUMP, "Z3": Z_DUMP}
        f = SensorFrame(**d)
    active = tuple(bool(v) for v in rng.random(12) < 0.5)
    turn = ("left", "right")[int(rng.integers(2))] if active[3] else None
    names = dict(fwd=active[1], back=active[2], rt=active[3], tr=active[4], tl=active[5])
    return f, BehaviorVector(active), turn, {k: int(v) for k, v in names.items()}


def test_detect_examples():
    f = SensorFrame(0, 0, 0, 0, 0, 0, BLADE_BELOW, 0, 0, 3, 0, 0, 1, 0)
    assert detect(f, BehaviorVector.from_indices([2]))["cut_dig"]
    assert detect(f, BehaviorVector.from_indices([3]))["stuck_avoidance"]
    assert not any(detect(f, BehaviorVector.from_indices([])).values())


def test_detect_matches_oracle(rng):
    bad = 0
    for _ in range(20_000):
        f, bv, turn, b = random_case(rng)
        if detect(f, bv, turn) != detector_oracle(f, b, turn):
            bad += 1
    assert bad == 0


def test_detector_counts():
    c = DetectorCounts()
    c.add([1, 0, 0, 1, 0])
    c.add([1, 0, 0, 0, 0])
    assert c["level"] == 2 and c.as_dict()["cut_dig"] == 1


def test_instrumented_run_matches_batch(rng):
    sc = ScenarioConfig((6, 6), 1, 3, 80)
    for ctrl in (HandCodedController(), NetworkController(random_genome(rng, 60))):
        run = instrumented_run(ctrl, sc, 4, log_activity=True)
        fit, det = evaluate_batch(ctrl, sc, [4])
        assert run.fitness == fit[0]
        assert run.detectors.counts.tolist() == det[0].tolist()
        assert (run.detectors.counts <= 3 * 80).all()


def test_activity_log_roundtrip(tmp_path, rng):
    ctrl = NetworkController(random_genome(rng, 80, decision_ratio=0.3))
    run = instrumented_run(ctrl, ScenarioConfig((6, 6), 1, 2, 25), 1, log_activity=True)
    assert run.activity.shape == (50, ctrl.tissue.n_decision)
    write_activity(tmp_path / "a.txt", run.activity)
    back = read_activity(tmp_path / "a.txt")
    assert (back == run.activity).all()
    dc = duty_cycle(back)
    assert ((0 <= dc) & (dc <= 1)).all()
    assert instrumented_run(HandCodedController(), ScenarioConfig((6, 6), 1, 2, 5), 1, log_activity=True).activity is None


def test_sweep_shape_and_determinism():
    kw = dict(robots_range=[1, 2, 3], areas=[(6, 6), (8, 8)], depths=[1], reps=3, timesteps=50)
    a = scalability_sweep(HandCodedController(), **kw)
    b = scalability_sweep(HandCodedController(), **kw)
    assert len(a) == 6
    assert [c.mean_fitness for c in a.cells] == [c.mean_fitness for c in b.cells]
    assert all(c.reps == 3 and c.seed_base == 0 for c in a.cells)
    assert a.lookup(robots=2, area=(8, 8))[0].robots == 2


def test_sweep_edge_cases(tmp_path):
    assert len(scalability_sweep(NullController(), [1], [(4, 4)], [1], 0, 10)) == 0
    with pytest.raises(ValueError):
        scalability_sweep(NullController(), [], [(4, 4)], [1], 2, 10)
    r = scalability_sweep(NullController(), [1, 2], [(4, 4)], [1], 2, 10)
    r.write_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("controller,robots")
    assert r.cells[0].mean_fitness == pytest.approx(np.exp(-2))


def test_histogram():
    h = robot_count_histogram([4] * 30)
    assert h.mode == 4 and h.counts.sum() == 30 and not h.is_uniform(0.01)
    flat = robot_count_histogram(list(range(1, 11)) * 3)
    assert flat.is_uniform(0.01) and flat.chi2 == 0.0
    with pytest.raises(ValueError):
        robot_count_histogram([])
    with pytest.raises(ValueError):
        robot_count_histogram([11])


def test_detector_names():
    assert DETECTOR_NAMES == ("level", "collision_avoidance", "stuck_avoidance", "cut_dig", "correct_dump")
