"""Behavior detectors, scalability sweeps, team-size histograms and neuron
activity logs."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy import stats

from .frames import N_BEHAVIORS, N_SENSORS, BehaviorVector, SensorFrame
from .sim import (
    DEFAULT_CAPACITY, DETECTOR_NAMES, N_DETECTORS, THROTTLE_CAPACITY, TR_RANDOM_DIR, ScenarioConfig,
    SimRng, detect_kernel, evaluate_batch, execute_kernel, fitness_kernel, sense_kernel,
)
from .tissue import ROBOT_COUNT_RANGE, NetworkScratch


@dataclass
class DetectorCounts:
    """Per-detector firing counts, in DETECTOR_NAMES order."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros(N_DETECTORS, dtype=np.int64))

    def add(self, flags) -> None:
        self.counts += np.asarray(flags, dtype=np.int64)

    def as_dict(self) -> dict:
        return {n: int(c) for n, c in zip(DETECTOR_NAMES, self.counts)}

    def __getitem__(self, name: str) -> int:
        return int(self.counts[DETECTOR_NAMES.index(name)])


def _mask(behaviors) -> int:
    if isinstance(behaviors, BehaviorVector):
        bits = behaviors.active
    elif isinstance(behaviors, (int, np.integer)):
        return int(behaviors)
    else:
        bits = behaviors
    return sum(1 << q for q, on in enumerate(bits) if on)


def _turn_code(rng_trace) -> int:
    if rng_trace is None:
        return -1
    if hasattr(rng_trace, "random_turn"):
        rng_trace = rng_trace.random_turn
    if rng_trace in ("left", 0):
        return 0
    if rng_trace in ("right", 1):
        return 1
    if rng_trace in (None, -1):
        return -1
    raise ValueError(f"unrecognised random-turn outcome {rng_trace!r}")


def detect(frame, behaviors, rng_trace=None) -> dict:
    """Which sensor-behavior detectors fire for one robot-timestep.

    ``rng_trace`` is the random-turn outcome ("left", "right", None) or a
    StepTrace carrying it.
    """
    arr = frame.to_array() if isinstance(frame, SensorFrame) else np.asarray(frame, dtype=np.int64)
    flags = np.zeros(N_DETECTORS, dtype=np.int64)
    detect_kernel(arr, _mask(behaviors), _turn_code(rng_trace), flags)
    return {n: bool(v) for n, v in zip(DETECTOR_NAMES, flags)}


@dataclass
class InstrumentedRun:
    fitness: float
    detectors: DetectorCounts
    activity: Optional[np.ndarray]  # (timesteps * robots, n_decision) uint8, or None


def instrumented_run(controller, scenario: ScenarioConfig, seed: int, timesteps: Optional[int] = None,
                     robots: Optional[int] = None, log_activity: bool = False) -> InstrumentedRun:
    """Run one scenario step by step, counting detector hits.

    With ``log_activity`` and a network controller, records the decision-neuron
    states of every robot-timestep (rows ordered by timestep, then robot).
    Observation never alters the trajectory: the result matches the batched
    kernels exactly.
    """
    steps = scenario.timesteps if timesteps is None else timesteps
    ws = scenario.make(seed, robots)
    rng = SimRng(seed)
    bp = ws.blueprint
    frame = np.zeros(N_SENSORS, dtype=np.int64)
    trace = np.zeros(4, dtype=np.int64)
    flags = np.zeros(N_DETECTORS, dtype=np.int64)
    counts = DetectorCounts()
    tissue = getattr(controller, "tissue", None)
    scratch = NetworkScratch(tissue) if tissue is not None else None
    rows = []
    for _ in range(steps):
        for r in range(ws.n_robots):
            sense_kernel(ws.heights, bp.kind, bp.depth, ws.robots, r, ws.cell_area, frame)
            if scratch is not None:
                mask = scratch.run(tissue, frame)
                if log_activity:
                    rows.append(scratch.d_state.astype(np.uint8).copy())
            else:
                mask = _mask(controller.decide(frame))
            execute_kernel(ws.heights, ws.robots, r, mask, rng.state, ws.cell_area,
                           float(DEFAULT_CAPACITY), float(THROTTLE_CAPACITY), trace)
            detect_kernel(frame, mask, trace[TR_RANDOM_DIR], flags)
            counts.add(flags)
        ws.t += 1
    activity = None
    if log_activity and tissue is not None:
        activity = np.array(rows, dtype=np.uint8).reshape(len(rows), tissue.n_decision)
    return InstrumentedRun(float(fitness_kernel(ws.heights, bp.kind, bp.depth)), counts, activity)


def write_activity(path, activity: np.ndarray) -> None:
    """ASCII bit matrix: one row per robot-timestep, one column per decision neuron."""
    with open(path, "w") as fh:
        fh.write(f"# rows={activity.shape[0]} decision_neurons={activity.shape[1]}\n")
        for row in activity:
            fh.write("".join("1" if v else "0" for v in row) + "\n")


def read_activity(path) -> np.ndarray:
    rows = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        return np.zeros((0, 0), dtype=np.uint8)
    return np.array([[c == "1" for c in r] for r in rows], dtype=np.uint8)


def duty_cycle(activity: np.ndarray) -> np.ndarray:
    """Fraction of robot-timesteps each decision neuron spent active."""
    if activity.shape[0] == 0:
        return np.zeros(activity.shape[1])
    return activity.mean(axis=0)


# --------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = ("controller", "robots", "area", "depth", "timesteps", "reps", "seed_base",
                 "mean_fitness", "std_fitness")


@dataclass
class SweepCell:
    controller: str
    robots: int
    area: tuple
    depth: int
    timesteps: int
    reps: int
    seed_base: int
    mean_fitness: float
    std_fitness: float
    fitness: np.ndarray = field(repr=False, default=None)

    def row(self) -> list:
        return [self.controller, self.robots, f"{self.area[0]}x{self.area[1]}", self.depth,
                self.timesteps, self.reps, self.seed_base, repr(self.mean_fitness), repr(self.std_fitness)]


@dataclass
class SweepResult:
    cells: list = field(default_factory=list)

    def __len__(self):
        return len(self.cells)

    def lookup(self, robots=None, area=None, depth=None) -> list:
        return [c for c in self.cells if (robots is None or c.robots == robots)
                and (area is None or tuple(c.area) == tuple(area))
                and (depth is None or c.depth == depth)]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_COLUMNS)
            for c in self.cells:
                w.writerow(c.row())


def scalability_sweep(controller, robots_range: Iterable[int], areas: Iterable[tuple],
                      depths: Iterable[int], reps: int, timesteps: int, seed_base: int = 0,
                      name: Optional[str] = None, blueprint=None) -> SweepResult:
    """Mean and spread of final fitness over a (robots, area, depth) grid.

    Every cell uses scenario seeds seed_base .. seed_base + reps - 1, so cells
    differ only in the swept parameters.
    """
    robots_range, areas, depths = list(robots_range), [tuple(a) for a in areas], list(depths)
    if not robots_range or not areas or not depths:
        raise ValueError("sweep ranges must be non-empty")
    if reps < 0:
        raise ValueError("reps must be nonnegative")
    result = SweepResult()
    if reps == 0:
        return result
    label = name or getattr(controller, "name", "controller")
    seeds = list(range(seed_base, seed_base + reps))
    for area in areas:
        for depth in depths:
            sc = ScenarioConfig(area, depth, 1, timesteps, blueprint)
            for n in robots_range:
                fit, _ = evaluate_batch(controller, sc, seeds, timesteps, robots=n)
                result.cells.append(SweepCell(label, int(n), area, int(depth), int(timesteps), reps,
                                              seed_base, float(fit.mean()), float(fit.std()), fit))
    return result


# --------------------------------------------------------------------------
# evolvable team size

@dataclass
class RobotCountHistogram:
    values: np.ndarray  # the N values 1..10
    counts: np.ndarray
    chi2: float
    p_value: float

    @property
    def mode(self) -> int:
        return int(self.values[int(np.argmax(self.counts))])

    def is_uniform(self, alpha: float = 0.01) -> bool:
        return self.p_value >= alpha


def robot_count_histogram(archives) -> RobotCountHistogram:
    """Histogram of population-best N, one entry per run, with a uniform-null test.

    Each archive is an EvolutionResult, a metrics CSV path (the last row's
    n_best is used) or a plain integer.
    """
    ns = []
    for a in archives:
        if isinstance(a, (int, np.integer)):
            ns.append(int(a))
        elif hasattr(a, "best_n_per_generation"):
            ns.append(int(a.best_n_per_generation[-1]))
        else:
            with open(a, newline="") as fh:
                rows = list(csv.DictReader(fh))
            if not rows:
                raise ValueError(f"{a}: metrics file has no rows")
            ns.append(int(rows[-1]["n_best"]))
    if not ns:
        raise ValueError("no runs to histogram")
    lo, hi = ROBOT_COUNT_RANGE
    values = np.arange(lo, hi + 1)
    if min(ns) < lo or max(ns) > hi:
        raise ValueError(f"robot counts outside {lo}..{hi}")
    counts = np.array([ns.count(int(v)) for v in values], dtype=np.int64)
    chi2, p = stats.chisquare(counts)
    return RobotCountHistogram(values, counts, float(chi2), float(p))


def read_metrics(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
