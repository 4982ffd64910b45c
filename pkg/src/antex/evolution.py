"""Genetic algorithm over tissue genomes.

Generation loop: evaluate every member on a shared set of scenario seeds,
copy the best member unchanged, then fill the rest of the population with
tournament-selected parents that go through crossover (probability pc),
parameter mutation and cell replication.
"""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .baselines import NetworkController, fixed_topology_genome
from .frames import N_BEHAVIORS, N_INPUTS
from .sim import DETECTOR_NAMES, N_DETECTORS, Blueprint, ScenarioConfig, evaluate_batch, scenario_stack
from .tissue import (
    FACE_NEIGHBOURS, MAX_EXTENT, MIN_EXTENT, NOMINAL_INPUTS, DECISION_RATIO_RANGE, ROBOT_COUNT_RANGE, ActivationParams,
    DecisionNeuronGene, DevelopmentError, Genome, MotorNeuronGene, develop, random_decision_gene,
    random_genome, random_motor_gene, save_genome,
)

METRIC_COLUMNS = ("generation", "best_fitness", "mean_fitness", "neuron_count_best", "n_best") + DETECTOR_NAMES


@dataclass
class EvolutionConfig:
    population_size: int = 100
    crossover_probability: float = 0.7
    mutation_probability: float = 0.025
    tournament_fraction: float = 0.06
    generations: int = 5000
    scenarios_per_eval: int = 100
    initial_neuron_range: tuple = (40, 120)
    evolvable_robot_count: bool = False
    rng_seed: int = 0
    robots: int = 4
    area: tuple = (8, 8)
    depth: int = 1
    timesteps: int = 250
    controller: str = "ant"  # "ant" or "fixed"
    elitism: int = 1
    freeze_scenarios: bool = False
    max_cells: int = 400
    blueprint: Optional[str] = None  # ASCII blueprint text overriding area/depth

    def __post_init__(self):
        self.initial_neuron_range = tuple(int(v) for v in self.initial_neuron_range)
        self.area = tuple(int(v) for v in self.area)
        lo, hi = self.initial_neuron_range
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if not 1 <= lo <= hi:
            raise ValueError("initial_neuron_range must satisfy 1 <= lo <= hi")
        if not (0.0 <= self.crossover_probability <= 1.0 and 0.0 <= self.mutation_probability <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.generations < 0 or self.scenarios_per_eval < 1 or self.timesteps < 1:
            raise ValueError("generations >= 0, scenarios >= 1 and timesteps >= 1 required")
        if self.controller not in ("ant", "fixed"):
            raise ValueError("controller must be 'ant' or 'fixed'")
        if not 0 <= self.elitism <= self.population_size:
            raise ValueError("elitism outside [0, population_size]")

    @property
    def tournament_size(self) -> int:
        return max(1, int(round(self.tournament_fraction * self.population_size)))

    def scenario(self) -> ScenarioConfig:
        bp = Blueprint.from_ascii(self.blueprint) if self.blueprint else None
        return ScenarioConfig(self.area, self.depth, self.robots, self.timesteps, bp)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["initial_neuron_range"] = list(self.initial_neuron_range)
        d["area"] = list(self.area)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvolutionConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


PROFILES = {
    "paper": dict(population_size=100, generations=5000, scenarios_per_eval=100, timesteps=250),
    "desk": dict(population_size=40, generations=800, scenarios_per_eval=10, timesteps=250),
}


def profile_config(name: str, **overrides) -> EvolutionConfig:
    if name not in PROFILES:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    params = dict(PROFILES[name])
    params.update({k: v for k, v in overrides.items() if v is not None})
    return EvolutionConfig(**params)


@dataclass
class EvaluatedGenome:
    genome: Genome
    fitness: float
    scenario_fitness: np.ndarray
    detectors: np.ndarray = field(default_factory=lambda: np.zeros(N_DETECTORS, dtype=np.int64))
    n_neurons: int = 0


@dataclass
class RunMetrics:
    generation: int
    best_fitness: float
    mean_fitness: float
    neuron_count_best: int
    n_best: int
    detectors: tuple

    def row(self) -> list:
        return [self.generation, repr(float(self.best_fitness)), repr(float(self.mean_fitness)),
                self.neuron_count_best, self.n_best, *[int(v) for v in self.detectors]]


# --------------------------------------------------------------------------
# evaluators (picklable, so they can cross a process boundary)

class ExcavationEvaluator:
    """Mean final fitness of a genome's controller over seeded scenarios."""

    def __init__(self, config: EvolutionConfig):
        self.config = config
        self.scenario = config.scenario()
        self._stacks = {}  # one generation shares its scenario seeds

    def __getstate__(self):
        return {"config": self.config, "scenario": self.scenario, "_stacks": {}}

    def robots_for(self, genome: Genome) -> int:
        if self.config.evolvable_robot_count and genome.tissue.robot_count is not None:
            return genome.tissue.robot_count
        return self.config.robots

    def __call__(self, genome: Genome, seeds) -> EvaluatedGenome:
        try:
            ctrl = NetworkController(genome)
        except DevelopmentError:
            zeros = np.zeros(len(seeds))
            return EvaluatedGenome(genome, 0.0, zeros, np.zeros(N_DETECTORS, dtype=np.int64), 0)
        robots = self.robots_for(genome)
        key = (tuple(int(x) for x in seeds), robots)
        stack = self._stacks.get(key)
        if stack is None:
            if len(self._stacks) > 32:
                self._stacks.clear()
            stack = self._stacks[key] = scenario_stack(self.scenario, key[0], robots)
        fit, det = evaluate_batch(ctrl, self.scenario, seeds, self.config.timesteps,
                                  robots=robots, stack=stack)
        return EvaluatedGenome(genome, float(fit.mean()), fit, det.sum(axis=0), ctrl.tissue.n_neurons)


class StubEvaluator:
    """Cheap fitness that ignores the robot count entirely.

    Prefers genomes with about ``target`` cell genes; used as a null model for
    the evolvable team-size statistics.
    """

    def __init__(self, target: int = 60):
        self.target = target

    def __call__(self, genome: Genome, seeds) -> EvaluatedGenome:
        f = 1.0 / (1.0 + abs(len(genome.genes) - self.target))
        per = np.full(len(seeds), f)
        return EvaluatedGenome(genome, f, per, np.zeros(N_DETECTORS, dtype=np.int64), len(genome.genes))


def _evaluate_one(args):
    evaluator, genome, seeds = args
    return evaluator(genome, seeds)


# --------------------------------------------------------------------------
# variation operators

def _random_robot_count(rng) -> int:
    lo, hi = ROBOT_COUNT_RANGE
    return int(rng.integers(lo, hi + 1))


def _fixed_dims(n_cells: int) -> tuple:
    per_layer = max(1, int(np.ceil(n_cells / 4)))
    w = max(1, int(np.ceil(np.sqrt(per_layer))))
    return w, max(1, int(np.ceil(per_layer / w)))


def init_population(config: EvolutionConfig, rng) -> list:
    lo, hi = config.initial_neuron_range
    pop = []
    for _ in range(config.population_size):
        n = int(rng.integers(lo, hi + 1))
        n_robots = _random_robot_count(rng) if config.evolvable_robot_count else None
        if config.controller == "fixed":
            w, l = _fixed_dims(n)
            pop.append(fixed_topology_genome(rng, w, l, robot_count=n_robots))
        else:
            pop.append(random_genome(rng, n, robot_count=n_robots))
    return pop


def tournament_select(fitnesses, tournament_size: int, rng) -> int:
    """Index of the fittest of ``tournament_size`` distinct random members.

    Ties go to the lowest index; the size is clamped to the population.
    """
    fit = np.asarray(fitnesses, dtype=np.float64)
    if fit.size == 0:
        raise ValueError("empty population")
    k = min(max(1, int(tournament_size)), fit.size)
    picks = np.sort(rng.choice(fit.size, size=k, replace=False))
    return int(picks[np.argmax(fit[picks])])


def _first_index_by_position(genome: Genome) -> dict:
    out = {}
    for i, g in enumerate(genome.genes):
        out.setdefault(g.position, i)
    return out


def crossover(parent_a: Genome, parent_b: Genome, rng) -> tuple:
    """Plane crossover under the compatibility criterion.

    Child 1 takes its gene list and tissue gene from the parent chosen by a
    random affinity bit, child 2 from the other.  A plane normal to the l or
    m axis splits the lattice; on the side away from the origin, genes that
    sit at the same position in both parents and agree on expression are
    swapped between the children.  Everything else passes through.
    """
    affinity = int(rng.integers(2))
    first, second = (parent_a, parent_b) if affinity == 0 else (parent_b, parent_a)
    c1, c2 = first.copy(), second.copy()
    axis = int(rng.integers(2))
    coords = [tuple(p)[axis] for p in first.positions() + second.positions()]
    lo, hi = min(coords), max(coords)
    cut = int(rng.integers(lo, hi + 1))

    def far(pos) -> bool:
        v = tuple(pos)[axis]
        return v > cut if cut >= 0 else v <= cut

    idx1 = _first_index_by_position(c1)
    idx2 = _first_index_by_position(c2)
    for pos in sorted(idx1):
        if not far(pos) or pos not in idx2:
            continue
        i, j = idx1[pos], idx2[pos]
        if c1.genes[i].expressed != c2.genes[j].expressed:
            continue
        c1.genes[i], c2.genes[j] = c2.genes[j], c1.genes[i]
    return c1, c2


def _mutate_activation(act: ActivationParams, pm, u) -> ActivationParams:
    # u: 8 uniforms, first four decide, last four supply fresh values
    new = ActivationParams.__new__(ActivationParams)
    new.k1 = int(u[4] < 0.5) if u[0] < pm else act.k1
    new.k2 = int(u[5] < 0.5) if u[1] < pm else act.k2
    new.theta1 = float(2.0 * u[6] - 1.0) if u[2] < pm else act.theta1
    new.theta2 = float(2.0 * u[7] - 1.0) if u[3] < pm else act.theta2
    return new


def _redraw_block(values, pm, u):
    n = values.shape[0]
    return np.where(u[:n] < pm, 2.0 * u[n:2 * n] - 1.0, values)


MOTOR_DRAWS = 8 + 4 + 2 * NOMINAL_INPUTS + 2 * N_INPUTS + 2
DECISION_DRAWS = 8 + 4 + 2 * N_INPUTS + 2 + 6


def mutate(genome: Genome, pm: float, rng) -> Genome:
    """Per-parameter redraw with probability pm; flags toggle with probability pm.

    The seed gene is never repressed so every mutant still develops.  Fixed
    topologies keep their flags and only have parameters redrawn.  Each gene
    consumes one block of uniforms so the cost stays flat in Python.
    """
    g = genome.copy()
    topo = g.kind == "ant"
    t = g.tissue
    u = rng.random(3)
    if topo and u[0] < pm:
        t.replication_probability = float(rng.random())
    if topo and u[1] < pm:
        t.neuron_replication_ratio = float(rng.uniform(*DECISION_RATIO_RANGE))
    if t.robot_count is not None and u[2] < pm:
        t.robot_count = _random_robot_count(rng)
    for i, gene in enumerate(g.genes):
        motor = gene.kind == "motor"
        u = rng.random(MOTOR_DRAWS if motor else DECISION_DRAWS)
        gene.activation = _mutate_activation(gene.activation, pm, u[:8])
        if topo and u[8] < pm and i != t.seed_address:
            gene.expressed = not gene.expressed
        if topo and u[9] < pm:
            gene.cell_death = not gene.cell_death
        if u[10] < pm:
            gene.replication_weight = float(u[11])
        o = 12
        if motor:
            gene.weights = _redraw_block(gene.weights, pm, u[o:o + 2 * NOMINAL_INPUTS])
            o += 2 * NOMINAL_INPUTS
            gene.sensor_weights = _redraw_block(gene.sensor_weights, pm, u[o:o + 2 * N_INPUTS])
            o += 2 * N_INPUTS
            if u[o] < pm:
                b = min(int(u[o + 1] * (N_BEHAVIORS + 1)), N_BEHAVIORS)
                gene.output_binding = b or None
        else:
            gene.input_weights = _redraw_block(gene.input_weights, pm, u[o:o + 2 * N_INPUTS])
            o += 2 * N_INPUTS
            if u[o] < pm:
                gene.concentration = float(u[o + 1])
            o += 2
            ext = gene.field_extent
            gene.field_extent = tuple(
                MIN_EXTENT + min(int(u[o + 3 + d] * (MAX_EXTENT + 1 - MIN_EXTENT)), MAX_EXTENT - MIN_EXTENT) if u[o + d] < pm else ext[d]
                for d in range(3))
    return g


def _flat(gene) -> np.ndarray:
    """Parameter vector; both cell types share the leading block."""
    act = gene.activation
    head = [act.k1, act.k2, act.theta1, act.theta2]
    if isinstance(gene, MotorNeuronGene):
        tail = list(gene.weights) + [gene.output_binding or 0]
        w = gene.sensor_weights
    else:
        tail = [gene.concentration, *gene.field_extent]
        w = gene.input_weights
    return np.array(head + list(w) + [gene.replication_weight] + tail, dtype=np.float64)


SHARED_PREFIX = 4 + N_INPUTS + 1


def _unflat(template, vec):
    act = ActivationParams(int(vec[0]), int(vec[1]), float(vec[2]), float(vec[3]))
    w = vec[4:4 + N_INPUTS].copy()
    rw = float(vec[4 + N_INPUTS])
    tail = vec[SHARED_PREFIX:]
    if isinstance(template, MotorNeuronGene):
        b = int(tail[NOMINAL_INPUTS])
        return MotorNeuronGene(template.position, tail[:NOMINAL_INPUTS].copy(), w, act,
                               output_binding=b or None, replication_weight=rw)
    return DecisionNeuronGene(template.position, w, act, concentration=float(tail[0]),
                              field_extent=tuple(int(v) for v in tail[1:4]), replication_weight=rw)


def replicate_cell(genome: Genome, rng, max_cells: Optional[int] = None) -> Genome:
    """Gene duplication into a free face-neighbour slot, with probability Tr.

    The parent is the expressed gene with the highest replication weight.
    The daughter copies the first m% (m uniform in [50, 100]) of the parent's
    parameter vector and redraws the rest; its type is a decision neuron with
    probability equal to the tissue's replication ratio.
    """
    if genome.kind != "ant":
        return genome
    t = genome.tissue
    if rng.random() >= t.replication_probability:
        return genome
    if max_cells is not None and len(genome.genes) >= max_cells:
        return genome
    expressed = [i for i, g in enumerate(genome.genes) if g.expressed]
    if not expressed:
        return genome
    parent_i = max(expressed, key=lambda i: (genome.genes[i].replication_weight, -i))
    parent = genome.genes[parent_i]
    taken = genome.occupied()
    free = [parent.position.shifted(*d) for d in FACE_NEIGHBOURS]
    free = [p for p in free if p.in_bounds() and p not in taken]
    if not free:
        return genome
    pos = free[int(rng.integers(len(free)))]
    m = rng.uniform(50.0, 100.0)
    if rng.random() < t.neuron_replication_ratio:
        daughter = random_decision_gene(rng, pos)
    else:
        daughter = random_motor_gene(rng, pos)
    src = _flat(parent)
    dst = _flat(daughter)
    ncopy = int(np.floor(len(src) * m / 100.0))
    if type(parent) is not type(daughter):
        ncopy = min(ncopy, SHARED_PREFIX)
    dst[:ncopy] = src[:ncopy]
    out = genome.copy()
    out.genes.append(_unflat(daughter, dst))
    return out


# --------------------------------------------------------------------------
# generation loop

def scenario_seeds(config: EvolutionConfig, generation: int) -> list:
    gen = 0 if config.freeze_scenarios else generation
    ss = np.random.SeedSequence([config.rng_seed & 0xFFFFFFFFFFFFFFFF, gen])
    return [int(v) for v in ss.generate_state(config.scenarios_per_eval, dtype=np.uint32)]


class PopulationEvaluator:
    """Maps an evaluator over a population, optionally across processes.

    Results come back in population order whatever the worker count.
    """

    def __init__(self, evaluator: Callable, workers: int = 1):
        self.evaluator = evaluator
        self.workers = max(1, int(workers))
        self._pool = ProcessPoolExecutor(self.workers) if self.workers > 1 else None

    def __call__(self, genomes, seeds) -> list:
        if self._pool is None:
            return [self.evaluator(g, seeds) for g in genomes]
        jobs = [(self.evaluator, g, seeds) for g in genomes]
        chunk = max(1, len(jobs) // (self.workers * 4))
        return list(self._pool.map(_evaluate_one, jobs, chunksize=chunk))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def summarize(generation: int, evaluated: list, config: EvolutionConfig) -> RunMetrics:
    fits = np.array([e.fitness for e in evaluated])
    b = int(np.argmax(fits))
    best = evaluated[b]
    n = best.genome.tissue.robot_count if config.evolvable_robot_count else config.robots
    return RunMetrics(generation, float(fits[b]), float(fits.mean()), int(best.n_neurons),
                      int(n if n is not None else config.robots), tuple(int(v) for v in best.detectors))


def breed(evaluated: list, config: EvolutionConfig, rng) -> list:
    """Next population from an evaluated one."""
    fits = np.array([e.fitness for e in evaluated])
    order = np.argsort(-fits, kind="stable")
    nxt = [evaluated[i].genome.copy() for i in order[:config.elitism]]
    ts = config.tournament_size
    while len(nxt) < config.population_size:
        a = evaluated[tournament_select(fits, ts, rng)].genome
        b = evaluated[tournament_select(fits, ts, rng)].genome
        if rng.random() < config.crossover_probability:
            kids = crossover(a, b, rng)
        else:
            kids = (a.copy(), b.copy())
        for kid in kids:
            if len(nxt) >= config.population_size:
                break
            kid = mutate(kid, config.mutation_probability, rng)
            kid = replicate_cell(kid, rng, config.max_cells)
            nxt.append(kid)
    return nxt


def run_generation(population: list, evaluate: Callable, config: EvolutionConfig, rng,
                   generation: int = 0):
    """Evaluate ``population`` and breed its successor.

    Returns (next population, metrics, evaluated members).
    """
    seeds = scenario_seeds(config, generation)
    evaluated = evaluate(population, seeds)
    metrics = summarize(generation, evaluated, config)
    return breed(evaluated, config, rng), metrics, evaluated


@dataclass
class EvolutionResult:
    best: EvaluatedGenome
    history: list
    best_n_per_generation: list


def metrics_csv_header() -> str:
    return ",".join(METRIC_COLUMNS) + "\n"


def format_metrics_row(m: RunMetrics) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(m.row())
    return buf.getvalue()


def evolve(config: EvolutionConfig, evaluator: Optional[Callable] = None, workers: int = 1,
           out_dir=None, checkpoint_every: int = 0, log: Optional[Callable] = None) -> EvolutionResult:
    """Run ``config.generations`` generations (plus the initial evaluation).

    With ``out_dir`` set, writes metrics.csv, config.json, best_genome.json and
    periodic checkpoints.  Generation g's metrics describe the population
    that was evaluated at generation g.
    """
    rng = np.random.default_rng(config.rng_seed)
    evaluator = evaluator or ExcavationEvaluator(config)
    population = init_population(config, rng)
    out = Path(out_dir) if out_dir is not None else None
    fh = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
        fh = open(out / "metrics.csv", "w", newline="")
        fh.write(metrics_csv_header())
    history = []
    best_overall = None
    try:
        with PopulationEvaluator(evaluator, workers) as pe:
            for gen in range(config.generations + 1):
                seeds = scenario_seeds(config, gen)
                evaluated = pe(population, seeds)
                m = summarize(gen, evaluated, config)
                history.append(m)
                best_now = max(evaluated, key=lambda e: e.fitness)
                if best_overall is None or best_now.fitness >= best_overall.fitness:
                    best_overall = best_now
                if fh is not None:
                    fh.write(format_metrics_row(m))
                    fh.flush()
                if out is not None and checkpoint_every and gen % checkpoint_every == 0:
                    ck = out / "checkpoints"
                    ck.mkdir(exist_ok=True)
                    save_genome(best_now.genome, ck / f"gen_{gen:05d}.json")
                if log is not None:
                    log(m)
                if gen < config.generations:
                    population = breed(evaluated, config, rng)
    finally:
        if fh is not None:
            fh.close()
    final_best = max(evaluated, key=lambda e: e.fitness)
    if out is not None:
        save_genome(final_best.genome, out / "best_genome.json")
    return EvolutionResult(final_best, history, [m.n_best for m in history])


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover
        return max(1, os.cpu_count() or 1)
