"""Artificial neural tissue: genome encoding, development and inference.

A genome is a tissue gene plus an ordered list of cell genes.  Development
grows each expressed cell gene into a neuron on a 3-D lattice (four motor
layers, n = 0..3, above a one-hot sensor input layer).  At every timestep the
decision neurons read all sensor inputs; active ones release a uniform
chemical over an axis-aligned box.  Concentrations add up per lattice cell and
only motor neurons sitting at the tissue-wide concentration maximum compute,
so the sums of the weighted input run over active neurons only.  Top-layer
motor neurons bound to a behavior vote on it; a behavior fires when at least
half of its active voters are on.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._jit import njit
from .frames import (
    N_BEHAVIORS, N_INPUTS, N_SENSORS, BehaviorVector, SensorFrame, active_inputs, one_hot,
)

N_LAYERS = 4
TOP_LAYER = N_LAYERS - 1
NOMINAL_INPUTS = 9  # 3x3 block one layer below
MAX_EXTENT = 3
MIN_EXTENT = 1  # a zero-extent box gates a single lattice cell, which rarely hits a motor neuron
DECISION_RATIO_RANGE = (0.05, 0.2)
ROBOT_COUNT_RANGE = (1, 10)
GENOME_FORMAT = "antex-genome"
GENOME_VERSION = 1

# (dl, dm) offsets of the nominal input set, in weight order
NOMINAL_OFFSETS = tuple((dl, dm) for dl in (-1, 0, 1) for dm in (-1, 0, 1))
# face neighbours used for cell replication: top, bottom, north, south, east, west
FACE_NEIGHBOURS = ((0, 0, 1), (0, 0, -1), (0, 1, 0), (0, -1, 0), (1, 0, 0), (-1, 0, 0))


class DevelopmentError(ValueError):
    """The genome cannot be grown into a tissue."""


class GenomeFormatError(ValueError):
    """A serialized genome document is malformed."""


@dataclass(frozen=True, order=True)
class LatticePosition:
    l: int
    m: int
    n: int

    def __iter__(self):
        return iter((self.l, self.m, self.n))

    def shifted(self, dl=0, dm=0, dn=0) -> "LatticePosition":
        return LatticePosition(self.l + dl, self.m + dm, self.n + dn)

    def in_bounds(self) -> bool:
        return 0 <= self.n < N_LAYERS


@dataclass
class ActivationParams:
    """Selector bits and thresholds of the modular activation function.

    (k1, k2) = (0, 0) down, (0, 1) up, (1, 0) ditch, (1, 1) mound.
    """

    k1: int
    k2: int
    theta1: float
    theta2: float

    def __post_init__(self):
        if self.k1 not in (0, 1) or self.k2 not in (0, 1):
            raise ValueError("k1 and k2 must be 0 or 1")
        if not (np.isfinite(self.theta1) and np.isfinite(self.theta2)):
            raise ValueError("thresholds must be finite")


@dataclass
class MotorNeuronGene:
    position: LatticePosition
    weights: np.ndarray  # over the 3x3 nominal input set
    sensor_weights: np.ndarray  # over the sensor layer, used on layer 0
    activation: ActivationParams
    expressed: bool = True
    cell_death: bool = False
    output_binding: Optional[int] = None  # behavior number 1..12
    replication_weight: float = 0.5

    kind = "motor"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.sensor_weights = np.asarray(self.sensor_weights, dtype=np.float64)
        if self.weights.shape != (NOMINAL_INPUTS,) or self.sensor_weights.shape != (N_INPUTS,):
            raise ValueError("motor gene weight arity mismatch")
        if self.output_binding is not None and not 1 <= self.output_binding <= N_BEHAVIORS:
            raise ValueError(f"output_binding {self.output_binding} outside 1..{N_BEHAVIORS}")


@dataclass
class DecisionNeuronGene:
    position: LatticePosition
    input_weights: np.ndarray  # over the sensor layer
    activation: ActivationParams
    concentration: float
    field_extent: tuple  # half-extents (dl, dm, dn) of the box of influence
    expressed: bool = True
    cell_death: bool = False
    replication_weight: float = 0.5

    kind = "decision"

    def __post_init__(self):
        self.input_weights = np.asarray(self.input_weights, dtype=np.float64)
        self.field_extent = tuple(int(v) for v in self.field_extent)
        if self.input_weights.shape != (N_INPUTS,):
            raise ValueError("decision gene weight arity mismatch")
        if len(self.field_extent) != 3 or min(self.field_extent) < 0:
            raise ValueError("field_extent must be three nonnegative integers")
        if self.concentration < 0:
            raise ValueError("concentration must be nonnegative")


CellGene = Union[MotorNeuronGene, DecisionNeuronGene]


@dataclass
class TissueGene:
    replication_probability: float  # Tr
    neuron_replication_ratio: float  # probability a new cell is a decision neuron
    seed_address: int  # index of the seed cell gene
    robot_count: Optional[int] = None  # evolvable team size


@dataclass
class Genome:
    tissue: TissueGene
    genes: list = field(default_factory=list)
    kind: str = "ant"  # "ant" or "fixed" (no decision neurons, no gating)

    def copy(self) -> "Genome":
        # hot in breeding; deepcopy was most of a generation's wall time
        return Genome(_shallow(self.tissue), [_copy_gene(g) for g in self.genes], self.kind)

    @property
    def gated(self) -> bool:
        return self.kind == "ant"

    def positions(self) -> list:
        return [g.position for g in self.genes]

    def occupied(self) -> set:
        return {g.position for g in self.genes}

    def __len__(self):
        return len(self.genes)


def _shallow(obj):
    new = object.__new__(type(obj))
    new.__dict__.update(obj.__dict__)
    return new


def _copy_gene(g):
    new = _shallow(g)
    new.activation = _shallow(g.activation)
    if g.kind == "motor":
        new.weights = g.weights.copy()
        new.sensor_weights = g.sensor_weights.copy()
    else:
        new.input_weights = g.input_weights.copy()
    return new


# --------------------------------------------------------------------------
# random initialisation (used by evolution and mutation redraws)

def random_activation(rng) -> ActivationParams:
    k = rng.integers(0, 2, size=2)
    th = rng.uniform(-1.0, 1.0, size=2)
    return ActivationParams(int(k[0]), int(k[1]), float(th[0]), float(th[1]))


def random_binding(rng) -> Optional[int]:
    b = int(rng.integers(0, N_BEHAVIORS + 1))
    return b or None


def random_extent(rng) -> tuple:
    return tuple(int(v) for v in rng.integers(MIN_EXTENT, MAX_EXTENT + 1, size=3))


def random_motor_gene(rng, position: LatticePosition) -> MotorNeuronGene:
    return MotorNeuronGene(
        position=position,
        weights=rng.uniform(-1.0, 1.0, NOMINAL_INPUTS),
        sensor_weights=rng.uniform(-1.0, 1.0, N_INPUTS),
        activation=random_activation(rng),
        output_binding=random_binding(rng),
        replication_weight=float(rng.random()),
    )


def random_decision_gene(rng, position: LatticePosition) -> DecisionNeuronGene:
    return DecisionNeuronGene(
        position=position,
        input_weights=rng.uniform(-1.0, 1.0, N_INPUTS),
        activation=random_activation(rng),
        concentration=float(rng.random()),
        field_extent=random_extent(rng),
        replication_weight=float(rng.random()),
    )


def random_genome(rng, n_cells: int, decision_ratio: Optional[float] = None,
                  robot_count: Optional[int] = None, kind: str = "ant") -> Genome:
    """Random genome with ``n_cells`` genes packed into a square-based block.

    The block is sized so that each of the four layers is roughly 80% full,
    which keeps most 3x3 nominal input sets populated.
    """
    if n_cells < 1:
        raise ValueError("a genome needs at least one cell gene")
    if decision_ratio is None:
        decision_ratio = float(rng.uniform(*DECISION_RATIO_RANGE)) if kind == "ant" else 0.0
    side = max(1, int(np.ceil(np.sqrt(n_cells / (N_LAYERS * 0.8)))))
    cells = side * side * N_LAYERS
    slots = rng.choice(cells, size=n_cells, replace=False)
    genes = []
    for s in slots:
        n, rem = divmod(int(s), side * side)
        pos = LatticePosition(rem // side, rem % side, n)
        if kind == "ant" and rng.random() < decision_ratio:
            genes.append(random_decision_gene(rng, pos))
        else:
            genes.append(random_motor_gene(rng, pos))
    tissue = TissueGene(
        replication_probability=float(rng.random()),
        neuron_replication_ratio=decision_ratio,
        seed_address=0,
        robot_count=robot_count,
    )
    return Genome(tissue, genes, kind)


# --------------------------------------------------------------------------
# activation functions

@njit
def weighted_input(weights, states):
    """Normalized weighted input: sum(w*s) / sum(s), zero when both vanish."""
    num = 0.0
    den = 0.0
    for i in range(weights.shape[0]):
        num += weights[i] * states[i]
        den += states[i]
    if den == 0.0:
        return 0.0
    return num / den


@njit
def _modular(sigma, k1, k2, theta1, theta2):
    if k1 == 0:
        if k2 == 0:  # down
            return 0 if sigma >= theta1 else 1
        return 0 if sigma <= theta2 else 1  # up
    lo = min(theta1, theta2)
    hi = max(theta1, theta2)
    if k2 == 0:  # ditch
        return 0 if lo <= sigma < hi else 1
    return 0 if (sigma <= lo or sigma > hi) else 1  # mound


def modular_activation(sigma: float, params: ActivationParams) -> int:
    return int(_modular(float(sigma), params.k1, params.k2, params.theta1, params.theta2))


# --------------------------------------------------------------------------
# development

@dataclass
class Tissue:
    """Developed phenotype, laid out as flat arrays for the inference kernel.

    Motor neurons are sorted by (layer, l, m).  ``motor_inputs[i, j]`` indexes
    the motor neuron feeding nominal input j of neuron i (-1 when the slot is
    empty, dead or not a motor neuron).  ``cover[d, i]`` says whether decision
    neuron d's box contains motor neuron i.
    """

    motor_positions: list
    motor_layer: np.ndarray
    motor_inputs: np.ndarray
    motor_weights: np.ndarray
    motor_sensor_weights: np.ndarray
    motor_k: np.ndarray
    motor_theta: np.ndarray
    motor_binding: np.ndarray  # 0-based behavior index, -1 when not an output
    decision_positions: list
    decision_weights: np.ndarray
    decision_k: np.ndarray
    decision_theta: np.ndarray
    decision_concentration: np.ndarray
    decision_extent: np.ndarray
    cover: np.ndarray
    gated: bool = True
    dormant: list = field(default_factory=list)  # positions held by dead cells

    @property
    def n_motor(self) -> int:
        return len(self.motor_positions)

    @property
    def n_decision(self) -> int:
        return len(self.decision_positions)

    @property
    def n_neurons(self) -> int:
        return self.n_motor + self.n_decision

    def kernel_args(self) -> tuple:
        return (self.decision_weights, self.decision_k, self.decision_theta,
                self.decision_concentration, self.cover, self.motor_inputs,
                self.motor_layer, self.motor_weights, self.motor_sensor_weights,
                self.motor_k, self.motor_theta, self.motor_binding, self.gated)

    def structure(self) -> tuple:
        """Hashable summary used for structural comparisons."""
        return (tuple(self.motor_positions), tuple(self.decision_positions), tuple(self.dormant),
                self.motor_inputs.tobytes(), self.motor_binding.tobytes(),
                self.motor_weights.tobytes(), self.motor_sensor_weights.tobytes(),
                self.decision_weights.tobytes(), self.cover.tobytes(), self.gated)


def resolve_positions(genome: Genome) -> dict:
    """Map gene index -> developed lattice position for every gene that grows.

    The seed cell is grown first, then the remaining genes in genome order.
    Repressed genes are not grown; genes that fall outside the four layers or
    onto an occupied slot are skipped (first in genome order wins).  Dead
    cells are included: they occupy their slot.
    """
    genes = genome.genes
    seed = genome.tissue.seed_address
    if not 0 <= seed < len(genes):
        raise DevelopmentError(f"seed address {seed} does not name a cell gene")
    if not genes[seed].expressed:
        raise DevelopmentError(f"seed gene {seed} is repressed")
    if not genes[seed].position.in_bounds():
        raise DevelopmentError(f"seed gene {seed} lies outside the lattice")
    grown = {seed: genes[seed].position}
    taken = {genes[seed].position}
    for i, g in enumerate(genes):
        if i == seed or not g.expressed:
            continue
        if not g.position.in_bounds() or g.position in taken:
            continue
        grown[i] = g.position
        taken.add(g.position)
    return grown


def develop(genome: Genome) -> Tissue:
    grown = resolve_positions(genome)
    motors = []
    decisions = []
    dormant = []
    for i in sorted(grown):
        g = genome.genes[i]
        if g.cell_death:
            dormant.append(g.position)
        elif isinstance(g, MotorNeuronGene):
            motors.append(g)
        elif genome.gated:
            decisions.append(g)
    motors.sort(key=lambda g: (g.position.n, g.position.l, g.position.m))
    index = {g.position: k for k, g in enumerate(motors)}

    nm, nd = len(motors), len(decisions)
    motor_inputs = np.full((nm, NOMINAL_INPUTS), -1, dtype=np.int64)
    for k, g in enumerate(motors):
        p = g.position
        if p.n == 0:
            continue
        for j, (dl, dm) in enumerate(NOMINAL_OFFSETS):
            motor_inputs[k, j] = index.get(p.shifted(dl, dm, -1), -1)

    def stack(values, shape, dtype=np.float64):
        return np.array(values, dtype=dtype).reshape(shape)

    binding = np.array(
        [(g.output_binding - 1) if (g.output_binding and g.position.n == TOP_LAYER) else -1
         for g in motors], dtype=np.int64)
    d_pos = np.array([tuple(g.position) for g in decisions], dtype=np.int64).reshape(nd, 3)
    d_ext = np.array([g.field_extent for g in decisions], dtype=np.int64).reshape(nd, 3)
    m_pos = np.array([tuple(g.position) for g in motors], dtype=np.int64).reshape(nm, 3)
    cover = np.ones((nd, nm), dtype=np.bool_)
    for a in range(3):
        cover &= np.abs(m_pos[None, :, a] - d_pos[:, None, a]) <= d_ext[:, None, a]

    return Tissue(
        motor_positions=[g.position for g in motors],
        motor_layer=np.array([g.position.n for g in motors], dtype=np.int64),
        motor_inputs=motor_inputs,
        motor_weights=stack([g.weights for g in motors], (nm, NOMINAL_INPUTS)),
        motor_sensor_weights=stack([g.sensor_weights for g in motors], (nm, N_INPUTS)),
        motor_k=stack([(g.activation.k1, g.activation.k2) for g in motors], (nm, 2), np.int64),
        motor_theta=stack([(g.activation.theta1, g.activation.theta2) for g in motors], (nm, 2)),
        motor_binding=binding,
        decision_positions=[g.position for g in decisions],
        decision_weights=stack([g.input_weights for g in decisions], (nd, N_INPUTS)),
        decision_k=stack([(g.activation.k1, g.activation.k2) for g in decisions], (nd, 2), np.int64),
        decision_theta=stack([(g.activation.theta1, g.activation.theta2) for g in decisions], (nd, 2)),
        decision_concentration=np.array([g.concentration for g in decisions], dtype=np.float64),
        decision_extent=d_ext,
        cover=cover,
        gated=genome.gated,
        dormant=dormant,
    )


# --------------------------------------------------------------------------
# inference kernels

@njit
def network_step(active_idx, d_w, d_k, d_th, d_c, cover, m_in, m_layer, m_w, m_sw,
                 m_k, m_th, m_bind, gated, d_state, conc, m_active, m_state, votes, voters):
    """One forward pass.  Fills the scratch arrays and returns a 12-bit mask.

    ``active_idx`` lists the active sensor input neurons.  Every state is
    binary, so the sensor-layer sums only visit those indices and the
    denominator of the weighted input is their count.
    """
    n_active = active_idx.shape[0]
    nd = d_w.shape[0]
    nm = m_in.shape[0]
    if gated:
        for i in range(nm):
            conc[i] = 0.0
        for d in range(nd):
            s = 0.0
            for a in range(n_active):
                s += d_w[d, active_idx[a]]
            sigma = s / n_active if n_active > 0 else 0.0
            st = _modular(sigma, d_k[d, 0], d_k[d, 1], d_th[d, 0], d_th[d, 1])
            d_state[d] = st
            if st == 1:
                c = d_c[d]
                for i in range(nm):
                    if cover[d, i]:
                        conc[i] += c
        peak = 0.0
        for i in range(nm):
            if conc[i] > peak:
                peak = conc[i]
        for i in range(nm):
            m_active[i] = peak > 0.0 and conc[i] == peak
    else:
        for i in range(nm):
            m_active[i] = True

    for i in range(nm):
        if not m_active[i]:
            m_state[i] = 0
            continue
        if m_layer[i] == 0:
            s = 0.0
            for a in range(n_active):
                s += m_sw[i, active_idx[a]]
            sigma = s / n_active if n_active > 0 else 0.0
        else:
            num = 0.0
            den = 0.0
            for j in range(m_in.shape[1]):
                src = m_in[i, j]
                if src >= 0 and m_state[src] == 1:
                    num += m_w[i, j]
                    den += 1.0
            sigma = num / den if den > 0.0 else 0.0
        m_state[i] = _modular(sigma, m_k[i, 0], m_k[i, 1], m_th[i, 0], m_th[i, 1])

    for q in range(votes.shape[0]):
        votes[q] = 0.0
        voters[q] = 0
    for i in range(nm):
        q = m_bind[i]
        if q >= 0 and m_active[i]:
            voters[q] += 1
            votes[q] += m_state[i]
    mask = 0
    for q in range(votes.shape[0]):
        if voters[q] > 0 and votes[q] / voters[q] >= 0.5:
            mask |= 1 << q
    return mask


class NetworkScratch:
    """Preallocated buffers for :func:`network_step`."""

    def __init__(self, tissue: Tissue):
        self.active_idx = np.zeros(N_SENSORS, dtype=np.int64)
        self.d_state = np.zeros(tissue.n_decision, dtype=np.int64)
        self.conc = np.zeros(tissue.n_motor, dtype=np.float64)
        self.m_active = np.zeros(tissue.n_motor, dtype=np.bool_)
        self.m_state = np.zeros(tissue.n_motor, dtype=np.int64)
        self.votes = np.zeros(N_BEHAVIORS, dtype=np.float64)
        self.voters = np.zeros(N_BEHAVIORS, dtype=np.int64)

    def run(self, tissue: Tissue, frame) -> int:
        arr = frame.to_array() if isinstance(frame, SensorFrame) else np.asarray(frame, dtype=np.int64)
        active_inputs(arr, self.active_idx)
        return network_step(self.active_idx, *tissue.kernel_args(), self.d_state, self.conc,
                            self.m_active, self.m_state, self.votes, self.voters)


# --------------------------------------------------------------------------
# Python-level operations on a developed tissue

@dataclass(frozen=True)
class DiffusionField:
    position: LatticePosition
    concentration: float
    extent: tuple

    def covers(self, p: LatticePosition) -> bool:
        return all(abs(a - b) <= e for a, b, e in zip(p, self.position, self.extent))


def activate_decision_neurons(tissue: Tissue, sensors) -> list:
    """Fields released by the decision neurons that switch on for ``sensors``."""
    states = one_hot(sensors)
    fields_out = []
    for d, pos in enumerate(tissue.decision_positions):
        sigma = weighted_input(tissue.decision_weights[d], states)
        k1, k2 = tissue.decision_k[d]
        th1, th2 = tissue.decision_theta[d]
        if _modular(sigma, k1, k2, th1, th2):
            fields_out.append(DiffusionField(pos, float(tissue.decision_concentration[d]),
                                             tuple(int(v) for v in tissue.decision_extent[d])))
    return fields_out


def coarse_code(fields_in, tissue: Tissue) -> set:
    """Positions of the motor neurons excited by a set of diffusion fields.

    Concentrations of overlapping fields add; the motor neurons at the cells of
    highest positive concentration are active, ties included.
    """
    if not tissue.gated:
        return set(tissue.motor_positions)
    conc = {}
    for p in tissue.motor_positions:
        c = 0.0
        for f in fields_in:
            if f.covers(p):
                c += f.concentration
        conc[p] = c
    if not conc:
        return set()
    peak = max(conc.values())
    if peak <= 0.0:
        return set()
    return {p for p, c in conc.items() if c == peak}


def infer(tissue: Tissue, sensors, scratch: Optional[NetworkScratch] = None) -> BehaviorVector:
    """Behavior activations produced by ``tissue`` for one sensor frame."""
    scratch = scratch or NetworkScratch(tissue)
    mask = scratch.run(tissue, sensors)
    active = tuple(bool(mask >> q & 1) for q in range(N_BEHAVIORS))
    votes = tuple(float(scratch.votes[q] / scratch.voters[q]) if scratch.voters[q] else float("nan")
                  for q in range(N_BEHAVIORS))
    return BehaviorVector(active, votes, tuple(int(v) for v in scratch.voters))


def arbitrate(states, bindings) -> tuple:
    """Behavior flags from output-neuron states and their 0-based bindings."""
    votes = np.zeros(N_BEHAVIORS)
    voters = np.zeros(N_BEHAVIORS, dtype=np.int64)
    for s, q in zip(states, bindings):
        if q >= 0:
            voters[q] += 1
            votes[q] += s
    return tuple(bool(voters[q] > 0 and votes[q] / voters[q] >= 0.5) for q in range(N_BEHAVIORS))


# --------------------------------------------------------------------------
# serialization

def _gene_to_dict(g) -> dict:
    act = g.activation
    rec = {
        "type": g.kind,
        "position": list(g.position),
        "k1": act.k1, "k2": act.k2, "theta1": act.theta1, "theta2": act.theta2,
        "expressed": bool(g.expressed),
        "cell_death": bool(g.cell_death),
        "replication_weight": g.replication_weight,
    }
    if isinstance(g, MotorNeuronGene):
        rec["weights"] = g.weights.tolist()
        rec["sensor_weights"] = g.sensor_weights.tolist()
        rec["output_binding"] = g.output_binding
    else:
        rec["input_weights"] = g.input_weights.tolist()
        rec["concentration"] = g.concentration
        rec["field_extent"] = list(g.field_extent)
    return rec


def genome_to_dict(genome: Genome) -> dict:
    t = genome.tissue
    return {
        "format": GENOME_FORMAT,
        "version": GENOME_VERSION,
        "kind": genome.kind,
        "tissue": {
            "replication_probability": t.replication_probability,
            "neuron_replication_ratio": t.neuron_replication_ratio,
            "seed_address": t.seed_address,
            "robot_count": t.robot_count,
        },
        "genes": [_gene_to_dict(g) for g in genome.genes],
    }


def _gene_from_dict(i: int, rec) -> CellGene:
    def need(key):
        if key not in rec:
            raise GenomeFormatError(f"gene record {i}: missing field '{key}'")
        return rec[key]

    try:
        pos = LatticePosition(*(int(v) for v in need("position")))
        act = ActivationParams(int(need("k1")), int(need("k2")),
                               float(need("theta1")), float(need("theta2")))
        common = dict(expressed=bool(need("expressed")), cell_death=bool(need("cell_death")),
                      replication_weight=float(rec.get("replication_weight", 0.5)))
        kind = need("type")
        if kind == "motor":
            b = rec.get("output_binding")
            return MotorNeuronGene(pos, need("weights"), need("sensor_weights"), act,
                                   output_binding=None if b is None else int(b), **common)
        if kind == "decision":
            return DecisionNeuronGene(pos, need("input_weights"), act, float(need("concentration")),
                                      tuple(need("field_extent")), **common)
        raise GenomeFormatError(f"gene record {i}: unknown type {kind!r}")
    except GenomeFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise GenomeFormatError(f"gene record {i}: {exc}") from exc


def genome_from_dict(doc) -> Genome:
    if not isinstance(doc, dict) or doc.get("format") != GENOME_FORMAT:
        raise GenomeFormatError("not an antex genome document")
    if "tissue" not in doc or "genes" not in doc:
        raise GenomeFormatError("genome document needs 'tissue' and 'genes'")
    t = doc["tissue"]
    try:
        rc = t.get("robot_count")
        tissue = TissueGene(float(t["replication_probability"]), float(t["neuron_replication_ratio"]),
                            int(t["seed_address"]), None if rc is None else int(rc))
    except (KeyError, TypeError, ValueError) as exc:
        raise GenomeFormatError(f"tissue gene: {exc!r}") from exc
    genes = [_gene_from_dict(i, rec) for i, rec in enumerate(doc["genes"])]
    kind = doc.get("kind", "ant")
    if kind not in ("ant", "fixed"):
        raise GenomeFormatError(f"unknown genome kind {kind!r}")
    return Genome(tissue, genes, kind)


def dumps_genome(genome: Genome) -> str:
    return json.dumps(genome_to_dict(genome), indent=1)


def loads_genome(text: str) -> Genome:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GenomeFormatError(f"invalid JSON: {exc}") from exc
    return genome_from_dict(doc)


def save_genome(genome: Genome, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_genome(genome))


def load_genome(path) -> Genome:
    with open(path) as fh:
        return loads_genome(fh.read())
