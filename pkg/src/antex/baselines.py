"""Reference controllers: the hand-written rule set, a fixed-topology network,
and the adapter that runs an evolved tissue inside the simulator.

Every controller exposes ``decide(frame) -> BehaviorVector`` for the
step-by-step API and ``kernel_spec()`` for the batched simulator kernels.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .frames import N_BEHAVIORS, N_INPUTS, BehaviorVector, SensorFrame
from .sim import CTRL_HANDCODED, CTRL_NETWORK, CTRL_NULL, handcoded_mask
from .tissue import (
    NOMINAL_INPUTS, TOP_LAYER, Genome, LatticePosition, NetworkScratch, Tissue, TissueGene,
    develop, infer, random_motor_gene,
)

# (rule, condition, behaviors).  Rules 1-2 pre-empt everything after them;
# rules 4-6 are first-match among themselves, all others accumulate.
HANDCODED_RULES = (
    (1, "stuck (U1=1)", {1, 4, 7, 10, 12}),
    (2, "obstacle ahead (S1=1)", {4}),
    (3, "Z2 or Z3 is Dump and L1 > 0", {2, 3, 4}),
    (4, "Z2 or Z3 is DontCare and L1 > 0", {3, 4, 12}),
    (5, "Z2 or Z3 is DontCare", {2, 4}),
    (6, "Z2 or Z3 is DontCare and L1 = 0 (never reached: rule 5 matches first)", {3}),
    (7, "Z2 or Z3 is Level", {2, 4}),
    (8, "Z2 or Z3 is Below", {2, 7, 11}),
    (9, "Z2 or Z3 is Above", {2}),
    (10, "Z2 or Z3 is Above and M1 = 0", {8, 11}),
    (11, "Z2 or Z3 is Above and M1 = 1", {2, 9}),
    (12, "nothing above fired (both blade cells in the dump band, L1 = 0)", {2, 4}),
)


def _empty_net():
    return (np.zeros((0, N_INPUTS)), np.zeros((0, 2), dtype=np.int64), np.zeros((0, 2)),
            np.zeros(0), np.zeros((0, 0), dtype=np.bool_),
            np.zeros((0, NOMINAL_INPUTS), dtype=np.int64), np.zeros(0, dtype=np.int64),
            np.zeros((0, NOMINAL_INPUTS)), np.zeros((0, N_INPUTS)),
            np.zeros((0, 2), dtype=np.int64), np.zeros((0, 2)), np.zeros(0, dtype=np.int64), False)


def _as_array(frame) -> np.ndarray:
    if isinstance(frame, SensorFrame):
        return frame.to_array()
    return np.asarray(frame, dtype=np.int64)


class HandCodedController:
    """Fixed rule table over the blade-level sensors (see HANDCODED_RULES)."""

    name = "handcoded"

    def decide(self, frame) -> BehaviorVector:
        mask = int(handcoded_mask(_as_array(frame)))
        return BehaviorVector.from_mask([mask >> q & 1 for q in range(N_BEHAVIORS)])

    def kernel_spec(self):
        return CTRL_HANDCODED, _empty_net()


class NullController:
    """Does nothing; useful as a floor in sweeps."""

    name = "null"

    def decide(self, frame) -> BehaviorVector:
        return BehaviorVector.from_mask([False] * N_BEHAVIORS)

    def kernel_spec(self):
        return CTRL_NULL, _empty_net()


class NetworkController:
    """Runs a developed tissue; the same object serves every robot in a team."""

    name = "network"

    def __init__(self, genome: Genome, tissue: Optional[Tissue] = None):
        self.genome = genome
        self.tissue = tissue if tissue is not None else develop(genome)
        self._scratch = NetworkScratch(self.tissue)

    @property
    def robot_count(self) -> Optional[int]:
        return self.genome.tissue.robot_count

    def decide(self, frame) -> BehaviorVector:
        return infer(self.tissue, frame, self._scratch)

    def kernel_spec(self):
        return CTRL_NETWORK, self.tissue.kernel_args()


def fixed_topology_genome(rng, width: int = 4, length: int = 4,
                          robot_count: Optional[int] = None) -> Genome:
    """Fully populated width x length x 4 motor block, no decision neurons.

    The topology never changes under evolution; only weights, thresholds and
    output bindings do.  Every top-layer neuron gets an output binding so each
    behavior has voters.
    """
    genes = []
    order = 0
    for n in range(TOP_LAYER + 1):
        for l in range(width):
            for m in range(length):
                g = random_motor_gene(rng, LatticePosition(l, m, n))
                if n == TOP_LAYER:
                    g.output_binding = order % N_BEHAVIORS + 1
                    order += 1
                genes.append(g)
    tissue = TissueGene(replication_probability=0.0, neuron_replication_ratio=0.0,
                        seed_address=0, robot_count=robot_count)
    return Genome(tissue, genes, kind="fixed")


def make_controller(genome_or_name, rng=None):
    """Controller from a genome, or from the names 'handcoded' / 'null' / 'fixed'."""
    if isinstance(genome_or_name, Genome):
        return NetworkController(genome_or_name)
    if genome_or_name == "handcoded":
        return HandCodedController()
    if genome_or_name == "null":
        return NullController()
    if genome_or_name == "fixed":
        return NetworkController(fixed_topology_genome(np.random.default_rng(rng)))
    raise ValueError(f"unknown controller {genome_or_name!r}")
