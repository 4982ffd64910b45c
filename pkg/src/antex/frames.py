"""Sensor frames and behavior vectors shared by the controllers and the simulator.

A sensor frame is carried through the kernels as an int64 array of 14 state
indices, one per sensor variable, in the order of :data:`SENSOR_NAMES`.  The
controllers see it as a one-hot input layer of :data:`N_INPUTS` neurons, one
neuron per (variable, state) pair.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from ._jit import njit

# Z1..Z4: depth of the 2x2 block ahead relative to the blueprint
Z_LEVEL, Z_ABOVE, Z_BELOW, Z_DONTCARE, Z_DUMP = range(5)
Z_STATES = ("Level", "Above", "Below", "DontCare", "Dump")
# E1, E2: soil ahead of the blade relative to front-wheel depth
E_ABOVE, E_BELOW, E_LEVEL = range(3)
E_STATES = ("Above", "Below", "Level")
# B1: blade position
BLADE_BELOW, BLADE_LEVEL, BLADE_ABOVE, BLADE_HOME = range(4)
B_STATES = ("Below", "Level", "Above", "Home")
# H1: direction of the nearest robot, relative to the robot's own heading
H_NORTH, H_EAST, H_WEST, H_SOUTH = range(4)
H_STATES = ("N", "E", "W", "S")

SENSOR_NAMES = ("Z1", "Z2", "Z3", "Z4", "E1", "E2", "B1", "L1", "S1", "D1", "H1", "R1", "U1", "M1")
SENSOR_CARDINALITY = np.array([5, 5, 5, 5, 3, 3, 4, 5, 2, 4, 4, 2, 2, 2], dtype=np.int64)
SENSOR_OFFSETS = np.concatenate(([0], np.cumsum(SENSOR_CARDINALITY)[:-1])).astype(np.int64)
N_SENSORS = len(SENSOR_NAMES)
N_INPUTS = int(SENSOR_CARDINALITY.sum())  # 51 one-hot input neurons
# size of the factored sensor space (the printed 8.6e7 does not match this product)
SENSOR_SPACE_SIZE = int(np.prod(SENSOR_CARDINALITY))

BEHAVIOR_NAMES = (
    "ThrottleUp", "MoveForward", "MoveBackward", "RandomTurn", "TurnRight", "TurnLeft",
    "BladeAbove", "BladeBelow", "BladeLevel", "BladeHome", "BitSet", "BitClear",
)
N_BEHAVIORS = 12
(THROTTLE, FORWARD, BACKWARD, RANDOM_TURN, TURN_RIGHT, TURN_LEFT,
 SET_ABOVE, SET_BELOW, SET_LEVEL, SET_HOME, BIT_SET, BIT_CLEAR) = range(12)


@dataclass(frozen=True)
class SensorFrame:
    """The discretized readings of one robot at one timestep."""

    Z1: int
    Z2: int
    Z3: int
    Z4: int
    E1: int
    E2: int
    B1: int
    L1: int
    S1: int
    D1: int
    H1: int
    R1: int
    U1: int
    M1: int

    def __post_init__(self):
        for f, card in zip(fields(self), SENSOR_CARDINALITY):
            v = getattr(self, f.name)
            if not 0 <= int(v) < card:
                raise ValueError(f"{f.name}={v} outside [0, {card})")

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in SENSOR_NAMES], dtype=np.int64)

    @classmethod
    def from_array(cls, arr) -> "SensorFrame":
        return cls(*(int(v) for v in arr))

    def code(self) -> int:
        return int(frame_code(self.to_array()))

    def describe(self) -> str:
        z = [Z_STATES[v] for v in (self.Z1, self.Z2, self.Z3, self.Z4)]
        return (f"Z={z} E=({E_STATES[self.E1]},{E_STATES[self.E2]}) B1={B_STATES[self.B1]} "
                f"L1={self.L1} S1={self.S1} D1={self.D1} H1={H_STATES[self.H1]} "
                f"R1={self.R1} U1={self.U1} M1={self.M1}")


class BehaviorVector(NamedTuple):
    """Twelve activation flags plus the vote tallies that produced them.

    ``votes[q]`` is p(q) (nan when no active output neuron is bound to q) and
    ``voters[q]`` is n_q.
    """

    active: tuple
    votes: tuple = ()
    voters: tuple = ()

    @classmethod
    def from_mask(cls, mask) -> "BehaviorVector":
        return cls(tuple(bool(v) for v in mask))

    @classmethod
    def from_indices(cls, indices) -> "BehaviorVector":
        """Build from 1-based behavior numbers as listed in the behavior table."""
        mask = [False] * N_BEHAVIORS
        for q in indices:
            mask[q - 1] = True
        return cls(tuple(mask))

    def to_array(self) -> np.ndarray:
        return np.array(self.active, dtype=np.bool_)

    def indices(self) -> set:
        """1-based numbers of the active behaviors."""
        return {q + 1 for q, on in enumerate(self.active) if on}

    def is_active(self, name: str) -> bool:
        return self.active[BEHAVIOR_NAMES.index(name)]


@njit
def frame_code(frame):
    """Mixed-radix index of a frame in the factored sensor space."""
    code = 0
    for v in range(frame.shape[0]):
        code = code * SENSOR_CARDINALITY[v] + frame[v]
    return code


@njit
def active_inputs(frame, out):
    """Write the indices of the 14 active one-hot input neurons into ``out``."""
    for v in range(frame.shape[0]):
        out[v] = SENSOR_OFFSETS[v] + frame[v]


def one_hot(frame) -> np.ndarray:
    """Binary state vector of the sensor input layer for one frame."""
    arr = frame.to_array() if isinstance(frame, SensorFrame) else np.asarray(frame, dtype=np.int64)
    states = np.zeros(N_INPUTS, dtype=np.float64)
    states[SENSOR_OFFSETS + arr] = 1.0
    return states


def random_frame(rng) -> SensorFrame:
    return SensorFrame.from_array(rng.integers(0, SENSOR_CARDINALITY))
