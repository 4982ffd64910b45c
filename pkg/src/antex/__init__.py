"""Evolved neural-tissue controllers for a team of excavation robots."""
from ._jit import USING_NUMBA
from .frames import BEHAVIOR_NAMES, SENSOR_NAMES, BehaviorVector, SensorFrame

__version__ = "0.1.0"

__all__ = ["USING_NUMBA", "BEHAVIOR_NAMES", "SENSOR_NAMES", "BehaviorVector", "SensorFrame",
           "__version__"]
