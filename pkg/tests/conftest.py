import os
import subprocess
import sys

import numpy as np
import pytest

from antex.frames import N_INPUTS
from antex.tissue import (
    ActivationParams, DecisionNeuronGene, Genome, LatticePosition, MotorNeuronGene, TissueGene,
)

ALWAYS_ON = ActivationParams(0, 1, 0.0, -5.0)   # up with theta2 below any sigma
ALWAYS_OFF = ActivationParams(0, 0, -5.0, 0.0)  # down with theta1 below any sigma


def motor(l, m, n, binding=None, act=ALWAYS_ON, w=None, sw=None, **kw):
    return MotorNeuronGene(
        LatticePosition(l, m, n),
        np.zeros(9) if w is None else w,
        np.zeros(N_INPUTS) if sw is None else sw,
        act, output_binding=binding, **kw)


def decision(l, m, n, c=1.0, ext=(0, 0, 0), act=ALWAYS_ON, v=None, **kw):
    return DecisionNeuronGene(LatticePosition(l, m, n), np.zeros(N_INPUTS) if v is None else v,
                              act, c, ext, **kw)


def genome(genes, kind="ant", seed=0, robot_count=None):
    return Genome(TissueGene(0.5, 0.2, seed, robot_count), list(genes), kind)


def run_python(code: str, disable_numba: bool) -> str:
    env = dict(os.environ, ANTEX_DISABLE_NUMBA="1" if disable_numba else "0")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return proc.stdout


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[criterion])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
