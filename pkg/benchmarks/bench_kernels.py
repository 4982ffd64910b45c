"""Compare the compiled kernels against the pure-Python/numpy fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time from ANTEX_DISABLE_NUMBA.  Both runs must return the same
fitness values; the script reports robot-steps per second for each.

    python3 benchmarks/bench_kernels.py --timesteps 100 --scenarios 3
"""
import argparse
import json
import os
import subprocess
import sys
from dataclasses import dataclass

WORKER = r"""
import json, sys, time
import numpy as np
from antex import USING_NUMBA
from antex.baselines import HandCodedController, NetworkController
from antex.sim import ScenarioConfig, evaluate_batch
from antex.tissue import random_genome

T, S, R, seed = (int(v) for v in sys.argv[1:5])
sc = ScenarioConfig((8, 8), 1, R, T)
ctrls = {"handcoded": HandCodedController(),
         "ant": NetworkController(random_genome(np.random.default_rng(seed), 80))}
out = {"numba": USING_NUMBA}
for name, ctrl in ctrls.items():
    evaluate_batch(ctrl, sc, [0], 2)  # compile / warm up
    t0 = time.perf_counter()
    fit, det = evaluate_batch(ctrl, sc, range(S), T)
    dt = time.perf_counter() - t0
    out[name] = {"seconds": dt, "steps_per_s": T * S * R / dt, "fitness": fit.tolist(),
                 "detectors": det.sum(0).tolist()}
print(json.dumps(out))
"""


@dataclass
class BackendResult:
    backend: str
    results: dict


def run_backend(disable: bool, args) -> BackendResult:
    env = dict(os.environ, ANTEX_DISABLE_NUMBA="1" if disable else "0")
    cmd = [sys.executable, "-c", WORKER, str(args.timesteps), str(args.scenarios), str(args.robots), str(args.seed)]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return BackendResult("python" if disable else "numba", json.loads(proc.stdout.strip().splitlines()[-1]))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--timesteps", type=int, default=100)
    ap.add_argument("--scenarios", type=int, default=3)
    ap.add_argument("--robots", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    fast = run_backend(False, args)
    slow = run_backend(True, args)
    ok = True
    print(f"{'controller':<10} {'backend':<7} {'robot-steps/s':>14} {'seconds':>9}")
    for name in ("handcoded", "ant"):
        for r in (fast, slow):
            d = r.results[name]
            print(f"{name:<10} {r.backend:<7} {d['steps_per_s']:>14.0f} {d['seconds']:>9.3f}")
        same = fast.results[name]["fitness"] == slow.results[name]["fitness"] and \
            fast.results[name]["detectors"] == slow.results[name]["detectors"]
        speedup = fast.results[name]["steps_per_s"] / slow.results[name]["steps_per_s"]
        print(f"{name:<10} speedup x{speedup:.1f}, identical results: {same}")
        ok &= same
    if not fast.results["numba"]:
        print("warning: numba was not importable, both runs used the fallback")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
