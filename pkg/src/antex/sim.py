"""Grid-world excavation simulator.

Terrain is an integer heightfield ``heights[x, y]`` in soil units (1 unit per
blade increment).  Each robot occupies the 2x2 block whose lower-left cell is
its anchor; its blade, when not retracted, sits on the two cells directly
ahead of the front edge.  Pushing soil follows the bulldozer transfer rule:
the blade cuts each blade cell to ``front-wheel height + b_h`` and moves the
excess (or deficit) one cell further ahead, so every forward move conserves
the total volume exactly.

Robot state is an int64 row ``[x, y, heading, blade, memory, stuck]``.
Headings are 0=N(+y), 1=E(+x), 2=S, 3=W.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._jit import njit
from .frames import (
    BLADE_ABOVE, BLADE_BELOW, BLADE_HOME, BLADE_LEVEL, E_ABOVE, E_BELOW, E_LEVEL, N_BEHAVIORS,
    N_SENSORS, Z_ABOVE, Z_BELOW, Z_DONTCARE, Z_DUMP, Z_LEVEL, BehaviorVector, SensorFrame,
)

# cell kinds of the blueprint
TARGET, DUMP, DONTCARE = 0, 1, 2

RX, RY, RHEAD, RBLADE, RMEM, RSTUCK = range(6)
HEADING_NAMES = ("N", "E", "S", "W")
FX = np.array([0, 1, 0, -1], dtype=np.int64)
FY = np.array([1, 0, -1, 0], dtype=np.int64)

DEFAULT_CAPACITY = 12
THROTTLE_CAPACITY = 24
MAX_PUSH = 24  # load that saturates the blade force sensor
DUMP_WIDTH = 2
BORDER_WIDTH = 1
DEFAULT_TIMESTEPS = 250

# trace slots written by execute_kernel
TR_FORWARD_OK, TR_BACKWARD_OK, TR_RANDOM_DIR, TR_REJECTED = range(4)
# detector indices
DET_LEVEL, DET_COLLISION, DET_STUCK, DET_CUTDIG, DET_DUMP = range(5)
DETECTOR_NAMES = ("level", "collision_avoidance", "stuck_avoidance", "cut_dig", "correct_dump")
N_DETECTORS = 5

CTRL_NETWORK, CTRL_HANDCODED, CTRL_NULL = range(3)


class ScenarioError(ValueError):
    """The requested worksite cannot be built."""


class BlueprintError(ValueError):
    """A blueprint file or grid is malformed."""


# --------------------------------------------------------------------------
# kernels

@njit
def rng_next(state):
    """xorshift32 step on a one-element int64 array; returns the new state."""
    x = state[0]
    x ^= (x << 13) & 0xFFFFFFFF
    x ^= x >> 17
    x ^= (x << 5) & 0xFFFFFFFF
    state[0] = x
    return x


def rng_state_from_seed(seed: int) -> np.ndarray:
    s = int(np.random.SeedSequence(int(seed)).generate_state(1, dtype=np.uint32)[0])
    return np.array([s or 0x9E3779B9], dtype=np.int64)


@njit
def _front_cells(x, y, head):
    """Front-left and front-right cells of a footprint, plus the forward vector."""
    fx = FX[head]
    fy = FY[head]
    rx = fy
    ry = -fx
    lx = x + (fx - rx + 1) // 2
    ly = y + (fy - ry + 1) // 2
    qx = x + (fx + rx + 1) // 2
    qy = y + (fy + ry + 1) // 2
    return lx, ly, qx, qy, fx, fy


@njit
def _inside(w, h, x, y):
    return 0 <= x < w and 0 <= y < h


@njit
def _robot_at(robots, skip, x, y):
    """Index of the robot whose footprint covers (x, y), -1 if none."""
    for j in range(robots.shape[0]):
        if j == skip:
            continue
        dx = x - robots[j, RX]
        dy = y - robots[j, RY]
        if 0 <= dx <= 1 and 0 <= dy <= 1:
            return j
    return -1


@njit
def _footprint_free(robots, skip, w, h, ax, ay):
    if ax < 0 or ay < 0 or ax + 1 >= w or ay + 1 >= h:
        return False
    for j in range(robots.shape[0]):
        if j == skip:
            continue
        if abs(ax - robots[j, RX]) < 2 and abs(ay - robots[j, RY]) < 2:
            return False
    return True


@njit
def _blade_offset(blade):
    if blade == BLADE_BELOW:
        return -1
    if blade == BLADE_ABOVE:
        return 1
    return 0


@njit
def blade_volume_units(heights, robots, r):
    """Soil in front of the blade, in units; zero for a retracted blade.

    Only soil above the cutting line counts, so each blade cell contributes
    max(0, h - z_wheel - b_h); blade cells outside the grid contribute nothing.
    """
    blade = robots[r, RBLADE]
    if blade == BLADE_HOME:
        return 0
    w, h = heights.shape
    lx, ly, qx, qy, fx, fy = _front_cells(robots[r, RX], robots[r, RY], robots[r, RHEAD])
    bh = _blade_offset(blade)
    v = 0
    if _inside(w, h, lx + fx, ly + fy):
        v += max(0, heights[lx + fx, ly + fy] - heights[lx, ly] - bh)
    if _inside(w, h, qx + fx, qy + fy):
        v += max(0, heights[qx + fx, qy + fy] - heights[qx, qy] - bh)
    return v


@njit
def _z_state(heights, kind, target, x, y):
    w, h = heights.shape
    if not _inside(w, h, x, y):
        return Z_DONTCARE
    k = kind[x, y]
    if k == DUMP:
        return Z_DUMP
    if k == DONTCARE:
        return Z_DONTCARE
    goal = -target[x, y]
    z = heights[x, y]
    if z == goal:
        return Z_LEVEL
    if z > goal:
        return Z_ABOVE
    return Z_BELOW


@njit
def _e_state(heights, x, y, wheel):
    w, h = heights.shape
    if not _inside(w, h, x, y):
        return E_LEVEL
    if heights[x, y] > wheel:
        return E_ABOVE
    if heights[x, y] < wheel:
        return E_BELOW
    return E_LEVEL


@njit
def sense_kernel(heights, kind, target, robots, r, cell_area, frame):
    """Fill ``frame`` (14 ints) with robot r's sensor readings."""
    w, h = heights.shape
    x = robots[r, RX]
    y = robots[r, RY]
    head = robots[r, RHEAD]
    lx, ly, qx, qy, fx, fy = _front_cells(x, y, head)
    # Z2, Z3: blade cells (left, right); Z1, Z4: the row beyond (left, right)
    frame[0] = _z_state(heights, kind, target, lx + 2 * fx, ly + 2 * fy)
    frame[1] = _z_state(heights, kind, target, lx + fx, ly + fy)
    frame[2] = _z_state(heights, kind, target, qx + fx, qy + fy)
    frame[3] = _z_state(heights, kind, target, qx + 2 * fx, qy + 2 * fy)
    frame[4] = _e_state(heights, lx + 2 * fx, ly + 2 * fy, heights[lx, ly])
    frame[5] = _e_state(heights, qx + 2 * fx, qy + 2 * fy, heights[qx, qy])
    frame[6] = robots[r, RBLADE]
    vol = blade_volume_units(heights, robots, r) * cell_area
    load = int(np.floor(4.0 * vol / MAX_PUSH + 0.5))
    frame[7] = min(4, max(0, load))
    blocked = 0
    for cx, cy in ((lx + fx, ly + fy), (qx + fx, qy + fy)):
        if not _inside(w, h, cx, cy) or _robot_at(robots, r, cx, cy) >= 0:
            blocked = 1
    frame[8] = blocked
    # nearest robot by footprint gap (Chebyshev), ties to the lowest index
    best = -1
    best_d = 1 << 30
    for j in range(robots.shape[0]):
        if j == r:
            continue
        gx = max(0, abs(robots[j, RX] - x) - 1)
        gy = max(0, abs(robots[j, RY] - y) - 1)
        d = max(gx, gy)
        if d < best_d:
            best_d = d
            best = j
    if best < 0:
        frame[9] = 3
        frame[10] = 0
    else:
        frame[9] = min(3, best_d - 1)
        dx = robots[best, RX] - x
        dy = robots[best, RY] - y
        ahead = dx * fx + dy * fy
        right = dx * fy - dy * fx
        # relative bearing, ties broken N > E > S > W; H1 states are (N, E, W, S)
        hdir = 0
        score = ahead
        if right > score:
            hdir = 1
            score = right
        if -ahead > score:
            hdir = 3
            score = -ahead
        if -right > score:
            hdir = 2
        frame[10] = hdir
    front = heights[lx, ly] + heights[qx, qy]
    rear = heights[lx - fx, ly - fy] + heights[qx - fx, qy - fy]
    frame[11] = 1 if rear - front >= 2 else 0
    frame[12] = robots[r, RSTUCK]
    frame[13] = robots[r, RMEM]


@njit
def push_forward(heights, robots, r, cell_area, capacity, commit):
    """Validate (and optionally apply) one forward move of robot r.

    Returns 0 on success, 1 when blocked by the boundary or another robot,
    2 when the blade load exceeds ``capacity``.
    """
    w, h = heights.shape
    x = robots[r, RX]
    y = robots[r, RY]
    lx, ly, qx, qy, fx, fy = _front_cells(x, y, robots[r, RHEAD])
    if not _footprint_free(robots, r, w, h, x + fx, y + fy):
        return 1
    blade = robots[r, RBLADE]
    if blade != BLADE_HOME:
        ax1, ay1 = lx + 2 * fx, ly + 2 * fy
        ax2, ay2 = qx + 2 * fx, qy + 2 * fy
        if not _inside(w, h, ax1, ay1) or not _inside(w, h, ax2, ay2):
            return 1
        if _robot_at(robots, r, ax1, ay1) >= 0 or _robot_at(robots, r, ax2, ay2) >= 0:
            return 1
        bh = _blade_offset(blade)
        vol = blade_volume_units(heights, robots, r)
        if vol * cell_area > capacity:
            return 2
        # eps = 0 (no height change) when the blade carries nothing and is not below
        if commit and not (vol == 0 and bh >= 0):
            bx1, by1 = lx + fx, ly + fy
            bx2, by2 = qx + fx, qy + fy
            moved1 = heights[bx1, by1] - heights[lx, ly] - bh
            moved2 = heights[bx2, by2] - heights[qx, qy] - bh
            # a cell lying under the cutting line is passed over untouched
            if moved1 > 0:
                heights[ax1, ay1] += moved1
                heights[bx1, by1] = heights[lx, ly] + bh
            if moved2 > 0:
                heights[ax2, ay2] += moved2
                heights[bx2, by2] = heights[qx, qy] + bh
    if commit:
        robots[r, RX] = x + fx
        robots[r, RY] = y + fy
    return 0


@njit
def back_up(heights, robots, r, commit):
    """Reverse one cell.  The blade leaves its load in place."""
    w, h = heights.shape
    fx = FX[robots[r, RHEAD]]
    fy = FY[robots[r, RHEAD]]
    nx = robots[r, RX] - fx
    ny = robots[r, RY] - fy
    if not _footprint_free(robots, r, w, h, nx, ny):
        return 1
    if commit:
        robots[r, RX] = nx
        robots[r, RY] = ny
    return 0


@njit
def execute_kernel(heights, robots, r, mask, rng_state, cell_area, cap_base, cap_throttle, trace):
    """Apply a behavior mask to robot r in the fixed behavior order."""
    trace[TR_FORWARD_OK] = 0
    trace[TR_BACKWARD_OK] = 0
    trace[TR_RANDOM_DIR] = -1
    trace[TR_REJECTED] = 0
    capacity = cap_base
    if mask & 1:
        capacity = cap_throttle
    rejected = 0
    if mask >> 1 & 1:
        if push_forward(heights, robots, r, cell_area, capacity, True) == 0:
            trace[TR_FORWARD_OK] = 1
        else:
            rejected = 1
    if mask >> 2 & 1:
        if back_up(heights, robots, r, True) == 0:
            trace[TR_BACKWARD_OK] = 1
        else:
            rejected = 1
    head = robots[r, RHEAD]
    if mask >> 3 & 1:
        right = (rng_next(rng_state) >> 16) & 1
        trace[TR_RANDOM_DIR] = right
        head = (head + 1) % 4 if right == 1 else (head + 3) % 4
    if mask >> 4 & 1:
        head = (head + 1) % 4
    if mask >> 5 & 1:
        head = (head + 3) % 4
    robots[r, RHEAD] = head
    if mask >> 6 & 1:
        robots[r, RBLADE] = BLADE_ABOVE
    if mask >> 7 & 1:
        robots[r, RBLADE] = BLADE_BELOW
    if mask >> 8 & 1:
        robots[r, RBLADE] = BLADE_LEVEL
    if mask >> 9 & 1:
        robots[r, RBLADE] = BLADE_HOME
    if mask >> 10 & 1:
        robots[r, RMEM] = 1
    if mask >> 11 & 1:
        robots[r, RMEM] = 0
    robots[r, RSTUCK] = rejected
    trace[TR_REJECTED] = rejected


@njit
def handcoded_mask(frame):
    """The eleven-rule reference controller (see baselines.HANDCODED_RULES)."""
    if frame[12] == 1:  # rule 1: stuck
        return (1 << 0) | (1 << 3) | (1 << 6) | (1 << 9) | (1 << 11)
    if frame[8] == 1:  # rule 2: obstacle ahead
        return 1 << 3
    z2 = frame[1]
    z3 = frame[2]
    load = frame[7]
    mask = 0
    if (z2 == Z_DUMP or z3 == Z_DUMP) and load > 0:  # rule 3
        mask |= (1 << 1) | (1 << 2) | (1 << 3)
    if z2 == Z_DONTCARE or z3 == Z_DONTCARE:  # rules 4-6, first match
        if load > 0:
            mask |= (1 << 2) | (1 << 3) | (1 << 11)
        else:
            mask |= (1 << 1) | (1 << 3)
    if z2 == Z_LEVEL or z3 == Z_LEVEL:  # rule 7
        mask |= (1 << 1) | (1 << 3)
    if z2 == Z_BELOW or z3 == Z_BELOW:  # rule 8
        mask |= (1 << 1) | (1 << 6) | (1 << 10)
    if z2 == Z_ABOVE or z3 == Z_ABOVE:
        mask |= 1 << 1  # rule 9
        if frame[13] == 0:
            mask |= (1 << 7) | (1 << 10)  # rule 10
        else:
            mask |= (1 << 1) | (1 << 8)  # rule 11
    if mask == 0:
        # both blade cells in the dump band with an empty blade: no rule fires
        # and the robot would idle forever, so drive on as for non-target ground
        mask = (1 << 1) | (1 << 3)
    return mask


@njit
def detect_kernel(frame, mask, random_dir, flags):
    """Sensor-behavior detectors for one robot-timestep."""
    fwd = mask >> 1 & 1
    back = mask >> 2 & 1
    rt = mask >> 3 & 1
    tr = mask >> 4 & 1
    tl = mask >> 5 & 1
    load = frame[7]
    flags[DET_LEVEL] = 1 if (frame[6] == BLADE_LEVEL and load > 0 and fwd == 1) else 0
    flags[DET_COLLISION] = 1 if (frame[8] == 1 and fwd == 0 and rt == 0
                                 and (tr != tl or back == 1)) else 0
    flags[DET_STUCK] = 1 if (frame[12] == 1 and fwd == 0
                             and (back == 1 or rt == 1 or tl != tr)) else 0
    flags[DET_CUTDIG] = 1 if (frame[6] == BLADE_BELOW and fwd == 1) else 0
    dump = frame[1] == Z_DUMP and frame[2] == Z_DUMP and load > 0 and fwd == 1
    ok = False
    if dump:
        if rt == 0 and tl == tr:
            ok = True
        elif rt == 1 and random_dir == 0 and tr == 1 and tl == 0:
            ok = True
        elif rt == 1 and random_dir == 1 and tr == 0 and tl == 1:
            ok = True
    flags[DET_DUMP] = 1 if ok else 0


@njit
def _memo_lookup(keys, vals, code):
    size = keys.shape[0]
    if size == 0:
        return -1
    slot = (code * 2654435761) & (size - 1)
    for _ in range(size):
        k = keys[slot]
        if k == code:
            return vals[slot]
        if k == -1:
            return -1
        slot = (slot + 1) & (size - 1)
    return -1


@njit
def _memo_store(keys, vals, code, mask):
    size = keys.shape[0]
    if size == 0:
        return
    slot = (code * 2654435761) & (size - 1)
    for _ in range(size // 2):
        if keys[slot] == -1:
            keys[slot] = code
            vals[slot] = mask
            return
        slot = (slot + 1) & (size - 1)


@njit
def _code(frame):
    # same radix order as frames.frame_code
    c = 0
    c = c * 5 + frame[0]
    c = c * 5 + frame[1]
    c = c * 5 + frame[2]
    c = c * 5 + frame[3]
    c = c * 3 + frame[4]
    c = c * 3 + frame[5]
    c = c * 4 + frame[6]
    c = c * 5 + frame[7]
    c = c * 2 + frame[8]
    c = c * 4 + frame[9]
    c = c * 4 + frame[10]
    c = c * 2 + frame[11]
    c = c * 2 + frame[12]
    c = c * 2 + frame[13]
    return c


@njit
def _offsets(frame, active_idx):
    off = 0
    cards = (5, 5, 5, 5, 3, 3, 4, 5, 2, 4, 4, 2, 2, 2)
    for v in range(14):
        active_idx[v] = off + frame[v]
        off += cards[v]


@njit
def controller_mask(ctrl, frame, active_idx, d_w, d_k, d_th, d_c, cover, m_in, m_layer, m_w,
                    m_sw, m_k, m_th, m_bind, gated, d_state, conc, m_active, m_state, votes,
                    voters, memo_keys, memo_vals):
    if ctrl == CTRL_HANDCODED:
        return handcoded_mask(frame)
    if ctrl == CTRL_NULL:
        return 0
    code = _code(frame)
    mask = _memo_lookup(memo_keys, memo_vals, code)
    if mask >= 0:
        return mask
    _offsets(frame, active_idx)
    mask = _network_step(active_idx, d_w, d_k, d_th, d_c, cover, m_in, m_layer, m_w, m_sw,
                         m_k, m_th, m_bind, gated, d_state, conc, m_active, m_state, votes, voters)
    _memo_store(memo_keys, memo_vals, code, mask)
    return mask


@njit
def fitness_kernel(heights, kind, target):
    num = 0.0
    cnt = 0
    w, h = heights.shape
    for x in range(w):
        for y in range(h):
            if kind[x, y] == TARGET:
                num += np.exp(-2.0 * abs(target[x, y] + heights[x, y]))
                cnt += 1
    if cnt == 0:
        return np.nan
    return num / cnt


@njit
def run_episode(heights, kind, target, robots, steps, rng_state, cell_area, cap_base, cap_throttle,
                ctrl, d_w, d_k, d_th, d_c, cover, m_in, m_layer, m_w, m_sw, m_k, m_th, m_bind,
                gated, memo_keys, memo_vals, det_counts):
    """Run ``steps`` timesteps in place and return the final fitness."""
    nd = d_w.shape[0]
    nm = m_in.shape[0]
    frame = np.zeros(N_SENSORS, dtype=np.int64)
    active_idx = np.zeros(N_SENSORS, dtype=np.int64)
    d_state = np.zeros(nd, dtype=np.int64)
    conc = np.zeros(nm, dtype=np.float64)
    m_active = np.zeros(nm, dtype=np.bool_)
    m_state = np.zeros(nm, dtype=np.int64)
    votes = np.zeros(N_BEHAVIORS, dtype=np.float64)
    voters = np.zeros(N_BEHAVIORS, dtype=np.int64)
    trace = np.zeros(4, dtype=np.int64)
    flags = np.zeros(N_DETECTORS, dtype=np.int64)
    for _ in range(steps):
        for r in range(robots.shape[0]):
            sense_kernel(heights, kind, target, robots, r, cell_area, frame)
            mask = controller_mask(ctrl, frame, active_idx, d_w, d_k, d_th, d_c, cover, m_in,
                                   m_layer, m_w, m_sw, m_k, m_th, m_bind, gated, d_state, conc,
                                   m_active, m_state, votes, voters, memo_keys, memo_vals)
            execute_kernel(heights, robots, r, mask, rng_state, cell_area, cap_base,
                           cap_throttle, trace)
            detect_kernel(frame, mask, trace[TR_RANDOM_DIR], flags)
            for k in range(N_DETECTORS):
                det_counts[k] += flags[k]
    return fitness_kernel(heights, kind, target)


@njit
def run_batch(heights0, kind, target, robots0, rng_seeds, steps, cell_area, cap_base,
              cap_throttle, ctrl, d_w, d_k, d_th, d_c, cover, m_in, m_layer, m_w, m_sw, m_k,
              m_th, m_bind, gated, memo_size, fitness_out, det_out):
    """Evaluate one controller on a stack of scenarios sharing a blueprint."""
    memo_keys = np.full(memo_size, -1, dtype=np.int64)
    memo_vals = np.zeros(memo_size, dtype=np.int64)
    rng_state = np.zeros(1, dtype=np.int64)
    for s in range(heights0.shape[0]):
        heights = heights0[s].copy()
        robots = robots0[s].copy()
        rng_state[0] = rng_seeds[s]
        fitness_out[s] = run_episode(heights, kind, target, robots, steps, rng_state, cell_area,
                                     cap_base, cap_throttle, ctrl, d_w, d_k, d_th, d_c, cover,
                                     m_in, m_layer, m_w, m_sw, m_k, m_th, m_bind, gated,
                                     memo_keys, memo_vals, det_out[s])


# the tissue kernel lives in tissue.py; bound here so controller_mask can call it
from .tissue import network_step as _network_step  # noqa: E402


# --------------------------------------------------------------------------
# Python-level model

@dataclass
class Blueprint:
    """Per-cell excavation specification: target depth, dump or don't-care."""

    kind: np.ndarray  # (W, H) int64 of TARGET / DUMP / DONTCARE
    depth: np.ndarray  # (W, H) int64 goal depth g for TARGET cells

    def __post_init__(self):
        self.kind = np.ascontiguousarray(self.kind, dtype=np.int64)
        self.depth = np.ascontiguousarray(self.depth, dtype=np.int64)
        if self.kind.shape != self.depth.shape or self.kind.ndim != 2:
            raise BlueprintError("kind and depth grids must share one 2-D shape")
        if not np.isin(self.kind, (TARGET, DUMP, DONTCARE)).all():
            raise BlueprintError("unknown cell kind")
        if not (self.kind == TARGET).any():
            raise BlueprintError("blueprint has no target cells")

    @property
    def shape(self):
        return self.kind.shape

    @property
    def theta(self) -> np.ndarray:
        """Indicator grid of cells to excavate."""
        return (self.kind == TARGET).astype(np.int64)

    @classmethod
    def centered(cls, area_w: int, area_h: int, depth: int,
                 dump_width: int = DUMP_WIDTH, border: int = BORDER_WIDTH) -> "Blueprint":
        """Excavation rectangle ringed by a dump band and a don't-care border."""
        if area_w < 1 or area_h < 1 or depth < 0:
            raise ScenarioError("area must be at least 1x1 and depth nonnegative")
        pad = dump_width + border
        w, h = area_w + 2 * pad, area_h + 2 * pad
        kind = np.full((w, h), DONTCARE, dtype=np.int64)
        kind[border:w - border, border:h - border] = DUMP
        kind[pad:pad + area_w, pad:pad + area_h] = TARGET
        dep = np.where(kind == TARGET, depth, 0)
        return cls(kind, dep)

    def to_ascii(self) -> str:
        """One line per row y (y = 0 first), one character per cell."""
        w, h = self.shape
        lines = []
        for y in range(h):
            row = []
            for x in range(w):
                k = self.kind[x, y]
                if k == DUMP:
                    row.append("D")
                elif k == DONTCARE:
                    row.append("X")
                else:
                    g = int(self.depth[x, y])
                    if not 0 <= g <= 9:
                        raise BlueprintError(f"depth {g} at ({x},{y}) not representable")
                    row.append(str(g))
            lines.append("".join(row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_ascii(cls, text: str) -> "Blueprint":
        rows = [ln.rstrip("\r") for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows:
            raise BlueprintError("empty blueprint")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise BlueprintError("blueprint rows differ in length")
        kind = np.zeros((width, len(rows)), dtype=np.int64)
        depth = np.zeros_like(kind)
        for y, row in enumerate(rows):
            for x, ch in enumerate(row):
                if ch.isdigit():
                    depth[x, y] = int(ch)
                elif ch == "D":
                    kind[x, y] = DUMP
                elif ch == "X":
                    kind[x, y] = DONTCARE
                else:
                    raise BlueprintError(f"bad character {ch!r} at row {y}, column {x}")
        return cls(kind, depth)

    @classmethod
    def load(cls, path) -> "Blueprint":
        with open(path) as fh:
            return cls.from_ascii(fh.read())

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_ascii())


class SimRng:
    """Random stream for the simulator (random turns only)."""

    def __init__(self, seed: int = 0):
        self.state = rng_state_from_seed(seed)

    def next_bit(self) -> int:
        return int((rng_next(self.state) >> 16) & 1)


@dataclass
class Worksite:
    heights: np.ndarray
    blueprint: Blueprint
    robots: np.ndarray  # (R, 6) int64
    cell_size: tuple = (1.0, 1.0)
    t: int = 0

    def __post_init__(self):
        self.heights = np.ascontiguousarray(self.heights, dtype=np.int64)
        self.robots = np.ascontiguousarray(self.robots, dtype=np.int64).reshape(-1, 6)
        if self.heights.shape != self.blueprint.shape:
            raise ScenarioError("heightfield and blueprint shapes differ")

    @property
    def cell_area(self) -> float:
        return float(self.cell_size[0] * self.cell_size[1])

    @property
    def n_robots(self) -> int:
        return self.robots.shape[0]

    def copy(self) -> "Worksite":
        return Worksite(self.heights.copy(), self.blueprint, self.robots.copy(), self.cell_size, self.t)

    def volume(self) -> float:
        return float(self.heights.sum()) * self.cell_area

    def footprint(self, r: int) -> list:
        x, y = self.robots[r, RX], self.robots[r, RY]
        return [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]

    def blade_cells(self, r: int) -> list:
        lx, ly, qx, qy, fx, fy = _front_cells(*self.robots[r, :3])
        return [(int(lx + fx), int(ly + fy)), (int(qx + fx), int(qy + fy))]

    def blade_volume(self, r: int) -> float:
        return float(blade_volume_units(self.heights, self.robots, r)) * self.cell_area

    def snapshot(self) -> str:
        """Signed-integer heightfield, one line per row y (y = 0 first)."""
        w, h = self.heights.shape
        lines = [f"# t={self.t}"]
        for y in range(h):
            lines.append(" ".join(str(int(self.heights[x, y])) for x in range(w)))
        return "\n".join(lines) + "\n"


def read_snapshot(text: str) -> np.ndarray:
    rows = [[int(v) for v in ln.split()] for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return np.array(rows, dtype=np.int64).T.copy()


def place_robots(shape, n_robots: int, rng) -> np.ndarray:
    """Random non-overlapping poses with the blade retracted."""
    w, h = shape
    anchors = [(x, y) for x in range(w - 1) for y in range(h - 1)]
    robots = np.zeros((n_robots, 6), dtype=np.int64)
    robots[:, RBLADE] = BLADE_HOME
    for r in range(n_robots):
        placed = False
        for _ in range(200):
            x, y = anchors[int(rng.integers(len(anchors)))]
            if _footprint_free(robots[:r], -1, w, h, x, y):
                placed = True
                break
        if not placed:
            free = [a for a in anchors if _footprint_free(robots[:r], -1, w, h, a[0], a[1])]
            if not free:
                raise ScenarioError(f"no room for robot {r + 1} of {n_robots} on a {w}x{h} grid")
            x, y = free[int(rng.integers(len(free)))]
        robots[r, RX], robots[r, RY] = x, y
        robots[r, RHEAD] = int(rng.integers(4))
    return robots


def generate_scenario(area_w: int, area_h: int, depth: int, n_robots: int, rng,
                      blueprint: Optional[Blueprint] = None) -> Worksite:
    """Flat worksite with robots at random poses.

    ``rng`` is a numpy Generator or an integer seed.  A custom ``blueprint``
    overrides the centered rectangle built from (area_w, area_h, depth).
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    bp = blueprint if blueprint is not None else Blueprint.centered(area_w, area_h, depth)
    heights = np.zeros(bp.shape, dtype=np.int64)
    if n_robots < 0:
        raise ScenarioError("robot count must be nonnegative")
    robots = place_robots(bp.shape, n_robots, rng)
    return Worksite(heights, bp, robots)


def fitness(worksite: Worksite) -> float:
    bp = worksite.blueprint
    if not (bp.kind == TARGET).any():
        raise ValueError("fitness needs at least one target cell")
    return float(fitness_kernel(worksite.heights, bp.kind, bp.depth))


def sense(worksite: Worksite, robot_index: int) -> SensorFrame:
    if not 0 <= robot_index < worksite.n_robots:
        raise IndexError(f"no robot {robot_index}")
    frame = np.zeros(N_SENSORS, dtype=np.int64)
    sense_kernel(worksite.heights, worksite.blueprint.kind, worksite.blueprint.depth,
                 worksite.robots, robot_index, worksite.cell_area, frame)
    return SensorFrame.from_array(frame)


def apply_soil(worksite: Worksite, robot_index: int, move: str = "forward",
               capacity: float = THROTTLE_CAPACITY) -> bool:
    """Move one robot one cell, pushing soil for forward moves.

    Returns False (and marks the robot stuck) when the move is rejected.
    """
    if move == "forward":
        code = push_forward(worksite.heights, worksite.robots, robot_index, worksite.cell_area,
                            float(capacity), True)
    elif move == "backward":
        code = back_up(worksite.heights, worksite.robots, robot_index, True)
    else:
        raise ValueError("move must be 'forward' or 'backward'")
    worksite.robots[robot_index, RSTUCK] = 1 if code else 0
    return code == 0


@dataclass
class StepTrace:
    """What happened when one robot executed its behaviors."""

    frame: SensorFrame
    behaviors: BehaviorVector
    forward_ok: bool
    backward_ok: bool
    random_turn: Optional[str]  # "left", "right" or None
    rejected: bool


def _mask_of(behaviors) -> int:
    arr = behaviors.active if isinstance(behaviors, BehaviorVector) else behaviors
    mask = 0
    for q, on in enumerate(arr):
        if on:
            mask |= 1 << q
    return mask


def execute_behaviors(worksite: Worksite, robot_index: int, behaviors, rng: SimRng,
                      frame: Optional[SensorFrame] = None) -> StepTrace:
    mask = _mask_of(behaviors)
    trace = np.zeros(4, dtype=np.int64)
    execute_kernel(worksite.heights, worksite.robots, robot_index, mask, rng.state,
                   worksite.cell_area, float(DEFAULT_CAPACITY), float(THROTTLE_CAPACITY), trace)
    rd = int(trace[TR_RANDOM_DIR])
    bv = behaviors if isinstance(behaviors, BehaviorVector) else BehaviorVector.from_mask(behaviors)
    return StepTrace(frame, bv, bool(trace[TR_FORWARD_OK]), bool(trace[TR_BACKWARD_OK]),
                     None if rd < 0 else ("right" if rd else "left"), bool(trace[TR_REJECTED]))


def step(worksite: Worksite, controllers, rng: SimRng, observer=None) -> Worksite:
    """Advance every robot once, in index order, then advance the clock.

    ``controllers`` is one controller (replicated on every robot) or a
    sequence with one controller per robot.  ``observer(robot, trace)`` is
    called after each robot acts.
    """
    n = worksite.n_robots
    if isinstance(controllers, Sequence):
        if len(controllers) != n:
            raise ValueError("need one controller per robot")
        ctrls = list(controllers)
    else:
        ctrls = [controllers] * n
    for r in range(n):
        frame = sense(worksite, r)
        bv = ctrls[r].decide(frame)
        trace = execute_behaviors(worksite, r, bv, rng, frame)
        if observer is not None:
            observer(r, trace)
    worksite.t += 1
    return worksite


@dataclass
class ScenarioConfig:
    area: tuple = (8, 8)
    depth: int = 1
    robots: int = 4
    timesteps: int = DEFAULT_TIMESTEPS
    blueprint: Optional[Blueprint] = field(default=None, repr=False)

    def make(self, seed: int, robots: Optional[int] = None) -> Worksite:
        n = self.robots if robots is None else robots
        return generate_scenario(self.area[0], self.area[1], self.depth, n,
                                 np.random.default_rng(seed), self.blueprint)


def evaluate(controller, scenario: ScenarioConfig, timesteps: Optional[int] = None, rng=0,
             robots: Optional[int] = None) -> float:
    """Fitness of ``controller`` after one scenario built from seed ``rng``."""
    steps = scenario.timesteps if timesteps is None else timesteps
    if steps < 1:
        raise ValueError("timesteps must be at least 1")
    seed = int(rng) if not isinstance(rng, np.random.Generator) else int(rng.integers(2**63))
    fit, _ = evaluate_batch(controller, scenario, [seed], steps, robots=robots)
    return float(fit[0])


def scenario_stack(scenario: ScenarioConfig, seeds, robots: Optional[int] = None):
    """Initial heights, robot arrays and turn-RNG states for several seeds."""
    sites = [scenario.make(s, robots) for s in seeds]
    heights = np.stack([w.heights for w in sites])
    rob = np.stack([w.robots for w in sites]) if sites else np.zeros((0, 0, 6), np.int64)
    rng = np.array([rng_state_from_seed(s)[0] for s in seeds], dtype=np.int64)
    bp = sites[0].blueprint if sites else scenario.blueprint
    return heights, rob, rng, bp


def evaluate_batch(controller, scenario: ScenarioConfig, seeds, timesteps: Optional[int] = None,
                   robots: Optional[int] = None, memo_size: int = 1 << 14, stack=None):
    """Per-scenario fitness and detector counts of one controller.

    ``stack`` is a precomputed scenario_stack for the same seeds; it is
    copied, never modified.
    """
    steps = scenario.timesteps if timesteps is None else timesteps
    seeds = list(seeds)
    fit = np.zeros(len(seeds))
    det = np.zeros((len(seeds), N_DETECTORS), dtype=np.int64)
    if not seeds:
        return fit, det
    if stack is None:
        heights, rob, rng, bp = scenario_stack(scenario, seeds, robots)
    else:
        heights, rob, rng, bp = stack
        heights, rob, rng = heights.copy(), rob.copy(), rng.copy()
    ctrl, net = controller.kernel_spec()
    run_batch(heights, bp.kind, bp.depth, rob, rng, int(steps), 1.0, float(DEFAULT_CAPACITY),
              float(THROTTLE_CAPACITY), ctrl, *net, memo_size if ctrl == CTRL_NETWORK else 0,
              fit, det)
    return fit, det
