"""Reference trajectories (cyclical, point-to-point, exploration) and metrics."""

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, LimitViolation

RATE_HZ = 100.0
WASHOUT = 0.25

CIRCLE_FREQ_HZ = 0.7
CIRCLE_CYCLES = 21
CIRCLE_CENTER = (0.0, 0.0)
CIRCLE_AMPLITUDE = (0.5, 0.5)

P2P_POINTS = 10
P2P_HOLD_S = 3.0


@dataclass
class ReferenceTrajectory:
    samples: np.ndarray   # (T, 6): q1, q2, qd1, qd2, qdd1, qdd2 at 100 Hz
    label: str            # cyclical | point_to_point | exploration

    def __len__(self):
        return self.samples.shape[0]


def cyclical_reference(freq_hz=CIRCLE_FREQ_HZ, cycles=CIRCLE_CYCLES,
                       center=CIRCLE_CENTER, amplitude=CIRCLE_AMPLITUDE,
                       joint_limits=((-math.pi / 2, math.pi / 2),) * 2,
                       rate_hz=RATE_HZ, label="cyclical"):
    """Circle in joint space: sinusoids with a pi/2 phase difference.

    Sample count is floor(cycles / freq * rate); a non-integer product rounds
    down.
    """
    if freq_hz <= 0:
        raise ValueError("frequency must be positive")
    for c, a, (lo, hi) in zip(center, amplitude, joint_limits):
        if c - abs(a) < lo or c + abs(a) > hi:
            raise LimitViolation(f"circle [{c - abs(a)}, {c + abs(a)}] exits [{lo}, {hi}]")
    n = int(math.floor(cycles / freq_hz * rate_hz))
    t = np.arange(n) / rate_hz
    w = 2.0 * math.pi * freq_hz
    phases = (w * t, w * t + math.pi / 2)
    out = np.empty((n, 6))
    for j, (c, a, ph) in enumerate(zip(center, amplitude, phases)):
        out[:, j] = c + a * np.sin(ph)
        out[:, 2 + j] = a * w * np.cos(ph)
        out[:, 4 + j] = -a * w * w * np.sin(ph)
    return ReferenceTrajectory(out, label)


def p2p_reference(seed, n_points=P2P_POINTS, hold_s=P2P_HOLD_S,
                  joint_limits=((-math.pi / 2, math.pi / 2),) * 2,
                  rate_hz=RATE_HZ):
    """Random joint-angle holds: uniform targets within each joint's range,
    zero desired velocity and acceleration throughout."""
    if n_points < 1 or hold_s <= 0:
        raise ValueError("need n_points >= 1 and hold_s > 0")
    rng = np.random.default_rng(seed)
    targets = np.column_stack([rng.uniform(lo, hi, n_points)
                               for (lo, hi) in joint_limits])
    hold = int(round(hold_s * rate_hz))
    out = np.zeros((n_points * hold, 6))
    out[:, 0:2] = np.repeat(targets, hold, axis=0)
    return ReferenceTrajectory(out, "point_to_point")


def exploration_reference(rng, joint_limits=((-math.pi / 2, math.pi / 2),) * 2,
                          period_s=1.3, cycles=1, rate_hz=RATE_HZ,
                          amp_range=(0.1, 0.6)):
    """Random joint-space ellipse for locomotion exploration.

    Centers fall in the middle half of each joint range, amplitudes are
    uniform in amp_range (clipped to stay inside the limits), and the second
    joint gets a random phase offset.
    """
    centers = []
    amps = []
    for lo, hi in joint_limits:
        mid = 0.5 * (lo + hi)
        span = hi - lo
        c = rng.uniform(mid - span / 4, mid + span / 4)
        a = rng.uniform(*amp_range)
        a = min(a, c - lo, hi - c)
        centers.append(c)
        amps.append(a)
    phases = (0.0, rng.uniform(0.0, 2.0 * math.pi))
    n = int(round(period_s * rate_hz)) * cycles
    t = np.arange(n) / rate_hz
    w = 2.0 * math.pi / period_s
    out = np.empty((n, 6))
    for j in range(2):
        ph = w * t + phases[j]
        out[:, j] = centers[j] + amps[j] * np.sin(ph)
        out[:, 2 + j] = amps[j] * w * np.cos(ph)
        out[:, 4 + j] = -amps[j] * w * w * np.sin(ph)
    return ReferenceTrajectory(out, "exploration")


@dataclass
class TaskMetrics:
    rmse_per_joint: np.ndarray
    energy: float
    washout_fraction: float = WASHOUT


def rmse(realized, desired, washout=WASHOUT):
    """Per-joint RMSE (rad) over the post-washout part of the signals."""
    realized = np.asarray(realized, dtype=float)
    desired = np.asarray(desired, dtype=float)
    if realized.shape != desired.shape:
        raise LengthMismatch(f"shapes {realized.shape} vs {desired.shape}")
    if not 0.0 <= washout < 1.0:
        raise ValueError("washout must lie in [0, 1)")
    start = int(math.floor(washout * realized.shape[0]))
    err = realized[start:] - desired[start:]
    return np.sqrt(np.mean(err * err, axis=0))


def energy(activations):
    """Sum of squared activations over all muscles and time."""
    a = np.asarray(activations, dtype=float)
    return float(np.sum(a * a))


def locomotion_reward(trajectory):
    """Net forward chassis displacement (m): final x minus initial x."""
    traj = np.asarray(trajectory, dtype=float)
    x = traj[:, 0] if traj.ndim == 2 else traj
    if len(x) == 0:
        raise ValueError("empty trajectory")
    return float(x[-1] - x[0])


def reference_to_csv(ref: ReferenceTrajectory, rate_hz=RATE_HZ) -> str:
    buf = io.StringIO()
    buf.write("t,q1,q2,qd1,qd2,qdd1,qdd2\n")
    for i, row in enumerate(ref.samples):
        cells = ",".join(f"{v:.9g}" for v in row)
        buf.write(f"{i / rate_hz:.9g},{cells}\n")
    return buf.getvalue()
