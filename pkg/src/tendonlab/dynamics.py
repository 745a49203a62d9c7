"""Planar dynamics of the two-joint, three-tendon limb and the locomotion scene.

The op-level functions here (`tendon_lengths`, `muscle_force`, ...) are the
reference semantics, shared with the rollout kernels via `_core._fallback`.
Long simulations go through `simulate_limb` / `simulate_scene`, which
dispatch to the selected kernel backend.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _core
from ._core import _fallback as _ref
from .errors import NumericalDivergence
from .params import (SAMPLE_DT, SUBSTEP, SUBSTEPS_PER_SAMPLE, LimbParams,
                     SceneParams, pack_limb, pack_scene)


@dataclass
class LimbState:
    q: np.ndarray = field(default_factory=lambda: np.zeros(2))
    qd: np.ndarray = field(default_factory=lambda: np.zeros(2))
    qdd: np.ndarray = field(default_factory=lambda: np.zeros(2))


@dataclass
class SceneState:
    x: float = 0.0
    y: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    limb: LimbState = field(default_factory=LimbState)
    foot_contact: bool = False


def limb_rest_state() -> LimbState:
    return LimbState()


def scene_initial_state(limb: LimbParams, scene: SceneParams) -> SceneState:
    """Fixed start for locomotion runs: hanging limb, gantry-only equilibrium."""
    mt = scene.chassis_mass + sum(limb.link_masses)
    y0 = scene.gantry_rest_height - mt * limb.gravity / scene.gantry_stiffness
    return SceneState(x=0.0, y=y0)


# ---------------------------------------------------------------------------
# Op-level physics
# ---------------------------------------------------------------------------

def tendon_lengths(q, qd, limb: LimbParams):
    """Musculotendon lengths and lengthening velocities at (q, qd).

    Linear excursion model: l_i = l_ref_i - sum_j R_ij q_j with constant
    moment arms; the reference length is the length at q = (0, 0), which by
    construction equals l_opt.
    """
    lengths = np.empty(3)
    velocities = np.empty(3)
    for i, m in enumerate(limb.muscles):
        r1, r2 = m.moment_arms
        lengths[i] = m.l_opt - (r1 * q[0] + r2 * q[1])
        velocities[i] = -(r1 * qd[0] + r2 * qd[1])
    return lengths, velocities


def muscle_force(a, l, l_dot, m) -> float:
    """Tendon tension (N): active FLV drive plus unilateral spring/damper."""
    return _ref.tension(_ref.clamp01(a), l, l_dot,
                        m.f_max, m.l_opt, m.l_rest, m.k, m.b, m.v_max)


def fl_curve(x):
    """Normalized force-length curve; fl(1) = 1."""
    e = (x - 1.0) / 0.45
    return np.exp(-e * e)


def fv_curve(y):
    """Normalized force-velocity curve of shortening speed y; fv(0) = 1."""
    y = np.asarray(y, dtype=float)
    hyper = (1.0 - y) / (1.0 + 3.0 * y)
    out = np.where(y <= _ref.FV_PLATEAU_Y, 1.5, np.where(y >= 1.0, 0.0, hyper))
    return out if out.ndim else float(out)


def joint_torques(tensions, limb: LimbParams):
    """tau = R^T f: non-negative tendon tensions to the two joint torques."""
    R = limb.moment_arm_matrix()
    return R.T @ np.asarray(tensions, dtype=float)


def mass_matrix(q, limb: LimbParams):
    m1, m2 = limb.link_masses
    lc1, lc2 = limb.link_com_offsets
    I1, I2 = limb.link_inertias
    L1 = limb.link_lengths[0]
    c2 = np.cos(q[1])
    M11 = m1 * lc1 ** 2 + I1 + m2 * (L1 ** 2 + lc2 ** 2 + 2 * L1 * lc2 * c2) + I2
    M12 = m2 * (lc2 ** 2 + L1 * lc2 * c2) + I2
    M22 = m2 * lc2 ** 2 + I2
    return np.array([[M11, M12], [M12, M22]])


def coriolis_matrix(q, qd, limb: LimbParams):
    """Christoffel-consistent C(q, qd); Mdot - 2C is skew-symmetric."""
    m2 = limb.link_masses[1]
    lc2 = limb.link_com_offsets[1]
    L1 = limb.link_lengths[0]
    h = m2 * L1 * lc2 * np.sin(q[1])
    return np.array([[-h * qd[1], -h * (qd[0] + qd[1])],
                     [h * qd[0], 0.0]])


def gravity_torque(q, limb: LimbParams):
    m1, m2 = limb.link_masses
    lc1, lc2 = limb.link_com_offsets
    L1 = limb.link_lengths[0]
    g = limb.gravity
    s1 = np.sin(q[0])
    s12 = np.sin(q[0] + q[1])
    return np.array([g * (m1 * lc1 * s1 + m2 * (L1 * s1 + lc2 * s12)),
                     g * m2 * lc2 * s12])


def forward_dynamics(state: LimbState, tau, limb: LimbParams):
    """qdd solving M qdd + C qd + G + D qd = tau."""
    p = pack_limb(limb)
    qdd1, qdd2 = _ref.limb_accel(state.q[0], state.q[1], state.qd[0], state.qd[1],
                                 float(tau[0]), float(tau[1]), p)
    return np.array([qdd1, qdd2])


def mechanical_energy(state: LimbState, limb: LimbParams) -> float:
    """Kinetic + gravitational + parallel-spring energy of the fixed-base limb."""
    M = mass_matrix(state.q, limb)
    ke = 0.5 * state.qd @ M @ state.qd
    m1, m2 = limb.link_masses
    lc1, lc2 = limb.link_com_offsets
    L1 = limb.link_lengths[0]
    g = limb.gravity
    c1 = np.cos(state.q[0])
    c12 = np.cos(state.q[0] + state.q[1])
    pe = -g * (m1 * lc1 * c1 + m2 * (L1 * c1 + lc2 * c12))
    lengths, _ = tendon_lengths(state.q, state.qd, limb)
    spring = sum(0.5 * m.k * max(0.0, l - m.l_rest) ** 2
                 for m, l in zip(limb.muscles, lengths))
    return float(ke + pe + spring)


# ---------------------------------------------------------------------------
# Time integration
# ---------------------------------------------------------------------------

def _check_dt(dt, h):
    n = int(round(dt / h))
    if n < 1 or abs(n * h - dt) > 1e-9:
        raise ValueError(f"dt={dt} must be a positive multiple of the substep {h}")
    return n


def step(state: LimbState, a, dt, limb: LimbParams, h=SUBSTEP) -> LimbState:
    """Advance the fixed-base limb by dt under constant activations a."""
    n = _check_dt(dt, h)
    act = np.asarray(a, dtype=np.float64).reshape(1, 3)
    out = np.empty((1, 6))
    idx, q1, q2, qd1, qd2 = _core.limb_rollout(
        state.q[0], state.q[1], state.qd[0], state.qd[1], act, n, h, pack_limb(limb), out)
    if idx >= 0:
        raise NumericalDivergence("limb state diverged", sample_index=0)
    return LimbState(q=out[0, 0:2].copy(), qd=out[0, 2:4].copy(), qdd=out[0, 4:6].copy())


def simulate_limb(state: LimbState, activations, limb: LimbParams,
                  n_sub=SUBSTEPS_PER_SAMPLE, h=SUBSTEP):
    """Roll the limb through (T, 3) activations, one output sample per row.

    Returns (kinematics (T, 6), final LimbState, diverged_index or -1); rows
    at and after a divergence are invalid.
    """
    act = np.ascontiguousarray(activations, dtype=np.float64)
    out = np.empty((act.shape[0], 6))
    idx, q1, q2, qd1, qd2 = _core.limb_rollout(
        state.q[0], state.q[1], state.qd[0], state.qd[1], act, n_sub, h, pack_limb(limb), out)
    final = LimbState(q=np.array([q1, q2]), qd=np.array([qd1, qd2]),
                      qdd=out[-1, 4:6].copy() if idx < 0 else np.zeros(2))
    return out, final, idx


def scene_step(state: SceneState, a, dt, scene: SceneParams, limb: LimbParams,
               h=SUBSTEP) -> SceneState:
    """Advance the locomotion scene by dt under constant activations a."""
    n = _check_dt(dt, h)
    act = np.asarray(a, dtype=np.float64).reshape(1, 3)
    traj, final, idx = simulate_scene(state, act, limb, scene, n_sub=n, h=h)
    if idx >= 0:
        raise NumericalDivergence("scene state diverged", sample_index=0)
    return final


def simulate_scene(state: SceneState, activations, limb: LimbParams,
                   scene: SceneParams, n_sub=SUBSTEPS_PER_SAMPLE, h=SUBSTEP):
    """Roll the scene through (T, 3) activations.

    Returns (trajectory (T, 13), final SceneState, diverged_index or -1).
    Trajectory columns: x, y, vx, vy, q1, q2, qd1, qd2, qdd1, qdd2,
    normal force, tangential force, contact flag.
    """
    act = np.ascontiguousarray(activations, dtype=np.float64)
    out = np.empty((act.shape[0], 13))
    idx, fin = _core.scene_rollout(
        state.x, state.y, state.vx, state.vy,
        state.limb.q[0], state.limb.q[1], state.limb.qd[0], state.limb.qd[1],
        act, n_sub, h, pack_limb(limb), pack_scene(scene), out)
    x, y, vx, vy, q1, q2, qd1, qd2 = fin
    limb_state = LimbState(q=np.array([q1, q2]), qd=np.array([qd1, qd2]),
                           qdd=out[-1, 8:10].copy() if idx < 0 else np.zeros(2))
    final = SceneState(x=x, y=y, vx=vx, vy=vy, limb=limb_state,
                       foot_contact=bool(out[-1, 12] > 0.0) if idx < 0 else False)
    return out, final, idx


def sample_kinematics(kinematics_row):
    """The 6-vector (q1, q2, qd1, qd2, qdd1, qdd2) fed to the inverse map."""
    return np.asarray(kinematics_row[:6], dtype=float)


def sign_flip_rate(series, rate_hz, deadband=0.0):
    """Full-swing sign changes per second of a sampled signal.

    Samples inside +-deadband are ignored, so micro-jitter around zero does
    not count; only excursions crossing from one band to the other do.
    """
    x = np.asarray(series, dtype=float)
    s = np.where(x > deadband, 1, np.where(x < -deadband, -1, 0))
    s = s[s != 0]
    if len(s) < 2:
        return 0.0
    flips = np.count_nonzero(s[1:] != s[:-1])
    return flips * rate_hz / max(len(x) - 1, 1)


def detect_chatter(qd_series, rate_hz, min_flip_hz=50.0, min_rms=0.05):
    """Sustained high-frequency full-amplitude oscillation of every joint.

    Genuine integrator chatter shakes the whole limb through the inertia
    coupling; a single clamped joint rattling against its limit does not
    qualify.
    """
    qd = np.asarray(qd_series, dtype=float)
    for j in range(qd.shape[1]):
        rms = float(np.sqrt(np.mean(qd[:, j] ** 2)))
        if rms < min_rms:
            return False
        if sign_flip_rate(qd[:, j], rate_hz, deadband=0.5 * rms) < min_flip_hz:
            return False
    return True


assert SAMPLE_DT == SUBSTEPS_PER_SAMPLE * SUBSTEP
