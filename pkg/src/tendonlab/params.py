"""Physical parameters of the limb and the locomotion scene.

All defaults live here. Any field can be overridden from a JSON document
(see `load_params`); the parallel-spring stiffness ``k`` is the quantity the
experiments sweep, via `with_stiffness`.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError

# Internal integration substep (s). Outputs are sampled every SAMPLE_DT,
# i.e. at 100 Hz with SUBSTEPS_PER_SAMPLE substeps in between.
SUBSTEP = 1e-3
SAMPLE_DT = 1e-2
SUBSTEPS_PER_SAMPLE = 10

# Any |velocity| beyond this (rad/s or m/s), or a non-finite value, is
# treated as numerical divergence instead of silent blow-up.
DIVERGENCE_BOUND = 1e3


@dataclass(frozen=True)
class MuscleParams:
    """One musculotendon: FLV contractile element + parallel spring/damper."""

    f_max: float = 1100.0     # peak active tension (N)
    l_opt: float = 0.3        # optimal CE length; also the tendon length at q = (0, 0) (m)
    l_rest: float = 0.3       # slack length of the parallel spring (m)
    k: float = 0.0            # parallel stiffness (N/m) -- the swept variable
    b: float = 100.0          # parallel damping (N*s/m)
    v_max: float = 1.0        # maximum shortening speed (m/s)
    moment_arms: tuple = (0.07, 0.0)  # signed per-joint moment arms (m)

    def validate(self):
        if not (self.f_max > 0 and self.l_opt > 0 and self.v_max > 0):
            raise ConfigError("f_max, l_opt, v_max must be positive")
        if self.k < 0 or self.b < 0:
            raise ConfigError("k and b must be non-negative")
        if all(r == 0.0 for r in self.moment_arms):
            raise ConfigError("at least one moment arm must be nonzero")


def _default_muscles():
    # Minimal 3-muscle routing whose pull cone spans both torque directions:
    # mono-articular joint-1 flexor, bi-articular extensor/flexor,
    # mono-articular joint-2 extensor.
    return (
        MuscleParams(moment_arms=(0.07, 0.0)),
        MuscleParams(moment_arms=(-0.07, 0.07)),
        MuscleParams(moment_arms=(0.0, -0.07)),
    )


@dataclass(frozen=True)
class LimbParams:
    """Planar two-link limb actuated by three tendons."""

    link_lengths: tuple = (0.3, 0.3)
    link_masses: tuple = (1.0, 1.0)
    link_com_offsets: tuple = (0.15, 0.15)
    link_inertias: tuple = (0.0075, 0.0075)   # m*L^2/12 about the COM
    joint_damping: tuple = (0.5, 0.5)         # N*m*s/rad
    joint_limits: tuple = ((-math.pi / 2, math.pi / 2), (-math.pi / 2, math.pi / 2))
    gravity: float = 9.81                     # signed; positive pulls along -y
    muscles: tuple = field(default_factory=_default_muscles)

    def validate(self):
        for v in (*self.link_lengths, *self.link_masses, *self.link_inertias):
            if v <= 0:
                raise ConfigError("lengths, masses and inertias must be positive")
        for lo, hi in self.joint_limits:
            if not lo < hi:
                raise ConfigError("joint limit intervals must be nonempty")
        if len(self.muscles) != 3:
            raise ConfigError("exactly 3 muscles required")
        for m in self.muscles:
            m.validate()
        if not _positively_spans(self.moment_arm_matrix()):
            raise ConfigError("muscle pull cone does not span both torque directions")

    def moment_arm_matrix(self):
        """3x2 matrix R; tendon excursion is -R q, joint torque is R^T f."""
        return np.array([m.moment_arms for m in self.muscles], dtype=float)


@dataclass(frozen=True)
class SceneParams:
    """Chassis + gantry + ground for the locomotion task."""

    chassis_mass: float = 2.0
    x_viscous_friction: float = 2.0    # N*s/m
    x_coulomb_friction: float = 0.5    # N
    gantry_stiffness: float = 500.0    # N/m
    gantry_damping: float = 50.0       # N*s/m
    gantry_rest_height: float = 0.63   # m; static stance carries weight on the foot
    contact_stiffness: float = 2e4     # N/m
    contact_damping: float = 200.0     # N*s/m
    friction_mu: float = 0.8
    ground_height: float = 0.0

    def validate(self):
        if self.chassis_mass <= 0:
            raise ConfigError("chassis_mass must be positive")
        for v in (self.x_viscous_friction, self.x_coulomb_friction, self.gantry_stiffness,
                  self.gantry_damping, self.contact_stiffness, self.contact_damping,
                  self.friction_mu):
            if v < 0:
                raise ConfigError("friction/stiffness/damping values must be non-negative")


def _positively_spans(R):
    # Three generators positively span the plane iff the largest angular gap
    # between consecutive generator directions is below pi.
    angles = sorted(math.atan2(r[1], r[0]) for r in R if r[0] != 0 or r[1] != 0)
    if len(angles) < 2:
        return False
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(2 * math.pi - (angles[-1] - angles[0]))
    return max(gaps) < math.pi - 1e-12


def with_stiffness(limb: LimbParams, k: float) -> LimbParams:
    """All three parallel springs set to the same stiffness, as in the sweeps."""
    return replace(limb, muscles=tuple(replace(m, k=float(k)) for m in limb.muscles))


# ---------------------------------------------------------------------------
# JSON interface: a document with optional "limb" and "scene" objects whose
# field names match the dataclasses exactly; missing fields keep defaults.
# ---------------------------------------------------------------------------

def _build(cls, defaults, data, nested=()):
    unknown = set(data) - set(asdict(defaults))
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key == "muscles":
            if len(value) != 3:
                raise ConfigError("muscles must list exactly 3 entries")
            kwargs[key] = tuple(
                _build(MuscleParams, base, entry)
                for base, entry in zip(defaults.muscles, value)
            )
        elif isinstance(value, list):
            kwargs[key] = _tuplify(value)
        else:
            kwargs[key] = value
    return replace(defaults, **kwargs)


def _tuplify(value):
    return tuple(_tuplify(v) if isinstance(v, list) else v for v in value)


def params_from_dict(doc: dict):
    """Build (LimbParams, SceneParams) from a parsed JSON document."""
    limb = _build(LimbParams, LimbParams(), doc.get("limb", {}))
    scene = _build(SceneParams, SceneParams(), doc.get("scene", {}))
    limb.validate()
    scene.validate()
    return limb, scene


def load_params(path):
    with open(path) as fh:
        return params_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Packed layouts shared with the simulation kernels (both backends).
# ---------------------------------------------------------------------------

LIMB_PACK_SIZE = 39
SCENE_PACK_SIZE = 10


def pack_limb(limb: LimbParams) -> np.ndarray:
    p = np.empty(LIMB_PACK_SIZE, dtype=np.float64)
    p[0:2] = limb.link_lengths
    p[2:4] = limb.link_masses
    p[4:6] = limb.link_com_offsets
    p[6:8] = limb.link_inertias
    p[8:10] = limb.joint_damping
    p[10] = limb.joint_limits[0][0]
    p[11] = limb.joint_limits[0][1]
    p[12] = limb.joint_limits[1][0]
    p[13] = limb.joint_limits[1][1]
    p[14] = limb.gravity
    for i, m in enumerate(limb.muscles):
        o = 15 + 8 * i
        p[o:o + 8] = (m.f_max, m.l_opt, m.l_rest, m.k, m.b, m.v_max,
                      m.moment_arms[0], m.moment_arms[1])
    return p


def pack_scene(scene: SceneParams) -> np.ndarray:
    return np.array([
        scene.chassis_mass, scene.x_viscous_friction, scene.x_coulomb_friction,
        scene.gantry_stiffness, scene.gantry_damping, scene.gantry_rest_height,
        scene.contact_stiffness, scene.contact_damping, scene.friction_mu,
        scene.ground_height,
    ], dtype=np.float64)
