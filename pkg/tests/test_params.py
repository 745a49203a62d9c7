import json

import numpy as np
import pytest

from tendonlab.errors import ConfigError
from tendonlab.params import (LimbParams, SceneParams, load_params,
                              pack_limb, params_from_dict, with_stiffness)


def test_defaults_validate():
    limb, scene = params_from_dict({})
    limb.validate()
    scene.validate()


def test_json_overrides(tmp_path):
    doc = {"limb": {"gravity": 0.0, "link_masses": [2.0, 0.5]},
           "scene": {"chassis_mass": 3.5}}
    path = tmp_path / "params.json"
    path.write_text(json.dumps(doc))
    limb, scene = load_params(path)
    assert limb.gravity == 0.0
    assert limb.link_masses == (2.0, 0.5)
    assert scene.chassis_mass == 3.5
    # untouched fields keep defaults
    assert limb.link_lengths == LimbParams().link_lengths
    assert scene.friction_mu == SceneParams().friction_mu


def test_muscle_overrides():
    doc = {"limb": {"muscles": [{"k": 1.0}, {"k": 2.0}, {"k": 3.0}]}}
    limb, _ = params_from_dict(doc)
    assert [m.k for m in limb.muscles] == [1.0, 2.0, 3.0]
    assert limb.muscles[1].moment_arms == (-0.07, 0.07)


def test_unknown_field_rejected():
    with pytest.raises(ConfigError):
        params_from_dict({"limb": {"girth": 12}})


def test_invalid_values_rejected():
    with pytest.raises(ConfigError):
        params_from_dict({"limb": {"link_masses": [0.0, 1.0]}})
    with pytest.raises(ConfigError):
        params_from_dict({"scene": {"chassis_mass": -1}})


def test_controllability_check():
    # all muscles pulling the same way cannot span both torque directions
    doc = {"limb": {"muscles": [{"moment_arms": [0.05, 0.0]},
                                {"moment_arms": [0.04, 0.0]},
                                {"moment_arms": [0.03, 0.0]}]}}
    with pytest.raises(ConfigError):
        params_from_dict(doc)


def test_with_stiffness():
    limb = with_stiffness(LimbParams(), 7000.0)
    assert all(m.k == 7000.0 for m in limb.muscles)
    p = pack_limb(limb)
    assert p[15 + 3] == 7000.0 and p[15 + 8 + 3] == 7000.0 and p[15 + 16 + 3] == 7000.0
    assert np.isfinite(p).all()
