"""The compiled kernels and the pure-Python fallback must agree bit for bit."""

import numpy as np
import pytest

from tendonlab._core import available_backends, get_backend
from tendonlab.params import LimbParams, SceneParams, pack_limb, pack_scene, with_stiffness

needs_compiled = pytest.mark.skipif(
    "compiled" not in available_backends(), reason="compiled kernels unavailable")


@needs_compiled
@pytest.mark.parametrize("stiffness", [0.0, 2000.0, 100000.0])
def test_limb_rollout_bitwise_identical(stiffness):
    rng = np.random.default_rng(17)
    p = pack_limb(with_stiffness(LimbParams(), stiffness))
    act = rng.random((3000, 3))
    results = {}
    for name in ("python", "compiled"):
        out = np.zeros((3000, 6))
        ret = get_backend(name).limb_rollout(0.1, -0.2, 0.3, 0.0, act, 10, 1e-3, p, out)
        results[name] = (ret, out)
    assert results["python"][0] == results["compiled"][0]
    assert np.array_equal(results["python"][1], results["compiled"][1])


@needs_compiled
@pytest.mark.parametrize("stiffness", [0.0, 2000.0, 100000.0])
def test_scene_rollout_bitwise_identical(stiffness):
    rng = np.random.default_rng(23)
    p = pack_limb(with_stiffness(LimbParams(), stiffness))
    sc = pack_scene(SceneParams())
    act = rng.random((3000, 3))
    results = {}
    for name in ("python", "compiled"):
        out = np.zeros((3000, 13))
        ret = get_backend(name).scene_rollout(
            0.0, 0.6, 0.0, 0.0, 0.05, -0.1, 0.0, 0.0, act, 10, 1e-3, p, sc, out)
        results[name] = (ret, out)
    assert results["python"][0] == results["compiled"][0]
    assert np.array_equal(results["python"][1], results["compiled"][1])


@needs_compiled
def test_divergence_reported_identically():
    p = pack_limb(with_stiffness(LimbParams(), 1e8))
    act = np.zeros((10, 3))
    idxs = []
    for name in ("python", "compiled"):
        out = np.zeros((10, 6))
        ret = get_backend(name).limb_rollout(0.3, -0.3, 0.0, 0.0, act, 10, 1e-3, p, out)
        idxs.append(ret[0])
    assert idxs[0] == idxs[1]
    assert idxs[0] >= 0
