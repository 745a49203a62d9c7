import math

import numpy as np
import pytest

from tendonlab import nets
from tendonlab.errors import InvalidArchitecture


def random_model(rng, sizes=(5, 7, 3), output="logistic"):
    model = nets.init_mlp(list(sizes), output, seed=int(rng.integers(2**31)))
    model.theta += 0.1 * rng.standard_normal(model.theta.size)
    return model


# ---------------------------------------------------------------------------
# init
# ---------------------------------------------------------------------------

def test_init_deterministic_in_seed():
    a = nets.init_mlp([6, 15, 3], seed=42)
    b = nets.init_mlp([6, 15, 3], seed=42)
    assert np.array_equal(a.theta, b.theta)
    c = nets.init_mlp([6, 15, 3], seed=43)
    assert not np.array_equal(a.theta, c.theta)


def test_param_count_inverse_map_architecture():
    # 6*15 + 15 + 15*3 + 3
    assert nets.param_count([6, 15, 3]) == 153
    assert nets.init_mlp([6, 15, 3]).theta.size == 153


def test_glorot_bounds():
    model = nets.init_mlp([10, 20, 5], seed=1)
    for W, b in model.views():
        bound = math.sqrt(6.0 / (W.shape[0] + W.shape[1]))
        assert np.all(np.abs(W) <= bound)
        assert np.all(b == 0)


def test_init_rejects_bad_architecture():
    with pytest.raises(InvalidArchitecture):
        nets.init_mlp([6])
    with pytest.raises(InvalidArchitecture):
        nets.init_mlp([6, 0, 3])
    with pytest.raises(InvalidArchitecture):
        nets.init_mlp([6, 15, 3], output_activation="relu")


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------

def test_forward_zero_params_logistic():
    model = nets.init_mlp([4, 8, 2], "logistic", seed=0)
    model.theta[:] = 0.0
    out = nets.forward(model, np.ones(4))
    assert np.allclose(out, 0.5)


def test_forward_identity_returns_output_bias():
    model = nets.init_mlp([4, 8, 2], "identity", seed=0)
    model.theta[:] = 0.0
    views = model.views()
    views[-1][1][:] = [1.5, -2.0]
    out = nets.forward(model, np.ones(4))
    assert np.allclose(out, [1.5, -2.0])


def test_forward_matches_independent_oracle():
    # second implementation: per-neuron python loops
    rng = np.random.default_rng(0)
    for _ in range(10):
        model = random_model(rng)
        model.input_mean = rng.standard_normal(5)
        model.input_std = 0.5 + rng.random(5)
        x = rng.standard_normal(5)
        got = nets.forward(model, x)

        h = [(x[i] - model.input_mean[i]) / model.input_std[i] for i in range(5)]
        views = model.views()
        for li, (W, b) in enumerate(views):
            nxt = []
            for j in range(W.shape[1]):
                z = b[j]
                for i in range(W.shape[0]):
                    z += h[i] * W[i, j]
                if li < len(views) - 1:
                    nxt.append(math.tanh(z))
                else:
                    nxt.append(1.0 / (1.0 + math.exp(-z)))
            h = nxt
        assert np.max(np.abs(got - np.array(h))) < 1e-12


def test_logistic_output_in_unit_interval():
    rng = np.random.default_rng(1)
    model = random_model(rng, (6, 15, 3))
    X = 10.0 * rng.standard_normal((200, 6))
    out = nets.forward(model, X)
    assert np.all(out > 0) and np.all(out < 1)


# ---------------------------------------------------------------------------
# backprop
# ---------------------------------------------------------------------------

def test_backprop_zero_at_perfect_fit():
    rng = np.random.default_rng(2)
    model = random_model(rng)
    X = rng.standard_normal((12, 5))
    targets = nets.forward(model, X)
    grad, loss = nets.backprop(model, nets.Dataset(X, targets))
    assert loss == 0.0
    assert np.allclose(grad, 0.0)


def grad_check(model, batch, step=1e-5, floor=1e-6):
    grad, _ = nets.backprop(model, batch)
    worst = 0.0
    for i in range(model.theta.size):
        orig = model.theta[i]
        model.theta[i] = orig + step
        _, lp = nets.backprop(model, batch)
        model.theta[i] = orig - step
        _, lm = nets.backprop(model, batch)
        model.theta[i] = orig
        fd = (lp - lm) / (2 * step)
        worst = max(worst, abs(grad[i] - fd) / max(abs(fd), floor))
    return worst


@pytest.mark.parametrize("output", ["logistic", "identity"])
def test_backprop_matches_finite_differences(output):
    rng = np.random.default_rng(3)
    for _ in range(5):
        model = random_model(rng, (4, 6, 2), output)
        X = rng.standard_normal((8, 4))
        T = rng.random((8, 2)) if output == "logistic" else rng.standard_normal((8, 2))
        assert grad_check(model, nets.Dataset(X, T)) < 1e-4


def test_backprop_duplication_invariant():
    rng = np.random.default_rng(4)
    model = random_model(rng)
    X = rng.standard_normal((10, 5))
    T = rng.random((10, 3))
    g1, l1 = nets.backprop(model, nets.Dataset(X, T))
    g2, l2 = nets.backprop(model, nets.Dataset(np.vstack([X, X]), np.vstack([T, T])))
    assert l1 == pytest.approx(l2, rel=1e-12)
    assert np.allclose(g1, g2, atol=1e-12)


# ---------------------------------------------------------------------------
# adam
# ---------------------------------------------------------------------------

def test_adam_zero_gradient_no_change():
    model = nets.init_mlp([3, 4, 2], seed=5)
    before = model.theta.copy()
    state = nets.init_adam(model.theta.size)
    nets.adam_update(model, state, np.zeros_like(model.theta))
    assert np.array_equal(model.theta, before)
    assert state.step_count == 1


def test_adam_first_step_is_learning_rate():
    # bias-corrected first step: lr * g / (|g| + eps)
    model = nets.init_mlp([1, 1], "identity", seed=0)
    model.theta[:] = [2.0, 0.0]
    state = nets.init_adam(2, learning_rate=0.1)
    nets.adam_update(model, state, np.array([1.0, 0.0]))
    assert model.theta[0] == pytest.approx(2.0 - 0.1, abs=1e-6)
    assert model.theta[1] == 0.0


def test_adam_trajectory_deterministic():
    runs = []
    for _ in range(2):
        model = nets.init_mlp([4, 6, 2], seed=9)
        state = nets.init_adam(model.theta.size)
        rng = np.random.default_rng(11)
        for _ in range(25):
            g = rng.standard_normal(model.theta.size)
            nets.adam_update(model, state, g)
        runs.append(model.theta.copy())
    assert np.array_equal(runs[0], runs[1])


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def test_train_learns_constant_target():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((10000, 6))
    T = np.full((10000, 3), 0.25)
    model = nets.init_mlp([6, 15, 3], seed=7)
    initial = nets.mse_loss(nets.forward(model, X), T)
    model, tr, val = nets.train(model, nets.Dataset(X, T), epochs=20, seed=8)
    assert len(tr) == 20 and len(val) == 20
    assert val[-1] < initial / 10


def test_train_zero_epochs_no_change():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((50, 6))
    T = rng.random((50, 3))
    model = nets.init_mlp([6, 15, 3], seed=1)
    before = model.theta.copy()
    model, tr, val = nets.train(model, nets.Dataset(X, T), epochs=0, seed=2,
                                fit_standardizer=False)
    assert tr == [] and val == []
    assert np.array_equal(model.theta, before)


def test_train_deterministic():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((200, 6))
    T = rng.random((200, 3))
    thetas = []
    for _ in range(2):
        model = nets.init_mlp([6, 15, 3], seed=3)
        model, _, _ = nets.train(model, nets.Dataset(X, T), epochs=3, seed=4)
        thetas.append(model.theta.copy())
    assert np.array_equal(thetas[0], thetas[1])


def test_train_row_permutation_with_composed_plan():
    # same multiset of rows processed in the same effective order gives a
    # bitwise identical result
    rng = np.random.default_rng(9)
    X = rng.standard_normal((100, 6))
    T = rng.random((100, 3))
    data = nets.Dataset(X, T)
    plan = nets.training_plan(21, 100, epochs=3)

    perm = rng.permutation(100)
    inv = np.argsort(perm)
    data2 = nets.Dataset(X[perm], T[perm])
    plan2 = (inv[plan[0]], inv[plan[1]], plan[2])

    m1 = nets.init_mlp([6, 15, 3], seed=5)
    m2 = nets.init_mlp([6, 15, 3], seed=5)
    m1, tr1, v1 = nets.run_training_plan(m1, data, plan)
    m2, tr2, v2 = nets.run_training_plan(m2, data2, plan2)
    assert tr1 == tr2 and v1 == v2
    assert np.array_equal(m1.theta, m2.theta)


def test_train_standardizer_from_training_split():
    rng = np.random.default_rng(10)
    X = 100.0 * rng.standard_normal((50, 6)) + 40.0
    T = rng.random((50, 3))
    model = nets.init_mlp([6, 15, 3], seed=6)
    model, _, _ = nets.train(model, nets.Dataset(X, T), epochs=1, seed=7)
    assert not np.allclose(model.input_mean, 0.0)
    train_idx, _, _ = nets.training_plan(7, 50, 1)
    assert np.allclose(model.input_mean, X[train_idx].mean(axis=0))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_model_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(11)
    model = random_model(rng, (6, 15, 3))
    model.input_mean = rng.standard_normal(6)
    model.input_std = 0.5 + rng.random(6)
    path = tmp_path / "model.json"
    nets.save_model(model, path)
    loaded = nets.load_model(path)
    assert loaded.layer_sizes == model.layer_sizes
    assert loaded.output_activation == model.output_activation
    assert np.array_equal(loaded.theta, model.theta)
    assert np.array_equal(loaded.input_mean, model.input_mean)
    assert np.array_equal(loaded.input_std, model.input_std)
    x = rng.standard_normal(6)
    assert np.array_equal(nets.forward(model, x), nets.forward(loaded, x))
