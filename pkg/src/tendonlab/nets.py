"""From-scratch MLP with MSE loss and ADAM, shared by the inverse map and PPO.

Parameters live in one flat float64 vector; per-layer weight/bias views keep
the matrix arithmetic in numpy while the optimizer touches a single array.
Hidden activation is tanh; the output layer is logistic or identity.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArchitecture, LengthMismatch

ADAM_LR = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
BATCH_SIZE = 128


@dataclass
class MlpModel:
    layer_sizes: list
    output_activation: str                 # "logistic" | "identity"
    theta: np.ndarray
    input_mean: np.ndarray
    input_std: np.ndarray

    def views(self):
        return param_views(self.layer_sizes, self.theta)

    def copy(self):
        return MlpModel(list(self.layer_sizes), self.output_activation,
                        self.theta.copy(), self.input_mean.copy(),
                        self.input_std.copy())


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    learning_rate: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPS


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise LengthMismatch("inputs and targets must have equal row counts")
        if not (np.isfinite(self.inputs).all() and np.isfinite(self.targets).all()):
            raise ValueError("dataset contains non-finite values")

    def __len__(self):
        return self.inputs.shape[0]


def param_count(layer_sizes):
    return sum((a + 1) * b for a, b in zip(layer_sizes[:-1], layer_sizes[1:]))


def param_views(layer_sizes, theta):
    """Per-layer (W, b) views into the flat parameter vector."""
    views = []
    o = 0
    for a, b in zip(layer_sizes[:-1], layer_sizes[1:]):
        W = theta[o:o + a * b].reshape(a, b)
        o += a * b
        bias = theta[o:o + b]
        o += b
        views.append((W, bias))
    return views


def init_mlp(layer_sizes, output_activation="logistic", seed=0) -> MlpModel:
    """Glorot-uniform weights, zero biases; deterministic in the seed."""
    if len(layer_sizes) < 2:
        raise InvalidArchitecture("need at least input and output layers")
    if any(int(w) < 1 or int(w) != w for w in layer_sizes):
        raise InvalidArchitecture(f"bad layer widths: {layer_sizes}")
    if output_activation not in ("logistic", "identity"):
        raise InvalidArchitecture(f"unknown output activation {output_activation!r}")
    sizes = [int(w) for w in layer_sizes]
    rng = np.random.default_rng(seed)
    theta = np.zeros(param_count(sizes))
    for W, b in param_views(sizes, theta):
        bound = np.sqrt(6.0 / (W.shape[0] + W.shape[1]))
        W[:] = rng.uniform(-bound, bound, W.shape)
    d_in = sizes[0]
    return MlpModel(sizes, output_activation, theta, np.zeros(d_in), np.ones(d_in))


def init_adam(n_params, learning_rate=ADAM_LR) -> AdamState:
    return AdamState(m=np.zeros(n_params), v=np.zeros(n_params),
                     learning_rate=learning_rate)


def _logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


def forward(model: MlpModel, x):
    """Network output for a single input vector or an (N, d_in) batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    out, _ = forward_cached(model, x.reshape(1, -1) if single else x)
    return out[0] if single else out


def forward_cached(model: MlpModel, X):
    """Batch forward pass keeping the post-activation of every layer."""
    h = (X - model.input_mean) / model.input_std
    cache = [h]
    views = model.views()
    for i, (W, b) in enumerate(views):
        z = h @ W + b
        if i < len(views) - 1:
            h = np.tanh(z)
        elif model.output_activation == "logistic":
            h = _logistic(z)
        else:
            h = z
        cache.append(h)
    return h, cache


def backward_from_output_grad(model: MlpModel, cache, d_out):
    """Gradient of a scalar loss wrt theta, given dLoss/d(network output)."""
    grad = np.zeros_like(model.theta)
    gviews = param_views(model.layer_sizes, grad)
    views = model.views()
    y = cache[-1]
    if model.output_activation == "logistic":
        delta = d_out * y * (1.0 - y)
    else:
        delta = d_out
    for i in range(len(views) - 1, -1, -1):
        W, _ = views[i]
        gW, gb = gviews[i]
        gW[:] = cache[i].T @ delta
        gb[:] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ W.T) * (1.0 - cache[i] ** 2)
    return grad


def mse_loss(pred, targets):
    err = pred - targets
    return float(np.mean(err * err))


def backprop(model: MlpModel, batch: Dataset):
    """(gradient, loss) of the mean squared error over the batch."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    pred, cache = forward_cached(model, batch.inputs)
    err = pred - batch.targets
    d_out = (2.0 / err.size) * err
    return backward_from_output_grad(model, cache, d_out), float(np.mean(err * err))


def adam_update(model: MlpModel, state: AdamState, grad):
    """Bias-corrected ADAM step; mutates model.theta and state in place."""
    state.step_count += 1
    t = state.step_count
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    mhat = state.m / (1.0 - state.beta1 ** t)
    vhat = state.v / (1.0 - state.beta2 ** t)
    model.theta -= state.learning_rate * mhat / (np.sqrt(vhat) + state.epsilon)
    return model, state


def training_plan(seed, n_rows, epochs, split=0.8):
    """Deterministic row bookkeeping: (train_idx, val_idx, per-epoch orders)."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows)
    n_train = int(round(split * n_rows))
    train_idx = perm[:n_train]
    val_idx = perm[n_train:]
    orders = [rng.permutation(n_train) for _ in range(epochs)]
    return train_idx, val_idx, orders


def run_training_plan(model: MlpModel, data: Dataset, plan, state=None,
                      batch_size=BATCH_SIZE):
    """Minibatch MSE/ADAM training along a fixed row plan; see `train`."""
    train_idx, val_idx, orders = plan
    if state is None:
        state = init_adam(model.theta.size)
    train_losses = []
    val_losses = []
    Xtr = data.inputs[train_idx]
    Ttr = data.targets[train_idx]
    Xval = data.inputs[val_idx]
    Tval = data.targets[val_idx]
    for order in orders:
        total = 0.0
        for start in range(0, len(order), batch_size):
            rows = order[start:start + batch_size]
            pred, cache = forward_cached(model, Xtr[rows])
            err = pred - Ttr[rows]
            d_out = (2.0 / err.size) * err
            grad = backward_from_output_grad(model, cache, d_out)
            adam_update(model, state, grad)
            total += float(np.mean(err * err)) * len(rows)
        train_losses.append(total / len(order))
        if len(val_idx):
            val_losses.append(mse_loss(forward(model, Xval), Tval))
        else:
            val_losses.append(float("nan"))
    return model, train_losses, val_losses


def train(model: MlpModel, data: Dataset, epochs, split=0.8, seed=0,
          fit_standardizer=True, batch_size=BATCH_SIZE):
    """Train for `epochs` passes with a seeded 80/20 split and reshuffles.

    Returns (model, per-epoch train MSE, per-epoch validation MSE). Input
    z-scoring statistics come from the training split and are stored in the
    model; pass fit_standardizer=False to keep existing statistics (used
    when refining an already-trained map).
    """
    if len(data) < 10:
        raise ValueError("dataset must have at least 10 rows")
    plan = training_plan(seed, len(data), epochs, split)
    if fit_standardizer:
        Xtr = data.inputs[plan[0]]
        model.input_mean = Xtr.mean(axis=0)
        std = Xtr.std(axis=0)
        std[std < 1e-12] = 1.0
        model.input_std = std
    return run_training_plan(model, data, plan, batch_size=batch_size)


# ---------------------------------------------------------------------------
# serialization (bit-exact JSON round trip)
# ---------------------------------------------------------------------------

def model_to_dict(model: MlpModel) -> dict:
    return {
        "layer_sizes": list(model.layer_sizes),
        "output_activation": model.output_activation,
        "input_mean": model.input_mean.tolist(),
        "input_std": model.input_std.tolist(),
        "theta": model.theta.tolist(),
    }


def model_from_dict(doc: dict) -> MlpModel:
    return MlpModel(
        layer_sizes=[int(w) for w in doc["layer_sizes"]],
        output_activation=doc["output_activation"],
        theta=np.array(doc["theta"], dtype=np.float64),
        input_mean=np.array(doc["input_mean"], dtype=np.float64),
        input_std=np.array(doc["input_std"], dtype=np.float64),
    )


def save_model(model: MlpModel, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> MlpModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
