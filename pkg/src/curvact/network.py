"""Dense scalar-output networks with explicit forward and backward passes.

Layers are numbered 1..L; layer l maps h^(l-1) to z^(l) = W^(l) h^(l-1) + b^(l)
and h^(l) = sigma(z^(l)) for l < L.  The output layer is linear with a single
unit, f = z^(L).  The squared loss is 0.5 * (f - y)^2.

Flat parameter vectors (gradients, Hessian diagonals) are ordered layer by
layer, each layer's weight matrix in row-major order followed by its bias
vector, giving p = sum_l n_l * (n_{l-1} + 1) entries.

Everything runs in float64.  The per-sample API wraps a batched
implementation (inputs stacked as rows), so single-sample and batch-of-one
calls produce identical bits.  Rows of a larger batch may differ from the
corresponding per-sample results in the last bit, because matrix-product
accumulation order depends on the batch shape; repeated evaluation of the
same batch is always bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import activations as act
from .activations import ActivationSpec


@dataclass(eq=False)
class Network:
    """Weights, biases and the shared hidden activation of one network."""

    widths: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: ActivationSpec

    def __post_init__(self):
        self.widths = tuple(int(w) for w in self.widths)
        if len(self.widths) < 2:
            raise ValueError("widths must list at least input and output sizes")
        if any(w < 1 for w in self.widths):
            raise ValueError("layer widths must be positive")
        if self.widths[-1] != 1:
            raise ValueError("output layer must have a single unit")
        L = self.depth
        if len(self.weights) != L or len(self.biases) != L:
            raise ValueError(f"expected {L} weight and bias arrays")
        self.weights = [np.asarray(W, dtype=np.float64) for W in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        for l in range(L):
            want = (self.widths[l + 1], self.widths[l])
            if self.weights[l].shape != want:
                raise ValueError(f"layer {l + 1} weight shape {self.weights[l].shape} != {want}")
            if self.biases[l].shape != (self.widths[l + 1],):
                raise ValueError(f"layer {l + 1} bias shape mismatch")

    @property
    def depth(self) -> int:
        return len(self.widths) - 1

    @property
    def param_count(self) -> int:
        return sum(self.widths[l + 1] * (self.widths[l] + 1) for l in range(self.depth))

    def copy(self) -> "Network":
        return Network(
            self.widths,
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
        )

    def to_dict(self) -> dict:
        return {
            "widths": list(self.widths),
            "activation": self.activation.to_dict(),
            "weights": [W.tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Network":
        missing = {"widths", "activation", "weights", "biases"} - set(data)
        if missing:
            raise ValueError(f"network JSON missing fields: {sorted(missing)}")
        return cls(
            widths=tuple(data["widths"]),
            weights=[np.asarray(W, dtype=np.float64) for W in data["weights"]],
            biases=[np.asarray(b, dtype=np.float64) for b in data["biases"]],
            activation=ActivationSpec.from_dict(data["activation"]),
        )


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(net.to_dict(), fh)


def load_network(path) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return Network.from_dict(json.load(fh))


def init_network(
    widths, activation: ActivationSpec, seed: int, scheme: str = "he"
) -> Network:
    """He-normal or Xavier-uniform weights, zero biases, seeded rng."""
    widths = tuple(int(w) for w in widths)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for l in range(len(widths) - 1):
        fan_in, fan_out = widths[l], widths[l + 1]
        if scheme == "he":
            W = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
        elif scheme == "xavier":
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        else:
            raise ValueError(f"unknown init scheme {scheme!r}")
        weights.append(W)
        biases.append(np.zeros(fan_out))
    return Network(widths, weights, biases, activation)


@dataclass
class BatchTrace:
    """Forward pass over a batch: z[l-1] and h[l-1] are layer-l arrays.

    h has one extra leading entry, h[0] = X; f collects the scalar outputs.
    """

    z: list[np.ndarray]
    h: list[np.ndarray]
    f: np.ndarray


@dataclass
class ForwardTrace:
    """Per-sample forward pass: z per layer, h per layer with h[0] = x."""

    z: list[np.ndarray]
    h: list[np.ndarray]
    f: float


@dataclass
class Deltas:
    """Backpropagated output sensitivities delta^(l) = df/dz^(l); delta^(L) = 1."""

    delta: list[np.ndarray]


def _check_batch(net: Network, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.widths[0]:
        raise ValueError(f"expected inputs of shape (batch, {net.widths[0]})")
    return X


def forward_batch(net: Network, X) -> BatchTrace:
    X = _check_batch(net, X)
    L = net.depth
    z_list, h_list = [], [X]
    a = X
    for l in range(L):
        z = a @ net.weights[l].T + net.biases[l]
        z_list.append(z)
        if l < L - 1:
            a = act.value(net.activation, z)
            h_list.append(a)
    return BatchTrace(z_list, h_list, z_list[-1][:, 0])


def forward(net: Network, x) -> ForwardTrace:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("forward expects a 1-D input vector")
    bt = forward_batch(net, x[None, :])
    return ForwardTrace(
        [z[0] for z in bt.z], [h[0] for h in bt.h], float(bt.f[0])
    )


def batch_deltas(net: Network, trace: BatchTrace) -> list[np.ndarray]:
    L = net.depth
    n = trace.f.shape[0]
    delta = [None] * L
    delta[L - 1] = np.ones((n, 1))
    for l in range(L - 2, -1, -1):
        back = delta[l + 1] @ net.weights[l + 1]
        delta[l] = act.d1(net.activation, trace.z[l]) * back
    return delta


def backprop_deltas(net: Network, trace: ForwardTrace) -> Deltas:
    bt = BatchTrace([z[None, :] for z in trace.z], [h[None, :] for h in trace.h],
                    np.array([trace.f]))
    return Deltas([d[0] for d in batch_deltas(net, bt)])


def loss(net: Network, x, y: float) -> float:
    """Squared loss 0.5 * (f(x) - y)^2 for one sample."""
    diff = forward(net, x).f - float(y)
    return 0.5 * diff * diff


def mean_loss(net: Network, X, y) -> float:
    f = forward_batch(net, X).f
    diff = f - np.asarray(y, dtype=np.float64)
    return float(0.5 * np.mean(diff * diff))


def grad_params_batch(net: Network, X, y) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-layer (dW, db) gradients of the mean squared loss over the batch."""
    X = _check_batch(net, X)
    y = np.asarray(y, dtype=np.float64)
    bt = forward_batch(net, X)
    delta = batch_deltas(net, bt)
    resid = (bt.f - y)[:, None]
    n = X.shape[0]
    grads = []
    for l in range(net.depth):
        gscale = resid * delta[l]
        grads.append((gscale.T @ bt.h[l] / n, gscale.mean(axis=0)))
    return grads


def grad_params(net: Network, x, y: float) -> np.ndarray:
    """Flat gradient of the per-sample loss, in canonical parameter order."""
    x = np.asarray(x, dtype=np.float64)
    per_layer = grad_params_batch(net, x[None, :], np.array([float(y)]))
    return np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in per_layer])


def grad_input_batch(net: Network, X, y) -> np.ndarray:
    """Gradient of each per-sample loss with respect to its input row."""
    X = _check_batch(net, X)
    y = np.asarray(y, dtype=np.float64)
    bt = forward_batch(net, X)
    delta = batch_deltas(net, bt)
    return ((bt.f - y)[:, None] * delta[0]) @ net.weights[0]


def grad_input(net: Network, x, y: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return grad_input_batch(net, x[None, :], np.array([float(y)]))[0]


def flat_params(net: Network) -> np.ndarray:
    return np.concatenate(
        [np.concatenate([net.weights[l].ravel(), net.biases[l]]) for l in range(net.depth)]
    )


def replace_params(net: Network, vec) -> Network:
    """Network with parameters taken from a flat vector (canonical order)."""
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != (net.param_count,):
        raise ValueError(f"expected a flat vector of length {net.param_count}")
    weights, biases, off = [], [], 0
    for l in range(net.depth):
        n_out, n_in = net.widths[l + 1], net.widths[l]
        weights.append(vec[off:off + n_out * n_in].reshape(n_out, n_in))
        off += n_out * n_in
        biases.append(vec[off:off + n_out])
        off += n_out
    return Network(net.widths, weights, biases, net.activation)


def param_layout(net: Network) -> list[tuple[int, str]]:
    """(layer, kind) for every flat parameter index; kind is weight or bias."""
    layout = []
    for l in range(net.depth):
        layout.extend([(l + 1, "weight")] * (net.widths[l + 1] * net.widths[l]))
        layout.extend([(l + 1, "bias")] * net.widths[l + 1])
    return layout
