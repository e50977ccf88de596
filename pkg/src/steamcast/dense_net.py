"""Classical baseline: fully connected 5 -> 256 -> 2 net with MSE loss.

Hidden activation is tanh by default (bounded, so its outputs live on
the same scale as circuit expectations); "relu" is accepted as an
alternative.  The output layer is linear.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

LAYER_SIZES = (5, 256, 2)


class NumericError(Exception):
    pass


@dataclass
class DenseNet:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    activation: str = "tanh"
    layer_sizes: tuple = LAYER_SIZES

    def __post_init__(self):
        n_in, n_hid, n_out = self.layer_sizes
        assert self.w1.shape == (n_hid, n_in)
        assert self.b1.shape == (n_hid,)
        assert self.w2.shape == (n_out, n_hid)
        assert self.b2.shape == (n_out,)
        if self.activation not in ("tanh", "relu"):
            raise NumericError(f"unsupported activation {self.activation!r}")

    def params(self) -> Dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def copy(self) -> "DenseNet":
        return DenseNet(self.w1.copy(), self.b1.copy(), self.w2.copy(),
                        self.b2.copy(), self.activation, self.layer_sizes)


def init(seed: int, layer_sizes: tuple = LAYER_SIZES,
         activation: str = "tanh") -> DenseNet:
    """Glorot-uniform weights, zero biases; deterministic per seed."""
    rng = np.random.default_rng(seed)
    n_in, n_hid, n_out = layer_sizes
    lim1 = np.sqrt(6.0 / (n_in + n_hid))
    lim2 = np.sqrt(6.0 / (n_hid + n_out))
    return DenseNet(
        w1=rng.uniform(-lim1, lim1, size=(n_hid, n_in)),
        b1=np.zeros(n_hid),
        w2=rng.uniform(-lim2, lim2, size=(n_out, n_hid)),
        b2=np.zeros(n_out),
        activation=activation,
        layer_sizes=layer_sizes,
    )


def _act(net: DenseNet, z: np.ndarray) -> np.ndarray:
    return np.tanh(z) if net.activation == "tanh" else np.maximum(z, 0.0)


def _act_grad(net: DenseNet, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    return 1.0 - h ** 2 if net.activation == "tanh" else (z > 0).astype(float)


def forward_batch(net: DenseNet, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite input")
    z1 = x @ net.w1.T + net.b1
    h = _act(net, z1)
    return h @ net.w2.T + net.b2


def forward(net: DenseNet, x: np.ndarray) -> np.ndarray:
    return forward_batch(net, x)[0]


def backward_batch(net: DenseNet, x: np.ndarray,
                   grad_out: np.ndarray) -> Dict[str, np.ndarray]:
    """Backprop an upstream d(loss)/d(output) of shape (B, n_out)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    grad_out = np.atleast_2d(np.asarray(grad_out, dtype=np.float64))
    z1 = x @ net.w1.T + net.b1
    h = _act(net, z1)
    dh = grad_out @ net.w2
    dz1 = dh * _act_grad(net, z1, h)
    return {
        "w2": grad_out.T @ h,
        "b2": grad_out.sum(axis=0),
        "w1": dz1.T @ x,
        "b1": dz1.sum(axis=0),
    }


def backward(net: DenseNet, x: np.ndarray,
             y_true: np.ndarray) -> Dict[str, np.ndarray]:
    """Gradients of MSE(forward(net, x), y_true) for a single sample."""
    x = np.asarray(x, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    pred = forward(net, x)
    n_out = len(y_true)
    grad_out = 2.0 * (pred - y_true) / n_out
    return backward_batch(net, x[None, :], grad_out[None, :])


def to_json(net: DenseNet) -> str:
    doc = {
        "layer_sizes": list(net.layer_sizes),
        "activation": net.activation,
        "w1": net.w1.tolist(),
        "b1": net.b1.tolist(),
        "w2": net.w2.tolist(),
        "b2": net.b2.tolist(),
    }
    return json.dumps(doc, sort_keys=True)


def from_json(text: str) -> DenseNet:
    doc = json.loads(text)
    return DenseNet(
        w1=np.array(doc["w1"]),
        b1=np.array(doc["b1"]),
        w2=np.array(doc["w2"]),
        b2=np.array(doc["b2"]),
        activation=doc["activation"],
        layer_sizes=tuple(doc["layer_sizes"]),
    )
