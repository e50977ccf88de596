"""Parallel hybrid model: dense net plus two circuits, outputs summed.

Training uses Adam with two parameter groups.  The quantum group gets
the larger learning rate so the circuits settle into the periodic part
of the signal before the net starts contributing; the classical group
then fits the residual shape.  Quantum gradients come from the adjoint
sweep, classical ones from backprop; batches are sequential
chronological slices so runs are reproducible bit for bit.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import circuits, dense_net
from .pipeline import SupervisedSet

VARIANTS = ("classical", "quantum", "hybrid")


class TrainError(Exception):
    pass


@dataclass
class PhnModel:
    net: dense_net.DenseNet
    pqc_params: np.ndarray          # (2, P) production-circuit parameters
    variant: str = "hybrid"
    spec: circuits.AnsatzSpec = field(default_factory=circuits.build_production_ansatz)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise TrainError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        assert self.pqc_params.shape == (2, self.spec.n_params)


@dataclass
class TrainConfig:
    epochs: int = 100
    lr_quantum: float = 0.05
    lr_classical: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32            # <= 0 means full batch
    seed: int = 0

    def validate(self):
        for name in ("epochs",):
            if getattr(self, name) < 0:
                raise TrainError(f"{name} must be >= 0")
        for name in ("lr_quantum", "lr_classical", "beta1", "beta2", "eps"):
            if getattr(self, name) < 0:
                raise TrainError(f"{name} must be positive")


@dataclass
class TrainReport:
    train_mse: list                 # epochs + 1 entries, epoch 0 included
    test_mse: list
    residuals: np.ndarray           # final per-point relative errors on test
    wall_time: float
    config: dict


def init_model(variant: str, seed: int) -> PhnModel:
    rng = np.random.default_rng(seed)
    spec = circuits.build_production_ansatz()
    return PhnModel(
        net=dense_net.init(seed),
        pqc_params=rng.uniform(0.0, 2 * np.pi, size=(2, spec.n_params)),
        variant=variant,
        spec=spec,
    )


def quantum_forward_batch(model: PhnModel, x: np.ndarray) -> np.ndarray:
    out = np.empty((x.shape[0], 2))
    for k in range(2):
        out[:, k] = circuits.evaluate_batch(model.spec, model.pqc_params[k], x)
    return out


def phn_forward_batch(model: PhnModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    if model.variant == "classical":
        return dense_net.forward_batch(model.net, x)
    if model.variant == "quantum":
        return quantum_forward_batch(model, x)
    return dense_net.forward_batch(model.net, x) + quantum_forward_batch(model, x)


def phn_forward(model: PhnModel, x: np.ndarray) -> np.ndarray:
    return phn_forward_batch(model, np.atleast_2d(x))[0]


def mse_loss(pred: np.ndarray, truth: np.ndarray) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise TrainError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    return float(np.mean((pred - truth) ** 2))


class _Adam:
    def __init__(self, shapes: Dict[str, tuple], lr: Dict[str, float],
                 beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros(s) for k, s in shapes.items()}
        self.v = {k: np.zeros(s) for k, s in shapes.items()}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray],
             grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, g in grads.items():
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            mhat = self.m[k] / (1 - b1 ** self.t)
            vhat = self.v[k] / (1 - b2 ** self.t)
            params[k] -= self.lr[k] * mhat / (np.sqrt(vhat) + self.eps)


def _model_params(model: PhnModel) -> Dict[str, np.ndarray]:
    return {
        "w1": model.net.w1, "b1": model.net.b1,
        "w2": model.net.w2, "b2": model.net.b2,
        "q0": model.pqc_params[0], "q1": model.pqc_params[1],
    }


def _batch_gradients(model: PhnModel, xb: np.ndarray,
                     yb: np.ndarray) -> Dict[str, np.ndarray]:
    pred = phn_forward_batch(model, xb)
    n_entries = pred.size
    grad_out = 2.0 * (pred - yb) / n_entries
    grads: Dict[str, np.ndarray] = {}
    if model.variant in ("classical", "hybrid"):
        grads.update(dense_net.backward_batch(model.net, xb, grad_out))
    if model.variant in ("quantum", "hybrid"):
        for k in range(2):
            per_sample = circuits.gradient_batch(model.spec,
                                                 model.pqc_params[k], xb)
            grads[f"q{k}"] = grad_out[:, k] @ per_sample
    return grads


def train(train_set: SupervisedSet, test_set: SupervisedSet, variant: str,
          config: TrainConfig) -> tuple:
    config.validate()
    if train_set.n == 0 or test_set.n == 0:
        raise TrainError("empty train or test set")
    model = init_model(variant, config.seed)
    params = _model_params(model)
    lr = {}
    for name in ("w1", "b1", "w2", "b2"):
        lr[name] = config.lr_classical
    for name in ("q0", "q1"):
        lr[name] = config.lr_quantum
    opt = _Adam({k: v.shape for k, v in params.items()}, lr,
                config.beta1, config.beta2, config.eps)

    bs = config.batch_size if config.batch_size > 0 else train_set.n
    started = time.perf_counter()
    train_curve = [mse_loss(phn_forward_batch(model, train_set.x), train_set.y)]
    test_curve = [mse_loss(phn_forward_batch(model, test_set.x), test_set.y)]
    for _ in range(config.epochs):
        for lo in range(0, train_set.n, bs):
            xb = train_set.x[lo:lo + bs]
            yb = train_set.y[lo:lo + bs]
            grads = _batch_gradients(model, xb, yb)
            opt.step(params, grads)
        tr = mse_loss(phn_forward_batch(model, train_set.x), train_set.y)
        te = mse_loss(phn_forward_batch(model, test_set.x), test_set.y)
        if not np.isfinite(tr):
            raise TrainError(
                "training diverged to NaN loss; lower the learning rates")
        train_curve.append(tr)
        test_curve.append(te)
    wall = time.perf_counter() - started
    residuals = relative_residuals(phn_forward_batch(model, test_set.x),
                                   test_set.y)
    report = TrainReport(train_mse=train_curve, test_mse=test_curve,
                         residuals=residuals, wall_time=wall,
                         config={"variant": variant, **vars(config)})
    return model, report


def relative_residuals(pred: np.ndarray, truth: np.ndarray,
                       eps: float = 1e-6) -> np.ndarray:
    return (pred - truth) / np.maximum(np.abs(truth), eps)


def evaluate(model: PhnModel, test_set: SupervisedSet) -> dict:
    if test_set.n == 0:
        raise TrainError("empty test set")
    pred = phn_forward_batch(model, test_set.x)
    r = relative_residuals(pred, test_set.y)
    return {
        "residuals": r,
        "mean_abs_residual": float(np.mean(np.abs(r))),
        "max_abs_residual": float(np.max(np.abs(r))),
        "per_sensor_mse": [float(np.mean((pred[:, k] - test_set.y[:, k]) ** 2))
                           for k in range(2)],
    }


# ---------------------------------------------------------------------------
# checkpoints


def model_to_json(model: PhnModel) -> str:
    return json.dumps({
        "variant": model.variant,
        "net": json.loads(dense_net.to_json(model.net)),
        "pqc_params": model.pqc_params.tolist(),
    }, sort_keys=True)


def model_from_json(text: str) -> PhnModel:
    doc = json.loads(text)
    return PhnModel(
        net=dense_net.from_json(json.dumps(doc["net"])),
        pqc_params=np.array(doc["pqc_params"]),
        variant=doc["variant"],
    )
