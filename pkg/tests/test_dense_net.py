"""Feed-forward network tests: forward oracle, backprop vs finite differences."""
import json

import numpy as np
import pytest

from steamcast import dense_net
from steamcast.dense_net import DenseNet, NumericError


def small_net(seed=0, activation="tanh"):
    return dense_net.init(seed, layer_sizes=(5, 8, 2), activation=activation)


def flatten_params(net):
    return np.concatenate([net.w1.ravel(), net.b1.ravel(),
                           net.w2.ravel(), net.b2.ravel()])


class TestForward:
    def test_all_zero_weights(self):
        net = DenseNet(w1=np.zeros((256, 5)), b1=np.zeros(256),
                       w2=np.zeros((2, 256)), b2=np.zeros(2))
        np.testing.assert_array_equal(dense_net.forward(net, np.ones(5)),
                                      [0.0, 0.0])

    def test_bias_passthrough(self):
        net = DenseNet(w1=np.zeros((256, 5)), b1=np.zeros(256),
                       w2=np.zeros((2, 256)), b2=np.array([1.0, -1.0]))
        np.testing.assert_array_equal(
            dense_net.forward(net, np.array([3.0, -2, 1, 0, 5])), [1.0, -1.0])

    def test_matches_hand_rolled_oracle(self):
        net = dense_net.init(42)
        rng = np.random.default_rng(7)
        x = rng.normal(size=5)
        expected = net.w2 @ np.tanh(net.w1 @ x + net.b1) + net.b2
        np.testing.assert_allclose(dense_net.forward(net, x), expected,
                                   atol=1e-12)

    def test_relu_activation(self):
        net = small_net(activation="relu")
        rng = np.random.default_rng(8)
        x = rng.normal(size=5)
        expected = net.w2 @ np.maximum(net.w1 @ x + net.b1, 0.0) + net.b2
        np.testing.assert_allclose(dense_net.forward(net, x), expected,
                                   atol=1e-12)

    def test_nonfinite_input_rejected(self):
        net = small_net()
        with pytest.raises(NumericError):
            dense_net.forward(net, np.array([np.nan, 0, 0, 0, 0]))

    def test_unknown_activation_rejected(self):
        with pytest.raises(NumericError):
            DenseNet(w1=np.zeros((256, 5)), b1=np.zeros(256),
                     w2=np.zeros((2, 256)), b2=np.zeros(2),
                     activation="sigmoid")


class TestBackward:
    def test_zero_gradient_at_minimum(self):
        net = small_net(1)
        x = np.array([0.3, -0.1, 0.7, 0.0, -0.5])
        y = dense_net.forward(net, x)
        grads = dense_net.backward(net, x, y)
        for g in grads.values():
            np.testing.assert_allclose(g, 0.0, atol=1e-14)

    def test_zero_input_zero_w1_gradient(self):
        net = small_net(2)
        grads = dense_net.backward(net, np.zeros(5), np.array([1.0, -1.0]))
        np.testing.assert_allclose(grads["w1"], 0.0, atol=1e-14)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_finite_differences(self, seed):
        net = small_net(seed)
        rng = np.random.default_rng(seed + 100)
        x = rng.normal(size=5)
        y = rng.normal(size=2)
        grads = dense_net.backward(net, x, y)

        def loss(n):
            diff = dense_net.forward(n, x) - y
            return float(np.mean(diff ** 2))

        eps = 1e-6
        for name in ("w1", "b1", "w2", "b2"):
            arr = getattr(net, name)
            flat_idx = np.unravel_index(
                rng.integers(arr.size, size=min(6, arr.size)), arr.shape)
            for idx in zip(*[np.atleast_1d(a) for a in flat_idx]):
                idx = idx if arr.ndim > 1 else idx[0]
                saved = arr[idx]
                arr[idx] = saved + eps
                up = loss(net)
                arr[idx] = saved - eps
                down = loss(net)
                arr[idx] = saved
                fd = (up - down) / (2 * eps)
                scale = max(1.0, abs(fd))
                assert abs(grads[name][idx] - fd) / scale < 1e-5

    @pytest.mark.parametrize("seed", range(20))
    def test_one_gradient_step_decreases_loss(self, seed):
        net = small_net(seed)
        rng = np.random.default_rng(seed + 500)
        x = rng.normal(size=5)
        y = rng.normal(size=2)
        grads = dense_net.backward(net, x, y)
        total = sum(float(np.sum(g ** 2)) for g in grads.values())
        if total < 1e-18:
            pytest.skip("zero gradient draw")
        before = float(np.mean((dense_net.forward(net, x) - y) ** 2))
        lr = 1e-4
        for name in ("w1", "b1", "w2", "b2"):
            getattr(net, name)[...] -= lr * grads[name]
        after = float(np.mean((dense_net.forward(net, x) - y) ** 2))
        assert after < before

    def test_batch_backward_sums_samples(self):
        net = small_net(3)
        rng = np.random.default_rng(31)
        x = rng.normal(size=(4, 5))
        grad_out = rng.normal(size=(4, 2))
        batched = dense_net.backward_batch(net, x, grad_out)
        summed = {k: np.zeros_like(v) for k, v in batched.items()}
        for b in range(4):
            single = dense_net.backward_batch(net, x[b:b + 1], grad_out[b:b + 1])
            for k in summed:
                summed[k] += single[k]
        for k in batched:
            np.testing.assert_allclose(batched[k], summed[k], atol=1e-12)


class TestInit:
    def test_deterministic(self):
        a, b = dense_net.init(9), dense_net.init(9)
        for name in ("w1", "b1", "w2", "b2"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_seeds_differ(self):
        assert not np.array_equal(dense_net.init(0).w1, dense_net.init(1).w1)

    def test_glorot_bounds(self):
        lim1 = np.sqrt(6.0 / (5 + 256))
        lim2 = np.sqrt(6.0 / (256 + 2))
        for seed in range(20):
            net = dense_net.init(seed)
            assert np.all(np.abs(net.w1) <= lim1)
            assert np.all(np.abs(net.w2) <= lim2)
            assert np.all(net.b1 == 0) and np.all(net.b2 == 0)

    def test_default_shape(self):
        net = dense_net.init(0)
        assert net.w1.shape == (256, 5)
        assert net.w2.shape == (2, 256)


class TestSerialization:
    def test_round_trip(self):
        net = dense_net.init(17)
        restored = dense_net.from_json(dense_net.to_json(net))
        rng = np.random.default_rng(0)
        x = rng.normal(size=(3, 5))
        np.testing.assert_array_equal(dense_net.forward_batch(net, x),
                                      dense_net.forward_batch(restored, x))

    def test_json_is_valid(self):
        doc = json.loads(dense_net.to_json(dense_net.init(0)))
        assert doc["activation"] == "tanh"
        assert doc["layer_sizes"] == [5, 256, 2]
