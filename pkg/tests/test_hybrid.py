"""Hybrid model tests: additivity, training mechanics, determinism."""
import numpy as np
import pytest

from steamcast import dense_net, hybrid
from steamcast.hybrid import PhnModel, TrainConfig, TrainError
from steamcast.pipeline import SupervisedSet


def toy_sets(seed=0, n_train=48, n_test=16):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-np.pi, np.pi, size=(n_train + n_test, 5))
    y = np.column_stack([np.sin(x[:, 0]) + 0.3 * x[:, 1],
                         np.cos(x[:, 2]) - 0.2 * x[:, 3]])
    return (SupervisedSet(x=x[:n_train], y=y[:n_train]),
            SupervisedSet(x=x[n_train:], y=y[n_train:]))


class TestForward:
    def test_hybrid_is_sum_of_parts(self):
        model = hybrid.init_model("hybrid", seed=0)
        rng = np.random.default_rng(1)
        x = rng.uniform(-np.pi, np.pi, size=(6, 5))
        total = hybrid.phn_forward_batch(model, x)
        classical = dense_net.forward_batch(model.net, x)
        quantum = hybrid.quantum_forward_batch(model, x)
        np.testing.assert_array_equal(total, classical + quantum)

    def test_zero_net_reduces_to_quantum(self):
        model = hybrid.init_model("hybrid", seed=2)
        for name in ("w1", "b1", "w2", "b2"):
            getattr(model.net, name)[...] = 0.0
        rng = np.random.default_rng(3)
        x = rng.uniform(-np.pi, np.pi, size=(4, 5))
        np.testing.assert_array_equal(hybrid.phn_forward_batch(model, x),
                                      hybrid.quantum_forward_batch(model, x))

    def test_quantum_output_bounded(self):
        model = hybrid.init_model("quantum", seed=4)
        rng = np.random.default_rng(5)
        x = rng.uniform(-np.pi, np.pi, size=(50, 5))
        out = hybrid.phn_forward_batch(model, x)
        assert np.all(np.abs(out) <= 1.0 + 1e-12)

    def test_unknown_variant_rejected(self):
        with pytest.raises(TrainError, match="classical"):
            hybrid.init_model("quantumm", seed=0)


class TestLoss:
    def test_zero_at_equality(self):
        a = np.ones((3, 2))
        assert hybrid.mse_loss(a, a) == 0.0

    def test_unit_difference(self):
        assert hybrid.mse_loss(np.ones((5, 2)), np.zeros((5, 2))) == 1.0

    def test_single_entry_difference(self):
        pred = np.zeros((2, 2))
        truth = np.zeros((2, 2))
        pred[0, 0] = 3.0
        assert hybrid.mse_loss(pred, truth) == 2.25

    def test_shape_mismatch(self):
        with pytest.raises(TrainError):
            hybrid.mse_loss(np.zeros((2, 2)), np.zeros((3, 2)))


class TestTraining:
    def test_zero_epochs_leaves_model_unchanged(self):
        train_set, test_set = toy_sets()
        config = TrainConfig(epochs=0, seed=7)
        model, report = hybrid.train(train_set, test_set, "hybrid", config)
        reference = hybrid.init_model("hybrid", seed=7)
        np.testing.assert_array_equal(model.pqc_params, reference.pqc_params)
        np.testing.assert_array_equal(model.net.w1, reference.net.w1)
        assert len(report.train_mse) == 1
        assert len(report.test_mse) == 1

    def test_loss_decreases(self):
        train_set, test_set = toy_sets()
        config = TrainConfig(epochs=25, seed=0)
        for variant in hybrid.VARIANTS:
            _, report = hybrid.train(train_set, test_set, variant, config)
            assert report.train_mse[-1] < report.train_mse[0], variant

    def test_deterministic_loss_curves(self):
        train_set, test_set = toy_sets()
        config = TrainConfig(epochs=3, seed=1)
        _, a = hybrid.train(train_set, test_set, "hybrid", config)
        _, b = hybrid.train(train_set, test_set, "hybrid",
                            TrainConfig(epochs=3, seed=1))
        assert a.train_mse == b.train_mse
        assert a.test_mse == b.test_mse
        np.testing.assert_array_equal(a.residuals, b.residuals)

    def test_parameter_group_isolation(self):
        train_set, test_set = toy_sets()
        frozen_classical = TrainConfig(epochs=2, lr_classical=0.0, seed=2)
        model, _ = hybrid.train(train_set, test_set, "hybrid", frozen_classical)
        reference = hybrid.init_model("hybrid", seed=2)
        np.testing.assert_array_equal(model.net.w1, reference.net.w1)
        np.testing.assert_array_equal(model.net.b2, reference.net.b2)
        assert not np.array_equal(model.pqc_params, reference.pqc_params)

        frozen_quantum = TrainConfig(epochs=2, lr_quantum=0.0, seed=2)
        model, _ = hybrid.train(train_set, test_set, "hybrid", frozen_quantum)
        np.testing.assert_array_equal(model.pqc_params, reference.pqc_params)
        assert not np.array_equal(model.net.w1, reference.net.w1)

    def test_empty_sets_rejected(self):
        train_set, test_set = toy_sets()
        empty = SupervisedSet(x=np.zeros((0, 5)), y=np.zeros((0, 2)))
        with pytest.raises(TrainError):
            hybrid.train(empty, test_set, "hybrid", TrainConfig(epochs=1))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nan_divergence_aborts_with_diagnostic(self):
        train_set, test_set = toy_sets()
        config = TrainConfig(epochs=10, lr_classical=1e200, seed=0)
        with pytest.raises(TrainError, match="learning rate"):
            hybrid.train(train_set, test_set, "classical", config)

    def test_config_validation(self):
        with pytest.raises(TrainError):
            TrainConfig(epochs=-1).validate()
        with pytest.raises(TrainError):
            TrainConfig(lr_quantum=-0.1).validate()


class TestCompositeGradient:
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed + 40)
        model = hybrid.init_model("hybrid", seed=seed)
        x = rng.uniform(-np.pi, np.pi, size=(4, 5))
        y = rng.normal(size=(4, 2))
        grads = hybrid._batch_gradients(model, x, y)

        def loss():
            return hybrid.mse_loss(hybrid.phn_forward_batch(model, x), y)

        eps = 1e-6
        checks = [("q0", model.pqc_params[0], None),
                  ("q1", model.pqc_params[1], None),
                  ("w2", model.net.w2, 10),
                  ("w1", model.net.w1, 10),
                  ("b1", model.net.b1, 5),
                  ("b2", model.net.b2, None)]
        for name, arr, n_coords in checks:
            flat = arr.reshape(-1)
            idxs = (np.arange(flat.size) if n_coords is None
                    else rng.choice(flat.size, size=n_coords, replace=False))
            for i in idxs:
                saved = flat[i]
                flat[i] = saved + eps
                up = loss()
                flat[i] = saved - eps
                down = loss()
                flat[i] = saved
                fd = (up - down) / (2 * eps)
                scale = max(1.0, abs(fd))
                assert abs(grads[name].reshape(-1)[i] - fd) / scale < 1e-5, name


class TestEvaluate:
    def test_perfect_predictions(self):
        train_set, test_set = toy_sets()
        r = hybrid.relative_residuals(test_set.y, test_set.y)
        np.testing.assert_array_equal(r, 0.0)

    def test_constant_offset_residual(self):
        truth = np.ones((10, 2))
        pred = truth + 0.1
        np.testing.assert_allclose(hybrid.relative_residuals(pred, truth), 0.1,
                                   atol=1e-12)

    def test_empty_test_set_rejected(self):
        model = hybrid.init_model("classical", seed=0)
        empty = SupervisedSet(x=np.zeros((0, 5)), y=np.zeros((0, 2)))
        with pytest.raises(TrainError):
            hybrid.evaluate(model, empty)

    def test_report_fields(self):
        train_set, test_set = toy_sets()
        model, _ = hybrid.train(train_set, test_set, "classical",
                                TrainConfig(epochs=1, seed=0))
        report = hybrid.evaluate(model, test_set)
        assert report["mean_abs_residual"] >= 0
        assert report["max_abs_residual"] >= report["mean_abs_residual"]
        assert len(report["per_sensor_mse"]) == 2


class TestCheckpoint:
    def test_round_trip(self):
        model = hybrid.init_model("hybrid", seed=12)
        restored = hybrid.model_from_json(hybrid.model_to_json(model))
        rng = np.random.default_rng(0)
        x = rng.uniform(-np.pi, np.pi, size=(3, 5))
        np.testing.assert_array_equal(hybrid.phn_forward_batch(model, x),
                                      hybrid.phn_forward_batch(restored, x))
        assert restored.variant == "hybrid"
