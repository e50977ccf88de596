"""Ansatz construction and evaluation tests."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steamcast import circuits, simulator as sim
from steamcast.circuits import (AnsatzGate, AnsatzSpec, CircuitConfigError,
                                ParamBinding)
from steamcast.simulator import Observable


class TestProductionAnsatz:
    def test_counts(self):
        spec = circuits.build_production_ansatz()
        assert spec.n_qubits == 5
        assert spec.n_features == 5
        assert spec.n_params == 20
        assert spec.observable == Observable.z(0)

    def test_zero_point(self):
        spec = circuits.build_production_ansatz()
        value = circuits.evaluate(spec, np.zeros(20), np.zeros(5))
        assert abs(value) < 1e-12

    def test_output_bounded(self):
        spec = circuits.build_production_ansatz()
        rng = np.random.default_rng(0)
        params = rng.uniform(0, 2 * np.pi, size=20)
        feats = rng.uniform(-np.pi, np.pi, size=(100, 5))
        vals = circuits.evaluate_batch(spec, params, feats)
        assert np.all(np.abs(vals) <= 1.0 + 1e-12)


class TestToyAnsatz:
    def test_param_count_formula(self):
        for n in range(1, 11):
            assert circuits.build_toy_ansatz(n).n_params == 4 + 3 * n

    def test_paper_counts(self):
        assert circuits.build_toy_ansatz(1).n_params == 7
        assert circuits.build_toy_ansatz(2).n_params == 10
        assert circuits.build_toy_ansatz(3).n_params == 13

    def test_reps_validated(self):
        with pytest.raises(CircuitConfigError):
            circuits.build_toy_ansatz(0)

    def test_zero_point_value(self):
        spec = circuits.build_toy_ansatz(1)
        assert abs(circuits.evaluate(spec, np.zeros(7), np.zeros(2))) < 1e-12

    def test_zero_point_probabilities(self):
        spec = circuits.build_toy_ansatz(1)
        probs = circuits.circuit_probabilities(spec, np.zeros(7), np.zeros(2))
        np.testing.assert_allclose(probs, [0.25] * 4, atol=1e-12)

    def test_probabilities_match_dense_oracle(self):
        spec = circuits.build_toy_ansatz(1)
        rng = np.random.default_rng(5)
        params = rng.uniform(0, 2 * np.pi, size=7)
        feats = rng.uniform(-np.pi, np.pi, size=2)
        angles = circuits.angle_matrix(spec, params, feats[None, :])
        bound = circuits.bind(spec)
        dense_gates = [
            sim.BoundGate(kind=g.kind, targets=g.targets,
                          angle=float(angles[0, j]))
            for j, g in enumerate(bound)]
        u = sim.dense_unitary_oracle(dense_gates, 2)
        zero = np.zeros(4, dtype=np.complex128)
        zero[0] = 1.0
        expected = np.abs(u @ zero) ** 2
        got = circuits.circuit_probabilities(spec, params, feats)
        np.testing.assert_allclose(got, expected, atol=1e-10)


class TestEvaluation:
    def test_probability_normalization(self):
        spec = circuits.build_toy_ansatz(2)
        rng = np.random.default_rng(1)
        for _ in range(100):
            params = rng.uniform(0, 2 * np.pi, size=spec.n_params)
            feats = rng.uniform(-np.pi, np.pi, size=2)
            probs = circuits.circuit_probabilities(spec, params, feats)
            assert abs(probs.sum() - 1.0) < 1e-10

    def test_feature_periodicity(self):
        spec = circuits.build_toy_ansatz(1)
        rng = np.random.default_rng(2)
        params = rng.uniform(0, 2 * np.pi, size=7)
        feats = rng.uniform(-np.pi, np.pi, size=2)
        base = circuits.evaluate(spec, params, feats)
        for j in range(2):
            shifted = feats.copy()
            shifted[j] += 2 * np.pi
            np.testing.assert_allclose(
                circuits.evaluate(spec, params, shifted), base, atol=1e-10)

    def test_determinism(self):
        spec = circuits.build_production_ansatz()
        rng = np.random.default_rng(3)
        params = rng.uniform(0, 2 * np.pi, size=20)
        feats = rng.uniform(-np.pi, np.pi, size=(8, 5))
        a = circuits.evaluate_batch(spec, params, feats)
        b = circuits.evaluate_batch(spec, params, feats)
        assert np.array_equal(a, b)

    def test_shape_validation(self):
        spec = circuits.build_toy_ansatz(1)
        with pytest.raises(CircuitConfigError):
            circuits.evaluate(spec, np.zeros(6), np.zeros(2))
        with pytest.raises(CircuitConfigError):
            circuits.evaluate(spec, np.zeros(7), np.zeros(3))

    def test_gradient_matches_param_shift(self):
        rng = np.random.default_rng(4)
        for n_reps in (1, 2):
            spec = circuits.build_toy_ansatz(n_reps)
            params = rng.uniform(0, 2 * np.pi, size=spec.n_params)
            feats = rng.uniform(-np.pi, np.pi, size=(3, 2))
            adj = circuits.gradient_batch(spec, params, feats)
            angles = circuits.angle_matrix(spec, params, feats)
            ps = sim.param_shift_gradient_batch(
                2, circuits.bind(spec), angles, spec.observable)
            np.testing.assert_allclose(adj, ps, atol=1e-9)


class TestSpecValidation:
    def test_noncontiguous_trainables_rejected(self):
        gates = (AnsatzGate("RZ", (0,), ParamBinding.trainable(1)),)
        spec = AnsatzSpec(n_qubits=1, n_features=0, gates=gates,
                          observable=Observable.z(0))
        with pytest.raises(CircuitConfigError):
            spec.validate()

    def test_feature_index_range_checked(self):
        gates = (AnsatzGate("RZ", (0,), ParamBinding.feature(2)),)
        spec = AnsatzSpec(n_qubits=1, n_features=1, gates=gates,
                          observable=Observable.z(0))
        with pytest.raises(CircuitConfigError):
            spec.validate()


class TestSerialization:
    @pytest.mark.parametrize("builder", [
        circuits.build_production_ansatz,
        lambda: circuits.build_toy_ansatz(2),
    ])
    def test_round_trip(self, builder):
        spec = builder()
        restored = circuits.spec_from_json(circuits.spec_to_json(spec))
        assert restored == spec
        rng = np.random.default_rng(6)
        params = rng.uniform(0, 2 * np.pi, size=spec.n_params)
        feats = rng.uniform(-np.pi, np.pi, size=(2, spec.n_features))
        np.testing.assert_array_equal(
            circuits.evaluate_batch(spec, params, feats),
            circuits.evaluate_batch(restored, params, feats))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000),
       n_reps=st.integers(min_value=1, max_value=3))
def test_toy_output_always_bounded(seed, n_reps):
    spec = circuits.build_toy_ansatz(n_reps)
    rng = np.random.default_rng(seed)
    params = rng.uniform(0, 2 * np.pi, size=spec.n_params)
    feats = rng.uniform(-np.pi, np.pi, size=2)
    assert abs(circuits.evaluate(spec, params, feats)) <= 1.0 + 1e-12
