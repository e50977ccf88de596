"""Compare the compiled gate kernels against the pure-Python fallback.

Both backends expose the same API; this script times representative
hot paths (single-gate application, full circuit evaluation, adjoint
gradients) at a few batch sizes and checks that results agree.

Run:  python3 benchmarks/bench_kernels.py
"""
import importlib
import os
import sys
import time

import numpy as np


def load_backend(name):
    os.environ["STEAMCAST_BACKEND"] = name
    for mod in list(sys.modules):
        if mod.startswith("steamcast"):
            del sys.modules[mod]
    import steamcast.backend
    import steamcast.circuits
    import steamcast.simulator
    return (steamcast.backend.kernels, steamcast.circuits,
            steamcast.simulator, steamcast.backend.backend_name())


def random_states(rng, batch, n_qubits):
    dim = 1 << n_qubits
    raw = rng.normal(size=(batch, dim)) + 1j * rng.normal(size=(batch, dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return np.ascontiguousarray(raw, dtype=np.complex128)


def time_call(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(batch, n_qubits):
    rows = []
    reference = {}
    for backend in ("python", "compiled"):
        kernels, circuits, _sim, actual = load_backend(backend)
        if actual != backend:
            print(f"  [skip] backend {backend!r} unavailable (got {actual!r})")
            continue
        rng = np.random.default_rng(0)
        angles = rng.uniform(0, 2 * np.pi, size=batch)

        states = random_states(rng, batch, n_qubits)
        t_gate = time_call(lambda: kernels.apply_rx(states, n_qubits, 0, angles))

        spec = circuits.build_production_ansatz()
        theta = rng.uniform(0, 2 * np.pi, size=spec.n_params)
        feats = rng.uniform(-np.pi, np.pi, size=(batch, spec.n_features))
        t_eval = time_call(lambda: circuits.evaluate_batch(spec, theta, feats))
        t_grad = time_call(lambda: circuits.gradient_batch(spec, theta, feats))

        values = circuits.evaluate_batch(spec, theta, feats)
        grads = circuits.gradient_batch(spec, theta, feats)
        reference[backend] = (values, grads)
        rows.append((backend, t_gate, t_eval, t_grad))

    print(f"\nbatch={batch} qubits={n_qubits}")
    print(f"  {'backend':<10} {'rx gate':>12} {'pqc eval':>12} {'adjoint grad':>14}")
    for backend, t_gate, t_eval, t_grad in rows:
        print(f"  {backend:<10} {t_gate*1e3:>10.3f}ms {t_eval*1e3:>10.3f}ms "
              f"{t_grad*1e3:>12.3f}ms")
    if len(rows) == 2:
        speedups = [rows[0][i] / rows[1][i] for i in (1, 2, 3)]
        print(f"  speedup (python/compiled): gate {speedups[0]:.1f}x  "
              f"eval {speedups[1]:.1f}x  grad {speedups[2]:.1f}x")
    if "python" in reference and "compiled" in reference:
        dv = np.max(np.abs(reference["python"][0] - reference["compiled"][0]))
        dg = np.max(np.abs(reference["python"][1] - reference["compiled"][1]))
        print(f"  agreement: eval {dv:.2e}  grad {dg:.2e}")
        assert dv < 1e-12 and dg < 1e-12, "backend mismatch"


def main():
    for batch in (1, 32, 256):
        bench(batch, n_qubits=5)


if __name__ == "__main__":
    main()
