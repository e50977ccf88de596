"""Information-geometry and Fourier diagnostics for the small circuit.

The empirical Fisher matrix treats the circuit as a statistical model
over computational-basis outcomes: for sampled inputs x and every
basis target y, outer products of probability gradients weighted by
1/p accumulate into a P x P matrix.  Normalization, effective
dimension and eigenspectrum summaries follow from Monte Carlo
averages over uniform weight realizations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import circuits, simulator as sim
from .circuits import AnsatzSpec
from .simulator import Observable


class AnalysisError(Exception):
    pass


@dataclass
class FisherConfig:
    n_feature_samples: int = 1000   # x ~ N(0, 1)
    n_weight_realizations: int = 100  # theta ~ U[0, 2pi)
    rank_tolerance: float = 1e-10   # relative to largest singular value
    # "near zero" for a normalized eigenvalue (the normalization fixes the
    # mean eigenvalue to 1, so this is an absolute first-histogram-bin cut)
    near_zero_threshold: float = 0.3
    seed: int = 0

    def validate(self):
        if self.n_feature_samples < 1 or self.n_weight_realizations < 1:
            raise AnalysisError("sample counts must be >= 1")
        if self.rank_tolerance <= 0 or self.near_zero_threshold <= 0:
            raise AnalysisError("thresholds must be positive")


@dataclass
class FisherReport:
    n_reps: int
    n_params: int
    matrices: List[np.ndarray]      # per-realization P x P Fisher matrices
    average: np.ndarray
    rank_average: int
    eigenvalues: np.ndarray         # pooled normalized eigenvalues
    near_zero_fraction: float
    low_sample_warning: bool = False


@dataclass
class EffDimConfig:
    gamma: float = 1.0
    n_data: int = 4000

    def validate(self):
        if not 0.0 < self.gamma <= 1.0:
            raise AnalysisError("gamma must be in (0, 1]")
        if self.n_data <= np.e:
            raise AnalysisError("n_data must exceed e")


@dataclass
class FourierCloud:
    coefficients: Dict[Tuple[int, int], np.ndarray]  # complex samples per (l1, l2)
    leakage: float
    amplitude_max: Dict[Tuple[int, int], float]
    amplitude_quantiles: Dict[Tuple[int, int], Tuple[float, float, float]]
    phase_spread: Dict[Tuple[int, int], float]


def _basis_observables(n_qubits: int) -> List[Observable]:
    return [Observable.projector(format(y, f"0{n_qubits}b"))
            for y in range(1 << n_qubits)]


def empirical_fisher(spec: AnsatzSpec, theta: np.ndarray,
                     x_samples: np.ndarray,
                     prob_floor: float = 1e-12) -> np.ndarray:
    """Sum over x samples and all basis targets of grad(p) grad(p)^T / p.

    Probability gradients come from the adjoint sweep with projector
    observables; terms with p below the floor are skipped (their
    gradient vanishes to first order as well).
    """
    p_count = spec.n_params
    fmat = np.zeros((p_count, p_count))
    states = circuits.states_batch(spec, theta, x_samples)
    probs = np.abs(states) ** 2
    for y, obs in enumerate(_basis_observables(spec.n_qubits)):
        grads = circuits.gradient_batch(spec, theta, x_samples, observable=obs)
        keep = probs[:, y] > prob_floor
        if not np.any(keep):
            continue
        weighted = grads[keep] / np.sqrt(probs[keep, y][:, None])
        fmat += weighted.T @ weighted
    return fmat


def normalized_fisher(matrices: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Scale each realization by d / E_theta[Tr F], d = parameter count."""
    traces = [np.trace(f) for f in matrices]
    mean_trace = float(np.mean(traces))
    if mean_trace <= 0:
        raise AnalysisError("degenerate model: Fisher trace is zero")
    d = matrices[0].shape[0]
    return [d * f / mean_trace for f in matrices]


def matrix_rank(matrix: np.ndarray, rel_tol: float = 1e-10) -> int:
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def fisher_study(n_reps: int, config: FisherConfig) -> FisherReport:
    """Fisher statistics for the diagnostic circuit at one depth.

    The x samples are drawn once and shared across weight realizations
    (variance reduction; also what makes the average matrix a Monte
    Carlo average over theta alone).
    """
    config.validate()
    spec = circuits.build_toy_ansatz(n_reps)
    p_count = spec.n_params
    rng = np.random.default_rng(config.seed)
    xs = rng.normal(size=(config.n_feature_samples, spec.n_features))
    mats = []
    for _ in range(config.n_weight_realizations):
        theta = rng.uniform(0.0, 2 * np.pi, size=p_count)
        mats.append(empirical_fisher(spec, theta, xs))
    normalized = normalized_fisher(mats)
    pooled = []
    near_zero = []
    for fhat in normalized:
        sym = (fhat + fhat.T) / 2.0
        ev = np.linalg.eigvalsh(sym)
        pooled.append(ev)
        near_zero.append(np.mean(ev < config.near_zero_threshold))
    average = np.mean(mats, axis=0)
    return FisherReport(
        n_reps=n_reps,
        n_params=p_count,
        matrices=mats,
        average=average,
        rank_average=matrix_rank(average, config.rank_tolerance),
        eigenvalues=np.concatenate(pooled),
        near_zero_fraction=float(np.mean(near_zero)),
        low_sample_warning=config.n_weight_realizations < 10,
    )


def average_fisher_study(depths: Sequence[int],
                         config: FisherConfig) -> Dict[int, FisherReport]:
    return {n: fisher_study(n, config) for n in depths}


def effective_dimension(normalized: Sequence[np.ndarray], gamma: float,
                        n_data: int) -> float:
    """Monte Carlo estimate of the Fisher-based capacity measure.

    d = 2 log( E_theta sqrt(det(I + kappa F_hat)) ) / log kappa with
    kappa = gamma n / (2 pi log n).
    """
    cfg = EffDimConfig(gamma=gamma, n_data=n_data)
    cfg.validate()
    kappa = gamma * n_data / (2 * np.pi * np.log(n_data))
    if kappa <= 1.0:
        raise AnalysisError(
            f"kappa={kappa:.4g} <= 1: effective dimension denominator ill-conditioned")
    d = normalized[0].shape[0]
    log_sqrts = []
    for fhat in normalized:
        sym = (fhat + fhat.T) / 2.0
        ev = np.linalg.eigvalsh(sym)
        ev = np.maximum(ev, 0.0)
        log_sqrts.append(0.5 * np.sum(np.log1p(kappa * ev)))
    # log-mean-exp for stability
    m = np.max(log_sqrts)
    log_mean = m + np.log(np.mean(np.exp(np.array(log_sqrts) - m)))
    return float(2.0 * log_mean / np.log(kappa))


# ---------------------------------------------------------------------------
# Fourier accessibility


def fourier_coefficients(spec: AnsatzSpec, theta: np.ndarray,
                         grid_size: int = 8) -> Tuple[np.ndarray, float]:
    """3 x 3 coefficient table over l1, l2 in {-1, 0, 1}, plus leakage.

    The model output is sampled on a grid_size^2 grid over [0, 2pi)^2
    and discretely Fourier transformed; with one encoding repetition
    per feature all weight should sit in the nine lowest bins, so the
    largest out-of-band magnitude is a numerical-health indicator.
    """
    if grid_size < 3:
        raise AnalysisError("grid_size must be >= 3 (Nyquist for |l| <= 1)")
    if spec.n_features != 2:
        raise AnalysisError("fourier_coefficients expects a 2-feature circuit")
    grid = 2 * np.pi * np.arange(grid_size) / grid_size
    x1, x2 = np.meshgrid(grid, grid, indexing="ij")
    pts = np.column_stack([x1.ravel(), x2.ravel()])
    vals = circuits.evaluate_batch(spec, theta, pts).reshape(grid_size, grid_size)
    coeffs = np.fft.fft2(vals) / grid_size ** 2
    freq = np.fft.fftfreq(grid_size, d=1.0 / grid_size).astype(int)
    index = {f: i for i, f in enumerate(freq)}
    table = np.empty((3, 3), dtype=np.complex128)
    in_band = np.zeros((grid_size, grid_size), dtype=bool)
    for a, l1 in enumerate((-1, 0, 1)):
        for b, l2 in enumerate((-1, 0, 1)):
            i1, i2 = index[l1], index[l2]
            table[a, b] = coeffs[i1, i2]
            in_band[i1, i2] = True
    leakage = float(np.max(np.abs(coeffs[~in_band])))
    return table, leakage


def fourier_cloud(spec: AnsatzSpec, n_samples: int = 1000,
                  seed: int = 0, grid_size: int = 8) -> FourierCloud:
    rng = np.random.default_rng(seed)
    ls = (-1, 0, 1)
    samples = {(l1, l2): np.empty(n_samples, dtype=np.complex128)
               for l1 in ls for l2 in ls}
    worst_leak = 0.0
    for s in range(n_samples):
        theta = rng.uniform(0.0, 2 * np.pi, size=spec.n_params)
        table, leak = fourier_coefficients(spec, theta, grid_size)
        worst_leak = max(worst_leak, leak)
        for a, l1 in enumerate(ls):
            for b, l2 in enumerate(ls):
                samples[(l1, l2)][s] = table[a, b]
    amp_max, amp_q, phase_spread = {}, {}, {}
    for key, vals in samples.items():
        amp = np.abs(vals)
        amp_max[key] = float(amp.max())
        amp_q[key] = (float(np.quantile(amp, 0.25)),
                      float(np.quantile(amp, 0.5)),
                      float(np.quantile(amp, 0.75)))
        phase_spread[key] = float(np.ptp(np.angle(vals)))
    return FourierCloud(coefficients=samples, leakage=worst_leak,
                        amplitude_max=amp_max, amplitude_quantiles=amp_q,
                        phase_spread=phase_spread)


# ---------------------------------------------------------------------------
# report serialization


def fisher_report_to_json(reports: Dict[int, FisherReport],
                          eff_dims: Dict[int, float]) -> str:
    doc = {}
    for n, rep in sorted(reports.items()):
        doc[str(n)] = {
            "n_params": rep.n_params,
            "rank_average": rep.rank_average,
            "near_zero_fraction": rep.near_zero_fraction,
            "effective_dimension": eff_dims[n],
            "eigenvalues": rep.eigenvalues.tolist(),
            "low_sample_warning": rep.low_sample_warning,
        }
    return json.dumps(doc, sort_keys=True)


def fourier_cloud_to_json(cloud: FourierCloud) -> str:
    records = []
    for (l1, l2), vals in sorted(cloud.coefficients.items()):
        for c in vals:
            records.append({"l1": l1, "l2": l2, "re": c.real, "im": c.imag})
    summary = {
        f"{l1},{l2}": {
            "amplitude_max": cloud.amplitude_max[(l1, l2)],
            "amplitude_quantiles": list(cloud.amplitude_quantiles[(l1, l2)]),
            "phase_spread": cloud.phase_spread[(l1, l2)],
        }
        for (l1, l2) in sorted(cloud.coefficients)
    }
    return json.dumps({"leakage": cloud.leakage, "samples": records,
                       "summary": summary}, sort_keys=True)
