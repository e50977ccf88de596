"""Data pipeline: ingestion, synthetic generation, target construction,
standardization, PCA and angle scaling, chronological splitting.

All fit operations consume the training split only; transforms carry
the fitted stats so the test split can never leak into them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np


class IngestionError(Exception):
    pass


class SizeError(Exception):
    pass


class ConfigError(Exception):
    pass


@dataclass
class TimeSeriesFrame:
    timestamps: np.ndarray          # monotone, 1-minute cadence assumed
    channels: np.ndarray            # (n_steps, n_channels)

    def __post_init__(self):
        if np.any(np.diff(self.timestamps) <= 0):
            raise IngestionError("timestamps must be strictly increasing")
        if np.any(~np.isfinite(self.channels)):
            raise IngestionError("channels contain non-finite values")

    @property
    def n_steps(self) -> int:
        return self.channels.shape[0]

    @property
    def n_channels(self) -> int:
        return self.channels.shape[1]


@dataclass
class ScalerStats:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray            # bool flag per channel


@dataclass
class PcaModel:
    mean: np.ndarray                # (n_channels,)
    components: np.ndarray          # (k, n_channels), rows orthonormal
    explained_variance_ratio: np.ndarray
    eigenvalues: np.ndarray         # all eigenvalues, nonincreasing


@dataclass
class AngleScaler:
    lo: np.ndarray                  # per-component train minimum
    hi: np.ndarray
    clamped: int = 0


@dataclass
class SupervisedSet:
    x: np.ndarray                   # (n, k) angle-scaled components
    y: np.ndarray                   # (n, 2) standardized targets

    @property
    def n(self) -> int:
        return self.x.shape[0]


# ---------------------------------------------------------------------------
# ingestion


def load_csv(path: str) -> TimeSeriesFrame:
    """Header row, first column timestamp (ISO-8601 or integer index)."""
    import csv
    import datetime as dt

    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IngestionError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file")
        width = len(header)
        stamps: List[float] = []
        rows: List[List[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                raise IngestionError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {width}")
            raw_ts = row[0]
            try:
                ts = float(raw_ts)
            except ValueError:
                try:
                    ts = dt.datetime.fromisoformat(raw_ts).timestamp()
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {lineno} column 1: bad timestamp {raw_ts!r}")
            vals = []
            for col, cell in enumerate(row[1:], start=2):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {lineno} column {col}: "
                        f"non-numeric cell {cell!r}")
            stamps.append(ts)
            rows.append(vals)
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    ts_arr = np.array(stamps)
    if np.any(np.diff(ts_arr) <= 0):
        bad = int(np.argmax(np.diff(ts_arr) <= 0)) + 2
        raise IngestionError(f"{path}: non-monotone timestamp at row {bad + 1}")
    return TimeSeriesFrame(timestamps=ts_arr, channels=np.array(rows))


# ---------------------------------------------------------------------------
# synthetic plant-like data


def synth_generate(n_steps: int = 6500, n_base_channels: int = 64,
                   seed: int = 0) -> TimeSeriesFrame:
    """Plant-like sensors driven by a small set of shared latent signals.

    Eight latent drivers (sinusoid mixtures + AR(1) noise + sparse
    spike events) mix linearly into the base sensors, so the channel
    covariance is genuinely low-rank plus noise.  Each base channel is
    extended with its first difference and 10-step moving average: 3x
    channels total.
    """
    if n_steps < 100:
        raise SizeError(f"n_steps must be >= 100, got {n_steps}")
    rng = np.random.default_rng(seed)
    t = np.arange(n_steps, dtype=np.float64)
    n_latent = 8
    latent = np.empty((n_steps, n_latent))
    for c in range(n_latent):
        n_waves = rng.integers(2, 5)
        sig = np.zeros(n_steps)
        for _ in range(n_waves):
            period = rng.uniform(40.0, 600.0)
            amp = rng.uniform(0.5, 2.0)
            phase = rng.uniform(0.0, 2 * np.pi)
            sig += amp * np.sin(2 * np.pi * t / period + phase)
        # AR(1) noise
        eps = rng.normal(scale=0.15, size=n_steps)
        ar = np.empty(n_steps)
        ar[0] = eps[0]
        phi = 0.9
        for i in range(1, n_steps):
            ar[i] = phi * ar[i - 1] + eps[i]
        sig += ar
        # sparse spike events (load drops / fuel bursts)
        n_spikes = rng.integers(3, 9)
        for _ in range(n_spikes):
            pos = rng.integers(0, n_steps)
            width = rng.integers(5, 30)
            height = rng.uniform(-3.0, 3.0)
            lo, hi = max(0, pos - width), min(n_steps, pos + width)
            window = np.arange(lo, hi)
            sig[lo:hi] += height * np.exp(-0.5 * ((window - pos) / (width / 2.0)) ** 2)
        latent[:, c] = sig
    mixing = rng.normal(size=(n_latent, n_base_channels))
    mixing /= np.sqrt(n_latent)
    offsets = rng.uniform(-5.0, 5.0, size=n_base_channels)
    noise = rng.normal(scale=0.1, size=(n_steps, n_base_channels))
    base = latent @ mixing + offsets + noise
    diff = np.vstack([np.zeros((1, n_base_channels)), np.diff(base, axis=0)])
    mavg = np.empty_like(base)
    kernel = np.ones(10) / 10.0
    for c in range(n_base_channels):
        padded = np.concatenate([np.full(9, base[0, c]), base[:, c]])
        mavg[:, c] = np.convolve(padded, kernel, mode="valid")
    channels = np.concatenate([base, diff, mavg], axis=1)
    return TimeSeriesFrame(timestamps=t.copy(), channels=channels)


# ---------------------------------------------------------------------------
# targets


def build_targets(frame: TimeSeriesFrame, sensor_indices,
                  shift_steps: int = 15,
                  window_steps: int = 10) -> Tuple[np.ndarray, np.ndarray]:
    """Future-mean targets: target_k(t) = mean over t+shift .. t+shift+window-1.

    Returns (aligned feature matrix, Y) with rows lacking full future
    data dropped.
    """
    i, j = sensor_indices
    for s in (i, j):
        if not 0 <= s < frame.n_channels:
            raise ConfigError(f"sensor index {s} out of range")
    horizon = shift_steps + window_steps
    if frame.n_steps <= horizon:
        raise SizeError(
            f"frame too short: {frame.n_steps} steps <= shift+window={horizon}")
    n_out = frame.n_steps - (shift_steps + window_steps - 1)
    y = np.empty((n_out, 2))
    for col, s in enumerate((i, j)):
        ch = frame.channels[:, s]
        csum = np.concatenate([[0.0], np.cumsum(ch)])
        starts = np.arange(n_out) + shift_steps
        y[:, col] = (csum[starts + window_steps] - csum[starts]) / window_steps
    return frame.channels[:n_out], y


# ---------------------------------------------------------------------------
# standardization


def standardize_fit(train: np.ndarray) -> ScalerStats:
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    constant = std < 1e-12
    std = np.where(constant, 1.0, std)
    return ScalerStats(mean=mean, std=std, constant=constant)


def standardize_apply(data: np.ndarray, stats: ScalerStats) -> np.ndarray:
    out = (data - stats.mean) / stats.std
    out[:, stats.constant] = 0.0
    return out


# ---------------------------------------------------------------------------
# PCA via cyclic Jacobi


def jacobi_eigh(a: np.ndarray, tol: float = 1e-10,
                max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps the upper triangle until the off-diagonal Frobenius norm
    drops below tol.  Returns (eigenvalues, eigenvectors-as-columns)
    sorted by nonincreasing eigenvalue.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ConfigError("jacobi_eigh requires a square matrix")
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(max(0.0, np.sum(a ** 2) - np.sum(np.diag(a) ** 2)))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < tol / (n * n):
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) \
                    if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot_p = a[:, p].copy()
                rot_q = a[:, q].copy()
                a[:, p] = c * rot_p - s * rot_q
                a[:, q] = s * rot_p + c * rot_q
                rot_p = a[p, :].copy()
                rot_q = a[q, :].copy()
                a[p, :] = c * rot_p - s * rot_q
                a[q, :] = s * rot_p + c * rot_q
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals)[::-1]
    return eigvals[order], v[:, order]


def pca_fit(train_std: np.ndarray, k: int = 5) -> PcaModel:
    n_channels = train_std.shape[1]
    if k > n_channels:
        raise ConfigError(f"k={k} exceeds {n_channels} channels")
    mean = train_std.mean(axis=0)
    centered = train_std - mean
    cov = centered.T @ centered / max(1, centered.shape[0] - 1)
    eigvals, eigvecs = jacobi_eigh(cov)
    total = np.sum(eigvals)
    ratios = eigvals[:k] / total if total > 0 else np.zeros(k)
    return PcaModel(mean=mean, components=eigvecs[:, :k].T.copy(),
                    explained_variance_ratio=ratios,
                    eigenvalues=eigvals)


def pca_transform(data: np.ndarray, model: PcaModel) -> np.ndarray:
    if data.shape[1] != model.mean.shape[0]:
        raise ConfigError(
            f"data has {data.shape[1]} channels, model expects {model.mean.shape[0]}")
    return (data - model.mean) @ model.components.T


def angle_scale_fit(train_components: np.ndarray) -> AngleScaler:
    return AngleScaler(lo=train_components.min(axis=0),
                       hi=train_components.max(axis=0))


def angle_scale_apply(components: np.ndarray,
                      scaler: AngleScaler) -> np.ndarray:
    """Min-max map each component to [-pi, pi]; out-of-range values clamp."""
    span = np.where(scaler.hi > scaler.lo, scaler.hi - scaler.lo, 1.0)
    unit = (components - scaler.lo) / span
    clamped = int(np.sum((unit < 0.0) | (unit > 1.0)))
    scaler.clamped += clamped
    unit = np.clip(unit, 0.0, 1.0)
    return (2.0 * unit - 1.0) * np.pi


# ---------------------------------------------------------------------------
# splitting


def chronological_split(x: np.ndarray, y: np.ndarray,
                        train_fraction: float = 0.8
                        ) -> Tuple[SupervisedSet, SupervisedSet]:
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = x.shape[0]
    n_train = int(np.floor(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise ConfigError(
            f"degenerate split: {n_train}/{n - n_train} with n={n}")
    return (SupervisedSet(x=x[:n_train], y=y[:n_train]),
            SupervisedSet(x=x[n_train:], y=y[n_train:]))


# ---------------------------------------------------------------------------
# serialization


def pca_to_json(model: PcaModel) -> str:
    return json.dumps({
        "mean": model.mean.tolist(),
        "components": model.components.tolist(),
        "explained_variance_ratio": model.explained_variance_ratio.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
    }, sort_keys=True)


def pca_from_json(text: str) -> PcaModel:
    doc = json.loads(text)
    return PcaModel(mean=np.array(doc["mean"]),
                    components=np.array(doc["components"]),
                    explained_variance_ratio=np.array(doc["explained_variance_ratio"]),
                    eigenvalues=np.array(doc["eigenvalues"]))


def scaler_to_json(stats: ScalerStats, angle: AngleScaler,
                   target_stats: ScalerStats) -> str:
    return json.dumps({
        "feature_mean": stats.mean.tolist(),
        "feature_std": stats.std.tolist(),
        "feature_constant": stats.constant.astype(int).tolist(),
        "angle_lo": angle.lo.tolist(),
        "angle_hi": angle.hi.tolist(),
        "target_mean": target_stats.mean.tolist(),
        "target_std": target_stats.std.tolist(),
        "target_constant": target_stats.constant.astype(int).tolist(),
    }, sort_keys=True)


def scaler_from_json(text: str):
    doc = json.loads(text)
    stats = ScalerStats(mean=np.array(doc["feature_mean"]),
                        std=np.array(doc["feature_std"]),
                        constant=np.array(doc["feature_constant"], dtype=bool))
    angle = AngleScaler(lo=np.array(doc["angle_lo"]),
                        hi=np.array(doc["angle_hi"]))
    target = ScalerStats(mean=np.array(doc["target_mean"]),
                         std=np.array(doc["target_std"]),
                         constant=np.array(doc["target_constant"], dtype=bool))
    return stats, angle, target
