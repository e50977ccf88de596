"""Pure-numpy gate kernels operating on batches of statevectors.

A batch is a complex128 array of shape (B, 2**n).  Qubit 0 is the
most-significant bit of the basis index, so qubit q lives at bit
position n-1-q.  All kernels mutate the batch in place.  Angle
arguments are arrays of shape (B,) or scalars (broadcast over the
batch).
"""
from __future__ import annotations

import numpy as np

COMPILED = False


def _col(values):
    # reshape per-batch factors (real angles or complex phases) for
    # broadcasting against (B, blocks, 2, stride) views
    a = np.asarray(values)
    if a.ndim == 0:
        return a
    return a[:, None, None]


def _split(states: np.ndarray, n: int, q: int) -> np.ndarray:
    """View with qubit q's bit as its own axis: (B, high, 2, low)."""
    b = states.shape[0]
    p = n - 1 - q
    return states.reshape(b, 1 << (n - 1 - p), 2, 1 << p)


def apply_h(states: np.ndarray, n: int, q: int) -> None:
    v = _split(states, n, q)
    a = v[:, :, 0, :].copy()
    b = v[:, :, 1, :]
    inv = 1.0 / np.sqrt(2.0)
    v[:, :, 0, :] = (a + b) * inv
    v[:, :, 1, :] = (a - b) * inv


def apply_x(states: np.ndarray, n: int, q: int) -> None:
    v = _split(states, n, q)
    v[:, :, [0, 1], :] = v[:, :, [1, 0], :]


def apply_rx(states: np.ndarray, n: int, q: int, angles) -> None:
    v = _split(states, n, q)
    c = _col(np.cos(np.asarray(angles) / 2.0))
    s = _col(np.sin(np.asarray(angles) / 2.0))
    a = v[:, :, 0, :].copy()
    b = v[:, :, 1, :]
    v[:, :, 0, :] = c * a - 1j * s * b
    v[:, :, 1, :] = c * b - 1j * s * a


def apply_rz(states: np.ndarray, n: int, q: int, angles) -> None:
    v = _split(states, n, q)
    half = np.asarray(angles) / 2.0
    ph = np.exp(-1j * half)
    v[:, :, 0, :] *= _col(ph)
    v[:, :, 1, :] *= _col(np.conj(ph))


def apply_cnot(states: np.ndarray, n: int, control: int, target: int) -> None:
    b = states.shape[0]
    dim = states.shape[1]
    idx = np.arange(dim)
    pc = n - 1 - control
    pt = n - 1 - target
    sel = (idx >> pc) & 1 == 1
    src = idx[sel]
    dst = src ^ (1 << pt)
    # swap each (control=1, target=0) pair once
    lo = src[src < dst]
    hi = lo ^ (1 << pt)
    tmp = states[:, lo].copy()
    states[:, lo] = states[:, hi]
    states[:, hi] = tmp


def apply_rzz(states: np.ndarray, n: int, q1: int, q2: int, angles) -> None:
    dim = states.shape[1]
    idx = np.arange(dim)
    p1 = n - 1 - q1
    p2 = n - 1 - q2
    parity = ((idx >> p1) ^ (idx >> p2)) & 1
    half = np.asarray(angles, dtype=np.float64) / 2.0
    ph = np.exp(-1j * half)
    if ph.ndim == 0:
        phases = np.where(parity == 0, ph, np.conj(ph))
        states *= phases[None, :]
    else:
        phases = np.where(parity[None, :] == 0, ph[:, None], np.conj(ph)[:, None])
        states *= phases


def mult_z(states: np.ndarray, n: int, q: int) -> None:
    """Multiply by the Z operator on qubit q (for adjoint generators)."""
    v = _split(states, n, q)
    v[:, :, 1, :] *= -1.0


def mult_zz(states: np.ndarray, n: int, q1: int, q2: int) -> None:
    dim = states.shape[1]
    idx = np.arange(dim)
    p1 = n - 1 - q1
    p2 = n - 1 - q2
    sign = 1.0 - 2.0 * (((idx >> p1) ^ (idx >> p2)) & 1)
    states *= sign[None, :]


def z_expectation(states: np.ndarray, n: int, q: int) -> np.ndarray:
    v = _split(states, n, q)
    pr = np.abs(v) ** 2
    return (pr[:, :, 0, :].sum(axis=(1, 2)) - pr[:, :, 1, :].sum(axis=(1, 2)))
