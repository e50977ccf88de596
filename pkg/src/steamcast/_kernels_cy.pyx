# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled gate kernels, same contract as _kernels_py.

Batches are (B, 2**n) complex128 arrays mutated in place; qubit 0 is
the most-significant bit of the basis index.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

COMPILED = True

ctypedef double complex cplx


cdef inline void _angles_view(object angles, Py_ssize_t nb, double[::1] out):
    cdef cnp.ndarray a = np.array(
        np.broadcast_to(np.asarray(angles, dtype=np.float64), (nb,)), copy=True)
    cdef const double[::1] v = a
    cdef Py_ssize_t i
    for i in range(nb):
        out[i] = v[i]


def apply_h(cplx[:, ::1] states, int n, int q):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t stride = 1 << (n - 1 - q)
    cdef Py_ssize_t b, base, off, i0, i1
    cdef cplx a0, a1
    cdef double inv = 1.0 / sqrt(2.0)
    for b in range(nb):
        base = 0
        while base < dim:
            for off in range(stride):
                i0 = base + off
                i1 = i0 + stride
                a0 = states[b, i0]
                a1 = states[b, i1]
                states[b, i0] = (a0 + a1) * inv
                states[b, i1] = (a0 - a1) * inv
            base += 2 * stride


def apply_x(cplx[:, ::1] states, int n, int q):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t stride = 1 << (n - 1 - q)
    cdef Py_ssize_t b, base, off, i0, i1
    cdef cplx tmp
    for b in range(nb):
        base = 0
        while base < dim:
            for off in range(stride):
                i0 = base + off
                i1 = i0 + stride
                tmp = states[b, i0]
                states[b, i0] = states[b, i1]
                states[b, i1] = tmp
            base += 2 * stride


def apply_rx(cplx[:, ::1] states, int n, int q, angles):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t stride = 1 << (n - 1 - q)
    cdef Py_ssize_t b, base, off, i0, i1
    cdef cplx a0, a1
    cdef double c, s
    cdef double[::1] ang = np.empty(nb, dtype=np.float64)
    _angles_view(angles, nb, ang)
    for b in range(nb):
        c = cos(ang[b] / 2.0)
        s = sin(ang[b] / 2.0)
        base = 0
        while base < dim:
            for off in range(stride):
                i0 = base + off
                i1 = i0 + stride
                a0 = states[b, i0]
                a1 = states[b, i1]
                states[b, i0] = c * a0 - 1j * s * a1
                states[b, i1] = c * a1 - 1j * s * a0
            base += 2 * stride


def apply_rz(cplx[:, ::1] states, int n, int q, angles):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t stride = 1 << (n - 1 - q)
    cdef Py_ssize_t b, base, off, i0, i1
    cdef cplx ph0, ph1
    cdef double h
    cdef double[::1] ang = np.empty(nb, dtype=np.float64)
    _angles_view(angles, nb, ang)
    for b in range(nb):
        h = ang[b] / 2.0
        ph0 = cos(h) - 1j * sin(h)
        ph1 = cos(h) + 1j * sin(h)
        base = 0
        while base < dim:
            for off in range(stride):
                i0 = base + off
                i1 = i0 + stride
                states[b, i0] = states[b, i0] * ph0
                states[b, i1] = states[b, i1] * ph1
            base += 2 * stride


def apply_cnot(cplx[:, ::1] states, int n, int control, int target):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t pc = n - 1 - control, pt = n - 1 - target
    cdef Py_ssize_t b, i, j
    cdef cplx tmp
    for b in range(nb):
        for i in range(dim):
            if (i >> pc) & 1 and not (i >> pt) & 1:
                j = i ^ (1 << pt)
                tmp = states[b, i]
                states[b, i] = states[b, j]
                states[b, j] = tmp


def apply_rzz(cplx[:, ::1] states, int n, int q1, int q2, angles):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t p1 = n - 1 - q1, p2 = n - 1 - q2
    cdef Py_ssize_t b, i
    cdef cplx ph0, ph1
    cdef double h
    cdef double[::1] ang = np.empty(nb, dtype=np.float64)
    _angles_view(angles, nb, ang)
    for b in range(nb):
        h = ang[b] / 2.0
        ph0 = cos(h) - 1j * sin(h)
        ph1 = cos(h) + 1j * sin(h)
        for i in range(dim):
            if ((i >> p1) ^ (i >> p2)) & 1:
                states[b, i] = states[b, i] * ph1
            else:
                states[b, i] = states[b, i] * ph0


def mult_z(cplx[:, ::1] states, int n, int q):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t p = n - 1 - q
    cdef Py_ssize_t b, i
    for b in range(nb):
        for i in range(dim):
            if (i >> p) & 1:
                states[b, i] = -states[b, i]


def mult_zz(cplx[:, ::1] states, int n, int q1, int q2):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t p1 = n - 1 - q1, p2 = n - 1 - q2
    cdef Py_ssize_t b, i
    for b in range(nb):
        for i in range(dim):
            if ((i >> p1) ^ (i >> p2)) & 1:
                states[b, i] = -states[b, i]


def z_expectation(cplx[:, ::1] states, int n, int q):
    cdef Py_ssize_t nb = states.shape[0], dim = states.shape[1]
    cdef Py_ssize_t p = n - 1 - q
    cdef Py_ssize_t b, i
    cdef double acc
    cdef cnp.ndarray out = np.empty(nb, dtype=np.float64)
    cdef double[::1] ov = out
    for b in range(nb):
        acc = 0.0
        for i in range(dim):
            if (i >> p) & 1:
                acc -= states[b, i].real ** 2 + states[b, i].imag ** 2
            else:
                acc += states[b, i].real ** 2 + states[b, i].imag ** 2
        ov[b] = acc
    return out
