# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled dense-layer kernels for the MLP hot loop.

The batches here are tiny (<= a few hundred rows, <= a few hundred
features), so avoiding per-call NumPy dispatch overhead is what matters;
plain C loops with the contraction index innermost are enough.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def linear_forward(cnp.float64_t[:, ::1] x not None,
                   cnp.float64_t[:, ::1] W not None,
                   cnp.float64_t[::1] b not None):
    """z = x @ W.T + b for x (n, d), W (o, d), b (o)."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], o = W.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, o))
    cdef cnp.float64_t[:, ::1] ov = out
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(o):
            acc = b[j]
            for k in range(d):
                acc += x[i, k] * W[j, k]
            ov[i, j] = acc
    return out


def relu(cnp.float64_t[:, ::1] z not None):
    cdef Py_ssize_t n = z.shape[0], c = z.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, c))
    cdef cnp.float64_t[:, ::1] ov = out
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(c):
            ov[i, j] = z[i, j] if z[i, j] > 0.0 else 0.0
    return out


def relu_backward(cnp.float64_t[:, ::1] g not None,
                  cnp.float64_t[:, ::1] z not None):
    """Mask the upstream gradient by the sign of the pre-activation."""
    cdef Py_ssize_t n = g.shape[0], c = g.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, c))
    cdef cnp.float64_t[:, ::1] ov = out
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(c):
            ov[i, j] = g[i, j] if z[i, j] > 0.0 else 0.0
    return out


def linear_backward(cnp.float64_t[:, ::1] g not None,
                    cnp.float64_t[:, ::1] x not None,
                    cnp.float64_t[:, ::1] W not None):
    """Gradients of z = x @ W.T + b given dL/dz = g.

    Returns (gW, gb, gx) with shapes matching (W, b, x).
    """
    cdef Py_ssize_t n = g.shape[0], o = g.shape[1], d = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gW = np.zeros((o, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gb = np.zeros(o)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gx = np.zeros((n, d))
    cdef cnp.float64_t[:, ::1] gWv = gW
    cdef cnp.float64_t[::1] gbv = gb
    cdef cnp.float64_t[:, ::1] gxv = gx
    cdef Py_ssize_t i, j, k
    cdef double gij
    for i in range(n):
        for j in range(o):
            gij = g[i, j]
            gbv[j] += gij
            for k in range(d):
                gWv[j, k] += gij * x[i, k]
                gxv[i, k] += gij * W[j, k]
    return gW, gb, gx
