"""Pure-NumPy implementations of the dense-layer kernels.

Fallback backend used when the compiled extension is unavailable (or when
TCR_PURE_PYTHON=1). Signatures mirror tcr._kernels exactly.
"""

import numpy as np

BACKEND = "numpy"


def linear_forward(x, W, b):
    """z = x @ W.T + b for x (n, d), W (o, d), b (o)."""
    return x @ W.T + b


def relu(z):
    return np.maximum(z, 0.0)


def relu_backward(g, z):
    """Mask the upstream gradient by the sign of the pre-activation."""
    return np.where(z > 0.0, g, 0.0)


def linear_backward(g, x, W):
    """Gradients of z = x @ W.T + b given dL/dz = g.

    Returns (gW, gb, gx) with shapes matching (W, b, x).
    """
    return g.T @ x, g.sum(axis=0), g @ W
