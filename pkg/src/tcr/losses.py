"""Training objectives and their analytic gradients w.r.t. the logits.

Every loss exposes the gradient dL/dh (pre-softmax), which feeds directly
into model.backward. Finite-difference oracles in the test suite check
each pair.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .numerics import EPS_LOG, cross_entropy, one_hot


@dataclass
class PseudoLabel:
    """The simplex-valued target actually fed to the loss."""

    target: np.ndarray
    provenance: str  # original | reflected | bootstrap-soft | bootstrap-hard


def reflect_target(y, f_prev, beta):
    """Convex combination beta * y + (1 - beta) * f_prev.

    beta is the confidence in the annotation quality: beta=1 trusts the
    label, beta=0 trusts the model's previous-epoch prediction.
    """
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must be in [0, 1], got {beta}")
    y = np.asarray(y, dtype=np.float64)
    f_prev = np.asarray(f_prev, dtype=np.float64)
    if y.shape != f_prev.shape:
        raise ShapeError(f"shape mismatch {y.shape} vs {f_prev.shape}")
    return PseudoLabel(target=beta * y + (1.0 - beta) * f_prev,
                       provenance="reflected")


def ce_grad(y_star, f):
    """dL/dh of cross entropy against a fixed simplex target: f - y_star."""
    y_star = np.asarray(y_star, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if y_star.shape != f.shape:
        raise ShapeError(f"shape mismatch {y_star.shape} vs {f.shape}")
    return f - y_star


def reflection_grad(y, f_prev, f, beta):
    """dL/dh of the reflection loss.

    Decomposes as beta * (f - y) + (1 - beta) * (f - f_prev): the first
    term is the plain label-fitting gradient, the second resists change
    away from the previous-epoch prediction.
    """
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must be in [0, 1], got {beta}")
    y = np.asarray(y, dtype=np.float64)
    f_prev = np.asarray(f_prev, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if not (y.shape == f_prev.shape == f.shape):
        raise ShapeError("reflection_grad arguments must share one shape")
    return beta * (f - y) + (1.0 - beta) * (f - f_prev)


def bootstrap_soft_grad(f):
    """dL/dh of the self-target cross entropy -sum_j f_j log f_j.

    Component l is f_l * (sum_j f_j log f_j - log f_l). Gradient descent
    on this term increases the confidence of the current argmax.
    """
    f = np.asarray(f, dtype=np.float64)
    logf = np.log(np.clip(f, EPS_LOG, 1.0))
    return f * ((f * logf).sum() - logf)


def bootstrap_hard_grad(f):
    """dL/dh with the current argmax (lowest-index ties) as a hard target."""
    f = np.asarray(f, dtype=np.float64)
    return f - one_hot(int(np.argmax(f)), len(f))


def gce_loss(f, y_class, q):
    """Generalized cross entropy (1 - f_y^q) / q with its logit gradient.

    q -> 0 recovers cross entropy, q = 1 is the mean-absolute-error form.
    """
    if not 0.0 < q <= 1.0:
        raise ConfigError(f"q must be in (0, 1], got {q}")
    f = np.asarray(f, dtype=np.float64)
    fy = f[y_class]
    loss = (1.0 - fy ** q) / q
    grad = fy ** q * (f - one_hot(y_class, len(f)))
    return loss, grad


def forward_loss(f, y, T):
    """Forward-corrected cross entropy -y . log(T^T f) with its gradient.

    T is the (ground truth) label transition matrix; with T = identity this
    reduces to plain cross entropy.
    """
    f = np.asarray(f, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    c = len(f)
    if y.shape != f.shape or T.shape != (c, c):
        raise ShapeError("forward_loss dimension mismatch")
    u = T.T @ f
    loss = float(-(y * np.log(np.clip(u, EPS_LOG, 1.0))).sum())
    dL_df = -(T @ (y / np.clip(u, EPS_LOG, None)))
    # pull back through the softmax Jacobian
    grad = f * (dL_df - (f * dL_df).sum())
    return loss, grad
