"""Numerically stable operations on probability simplex vectors.

All functions are pure and operate on 1-d float arrays (single vectors)
or 2-d arrays where each row is a vector (the *_rows variants used by the
training loop).
"""

import numpy as np

from .errors import ConfigError, InvalidInputError, ShapeError

# Predictions are clamped to [EPS_LOG, 1] before any log; keeps losses
# finite when a squeezed stored prediction underflows to 0.
EPS_LOG = 1e-12

SIMPLEX_TOL = 1e-9


def validate_prob_vector(p, name="p"):
    """Raise InvalidInputError unless p is a valid point on the simplex."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ShapeError(f"{name} must be 1-d, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    if np.any(p < -SIMPLEX_TOL) or np.any(p > 1.0 + SIMPLEX_TOL):
        raise InvalidInputError(f"{name} has entries outside [0, 1]")
    if abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise InvalidInputError(f"{name} does not sum to 1 (sum={p.sum()!r})")
    return p


def softmax(h):
    """Stable softmax of a logit vector (max-subtraction before exp)."""
    h = np.asarray(h, dtype=np.float64)
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("softmax input contains non-finite entries")
    z = h - h.max()
    e = np.exp(z)
    return e / e.sum()


def softmax_rows(h):
    """Row-wise stable softmax of an (n, c) logit matrix."""
    h = np.asarray(h, dtype=np.float64)
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("softmax input contains non-finite entries")
    z = h - h.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def squeeze(p, gamma):
    """Sharpen a probability vector: p**gamma renormalized over the simplex.

    Computed in log-space (gamma * log p, then a stable softmax over the
    positive entries) so large gamma does not underflow intermediate powers.
    Entries that are exactly 0 stay 0 (the gamma -> power limit), which makes
    one-hot vectors exact fixed points.
    """
    if gamma < 1:
        raise ConfigError(f"squeeze exponent must be >= 1, got {gamma}")
    p = np.asarray(p, dtype=np.float64)
    if gamma == 1:
        return p.copy()
    out = np.zeros_like(p)
    pos = p > 0.0
    lp = gamma * np.log(p[pos])
    w = np.exp(lp - lp.max())
    out[pos] = w / w.sum()
    return out


def squeeze_rows(P, gamma):
    """Row-wise squeeze of an (n, c) matrix of probability vectors."""
    if gamma < 1:
        raise ConfigError(f"squeeze exponent must be >= 1, got {gamma}")
    P = np.asarray(P, dtype=np.float64)
    if gamma == 1:
        return P.copy()
    out = np.zeros_like(P)
    pos = P > 0.0
    with np.errstate(divide="ignore"):
        lp = np.where(pos, gamma * np.log(np.where(pos, P, 1.0)), -np.inf)
    lp -= lp.max(axis=1, keepdims=True)
    w = np.exp(lp)
    out[:] = w / w.sum(axis=1, keepdims=True)
    return out


def cross_entropy(target, pred):
    """-target . log(pred) with pred clamped to [EPS_LOG, 1] before the log."""
    target = np.asarray(target, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if target.shape != pred.shape:
        raise ShapeError(
            f"target shape {target.shape} != pred shape {pred.shape}"
        )
    return float(-(target * np.log(np.clip(pred, EPS_LOG, 1.0))).sum())


def cross_entropy_rows(targets, preds):
    """Per-row cross entropy for (n, c) target/prediction matrices."""
    targets = np.asarray(targets, dtype=np.float64)
    preds = np.asarray(preds, dtype=np.float64)
    if targets.shape != preds.shape:
        raise ShapeError(
            f"targets shape {targets.shape} != preds shape {preds.shape}"
        )
    return -(targets * np.log(np.clip(preds, EPS_LOG, 1.0))).sum(axis=1)


def one_hot(index, c):
    """Standard basis vector e^index in R^c."""
    v = np.zeros(c, dtype=np.float64)
    v[index] = 1.0
    return v
