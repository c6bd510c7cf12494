"""The training loop: delayed prediction store, squeeze schedule, metrics.

One call to train_epoch runs a full pass of seeded mini-batches:
forward, pseudo-label construction from the store, loss/gradient for the
configured method, SGD step, and a store update with the same forward
pass's predictions. Everything is deterministic given the config seeds.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError
from .model import (LrSchedule, backward, forward, init_optimizer,
                    init_params, lr_at, sgd_step)
from .numerics import EPS_LOG, cross_entropy_rows, softmax_rows, squeeze_rows

METHODS = ("ce", "tcr", "vanilla", "bootstrap-soft", "bootstrap-hard",
           "gce", "forward")


class PredictionStore:
    """Per-sample prediction buffer with an epoch-granular delay ring.

    Rows start as the all-zero sentinel. During epoch t the loop writes
    into a current-epoch buffer; completed epochs are pushed onto a ring of
    the last `delta` snapshots, so a row written in epoch t is first
    visible to fetches in epoch t + delta. delta=0 reads the current-epoch
    buffer (the prediction recorded earlier in the same pass).
    """

    def __init__(self, n, c, delta=1, alpha=0.0):
        if delta < 0:
            raise ConfigError(f"delay must be >= 0, got {delta}")
        if not 0.0 <= alpha < 1.0:
            raise ConfigError(f"EWA coefficient must be in [0, 1), got {alpha}")
        self.n, self.c = n, c
        self.delta = delta
        self.alpha = alpha
        self.current = np.zeros((n, c))
        self.history = deque(maxlen=max(delta, 1))  # completed epochs, newest last

    def _check_ids(self, ids):
        ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
        if len(ids) and (ids.min() < 0 or ids.max() >= self.n):
            raise DataError("sample id out of range for the prediction store")
        return ids

    def update(self, ids, f_current, epoch, t_squeeze, gamma):
        """Write candidate = alpha * old + (1 - alpha) * f, squeezed from t_squeeze on."""
        ids = self._check_ids(ids)
        f_current = np.atleast_2d(np.asarray(f_current, dtype=np.float64))
        old = self.history[-1][ids] if self.history else np.zeros_like(f_current)
        cand = self.alpha * old + (1.0 - self.alpha) * f_current
        if epoch >= t_squeeze:
            cand = squeeze_rows(cand, gamma)
        self.current[ids] = cand

    def delayed_rows(self, ids):
        """Rows from the snapshot `delta` epochs back, or None while no
        such snapshot exists yet (the zero-sentinel phase)."""
        ids = self._check_ids(ids)
        if self.delta == 0:
            return self.current[ids]
        if len(self.history) < self.delta:
            return None
        return self.history[-self.delta][ids]

    def finish_epoch(self):
        self.history.append(self.current.copy())


def fetch_targets(store, ids, y_noisy_onehot, beta, epoch):
    """Pseudo-label rows: the noisy labels while no delayed snapshot exists
    (first delta epochs), otherwise beta * y + (1 - beta) * z."""
    z = store.delayed_rows(ids)
    if z is None:
        return y_noisy_onehot.copy()
    return beta * y_noisy_onehot + (1.0 - beta) * z


@dataclass
class TrainConfig:
    """Hyperparameters and seeds for one training run."""

    method: str = "tcr"
    beta: float = 0.1
    gamma: float = 1.1
    delta: int = 1
    alpha: float = 0.0
    t_squeeze: Optional[int] = None  # default: first LR milestone epoch + 1
    epochs: int = 60
    batch_size: int = 32
    lr: float = 0.1
    milestones: list = field(default_factory=lambda: [(30, 10.0), (45, 10.0)])
    momentum: float = 0.9
    weight_decay: float = 1e-4
    hidden_dims: list = field(default_factory=lambda: [64, 64])
    q: float = 0.7                     # gce only
    forward_T: Optional[np.ndarray] = None  # forward correction only
    seed_init: int = 0
    seed_shuffle: int = 1

    def __post_init__(self):
        problems = []
        if self.method not in METHODS:
            problems.append(f"unknown method {self.method!r}")
        if not 0.0 <= self.beta <= 1.0:
            problems.append(f"beta must be in [0, 1], got {self.beta}")
        if self.gamma < 1.0:
            problems.append(f"gamma must be >= 1, got {self.gamma}")
        if self.delta < 0:
            problems.append(f"delta must be >= 0, got {self.delta}")
        if not 0.0 <= self.alpha < 1.0:
            problems.append(f"alpha must be in [0, 1), got {self.alpha}")
        if self.epochs < 1:
            problems.append(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 < self.q <= 1.0:
            problems.append(f"q must be in (0, 1], got {self.q}")
        if self.t_squeeze is None:
            first = self.milestones[0][0] if self.milestones else self.epochs
            self.t_squeeze = min(first + 1, self.epochs)
        if not 1 <= self.t_squeeze <= self.epochs:
            problems.append(
                f"t_squeeze must be in [1, epochs], got {self.t_squeeze}")
        if self.method == "vanilla":
            self.method = "tcr"
            self.delta = 0
        if problems:
            raise ConfigError("; ".join(problems))

    def schedule(self):
        return LrSchedule(initial=self.lr, milestones=list(self.milestones))


@dataclass
class EpochMetrics:
    epoch: int
    lr: float
    train_loss: float
    train_acc_noisy: float
    train_acc_clean_subset: float
    train_acc_corrupt_subset: float
    test_acc: float


def _batch_loss_grad(method, config, F, Y, y_idx, targets):
    """Per-row losses and the un-normalized dL/dh rows for one mini-batch."""
    if method in ("ce", "tcr"):
        tgt = Y if method == "ce" else targets
        return cross_entropy_rows(tgt, F), F - tgt
    if method == "bootstrap-hard":
        hard = np.zeros_like(F)
        hard[np.arange(len(F)), F.argmax(axis=1)] = 1.0
        tgt = config.beta * Y + (1.0 - config.beta) * hard
        return cross_entropy_rows(tgt, F), F - tgt
    if method == "bootstrap-soft":
        logf = np.log(np.clip(F, EPS_LOG, 1.0))
        losses = (config.beta * cross_entropy_rows(Y, F)
                  + (1.0 - config.beta) * (-(F * logf).sum(axis=1)))
        soft = F * ((F * logf).sum(axis=1, keepdims=True) - logf)
        return losses, config.beta * (F - Y) + (1.0 - config.beta) * soft
    if method == "gce":
        fy = F[np.arange(len(F)), y_idx]
        losses = (1.0 - fy ** config.q) / config.q
        grad = fy[:, None] ** config.q * (F - Y)
        return losses, grad
    if method == "forward":
        T = config.forward_T
        if T is None:
            raise ConfigError("forward method needs a transition matrix")
        U = F @ T
        losses = cross_entropy_rows(Y, U)
        dF = -((Y / np.clip(U, EPS_LOG, None)) @ T.T)
        grad = F * (dF - (F * dF).sum(axis=1, keepdims=True))
        return losses, grad
    raise ConfigError(f"unknown method {method!r}")


def train_epoch(params, opt, store, train_ds, test_ds, config, epoch,
                shuffle_rng, trace_ids=None, trace_sink=None):
    """One full pass over the training set; returns EpochMetrics."""
    n = len(train_ds)
    c = train_ds.num_classes
    opt.lr = lr_at(config.schedule(), epoch)
    perm = shuffle_rng.permutation(n)

    loss_sum = 0.0
    correct = np.zeros(n, dtype=bool)
    for start in range(0, n, config.batch_size):
        idx = perm[start:start + config.batch_size]
        X = train_ds.features[idx]
        y_idx = train_ds.labels[idx]
        Y = np.zeros((len(idx), c))
        Y[np.arange(len(idx)), y_idx] = 1.0

        logits, cache = forward(params, X)
        F = softmax_rows(logits)
        # line-5 predictions: recorded from the same pass the loss sees
        store.update(idx, F, epoch, config.t_squeeze, config.gamma)

        targets = None
        if config.method == "tcr":
            targets = fetch_targets(store, idx, Y, config.beta, epoch)
        losses, grad_rows = _batch_loss_grad(
            config.method, config, F, Y, y_idx, targets)
        loss_sum += losses.sum()
        correct[idx] = F.argmax(axis=1) == y_idx

        grads = backward(params, cache, grad_rows / len(idx))
        sgd_step(params, opt, grads)
    store.finish_epoch()

    mask = train_ds.mask if train_ds.mask is not None else np.zeros(n, bool)
    metrics = EpochMetrics(
        epoch=epoch,
        lr=opt.lr,
        train_loss=loss_sum / n,
        train_acc_noisy=correct.mean(),
        train_acc_clean_subset=(correct[~mask].mean() if (~mask).any()
                                else float("nan")),
        train_acc_corrupt_subset=(correct[mask].mean() if mask.any()
                                  else float("nan")),
        test_acc=evaluate(params, test_ds),
    )
    if trace_ids is not None and len(trace_ids) and trace_sink is not None:
        trace_samples(params, store, train_ds, trace_ids, epoch, trace_sink)
    return metrics


def evaluate(params, dataset):
    """Fraction of samples whose logit argmax (lowest-index ties) matches
    the label."""
    if len(dataset) == 0:
        raise DataError("cannot evaluate on an empty dataset")
    logits, _ = forward(params, dataset.features)
    return float((logits.argmax(axis=1) == dataset.labels).mean())


def trace_samples(params, store, dataset, sample_ids, epoch, sink):
    """Append (epoch, sample_id, probability row) snapshots to the sink."""
    sample_ids = np.asarray(sample_ids, dtype=np.int64)
    if len(sample_ids) == 0:
        return
    pos = {int(i): k for k, i in enumerate(dataset.ids)}
    try:
        rows = [pos[int(s)] for s in sample_ids]
    except KeyError as exc:
        raise DataError(f"traced sample id {exc} not in dataset")
    logits, _ = forward(params, dataset.features[rows])
    probs = softmax_rows(np.atleast_2d(logits))
    for sid, p in zip(sample_ids, probs):
        sink.append((epoch, int(sid), p.copy()))


def run_training(train_ds, test_ds, config, trace_ids=None):
    """Full training run over all epochs; returns (params, [EpochMetrics], trace)."""
    dims = [train_ds.dim] + list(config.hidden_dims) + [train_ds.num_classes]
    params = init_params(dims, config.seed_init)
    opt = init_optimizer(params, momentum=config.momentum,
                         weight_decay=config.weight_decay, lr=config.lr)
    store = PredictionStore(len(train_ds), train_ds.num_classes,
                            delta=config.delta, alpha=config.alpha)
    shuffle_rng = np.random.default_rng(config.seed_shuffle)
    trace = []
    history = []
    for epoch in range(1, config.epochs + 1):
        history.append(train_epoch(
            params, opt, store, train_ds, test_ds, config, epoch,
            shuffle_rng, trace_ids=trace_ids, trace_sink=trace))
    return params, history, trace
