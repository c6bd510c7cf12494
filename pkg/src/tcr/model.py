"""A small fully-connected classifier with manual forward/backward passes.

Hidden layers use rectified-linear activations, the final layer is linear
(logits). Gradients are computed by hand and checked against finite
differences in the test suite. The dense-layer inner loops go through the
selected kernel backend (compiled or NumPy, see tcr.kernels).
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, ContractError, ParseError, ShapeError


@dataclass
class ModelParams:
    """Per-layer weight matrices (out x in) and bias vectors."""

    dims: list
    weights: list
    biases: list
    version: int = 0  # bumped on every in-place update; guards stale caches

    @property
    def num_layers(self):
        return len(self.weights)


@dataclass
class OptimizerState:
    """SGD-with-momentum buffers, mirroring ModelParams shapes."""

    momentum: float
    weight_decay: float
    lr: float
    buf_weights: list = field(default_factory=list)
    buf_biases: list = field(default_factory=list)


@dataclass
class LrSchedule:
    """Step schedule: rate divided by `divisor` after each milestone epoch."""

    initial: float
    milestones: list = field(default_factory=list)  # [(epoch, divisor), ...]

    def __post_init__(self):
        epochs = [m[0] for m in self.milestones]
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise ConfigError(
                f"milestone epochs must be strictly increasing, got {epochs}"
            )


def init_params(dims, seed):
    """He-initialized weights (std sqrt(2/fan_in)), zero biases.

    Deterministic given the seed.
    """
    dims = list(dims)
    if len(dims) < 2 or any(int(d) <= 0 for d in dims):
        raise ConfigError(f"need >= 2 positive layer dims, got {dims}")
    dims = [int(d) for d in dims]
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        scale = np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return ModelParams(dims=dims, weights=weights, biases=biases)


def init_optimizer(params, momentum=0.9, weight_decay=1e-4, lr=0.1):
    state = OptimizerState(momentum=momentum, weight_decay=weight_decay, lr=lr)
    state.buf_weights = [np.zeros_like(W) for W in params.weights]
    state.buf_biases = [np.zeros_like(b) for b in params.biases]
    return state


def forward(params, x):
    """Compute logits h(x; theta) and the activation cache for backward.

    Accepts a single feature vector (d,) or a batch (n, d); logits match
    (c,) or (n, c) accordingly.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != params.dims[0]:
        raise ShapeError(
            f"input dim {x.shape[1]} != model input dim {params.dims[0]}"
        )
    a = np.ascontiguousarray(x)
    inputs = [a]  # input fed to each layer
    pres = []     # pre-activations of hidden layers
    last = params.num_layers - 1
    for li, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = kernels.linear_forward(a, np.ascontiguousarray(W),
                                   np.ascontiguousarray(b))
        if li < last:
            pres.append(z)
            a = kernels.relu(z)
            inputs.append(a)
        else:
            a = z
    cache = {"inputs": inputs, "pres": pres, "params": params,
             "version": params.version, "single": single}
    return (a[0] if single else a), cache


def backward(params, cache, grad_wrt_logits):
    """Parameter gradients for the supplied output-side gradient dL/dh.

    For batched input the returned gradients are summed over the batch
    (callers wanting the mean scale grad_wrt_logits by 1/n). Returns
    (grad_weights, grad_biases) lists matching the parameter shapes.
    """
    if cache.get("params") is not params or cache.get("version") != params.version:
        raise ContractError("backward called with a stale or foreign cache")
    g = np.asarray(grad_wrt_logits, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != (cache["inputs"][0].shape[0], params.dims[-1]):
        raise ShapeError(
            f"grad_wrt_logits shape {g.shape} incompatible with cache"
        )
    g = np.ascontiguousarray(g)
    grad_w = [None] * params.num_layers
    grad_b = [None] * params.num_layers
    for li in range(params.num_layers - 1, -1, -1):
        gW, gb, gx = kernels.linear_backward(
            g, cache["inputs"][li], np.ascontiguousarray(params.weights[li]))
        grad_w[li], grad_b[li] = gW, gb
        if li > 0:
            g = np.ascontiguousarray(
                kernels.relu_backward(gx, cache["pres"][li - 1]))
    return grad_w, grad_b


def sgd_step(params, state, grads):
    """In-place SGD-with-momentum update.

    buf <- momentum * buf + (grad + wd * param); param <- param - lr * buf.
    Weight decay is applied to weights only, not biases.
    """
    grad_w, grad_b = grads
    if len(grad_w) != params.num_layers or len(grad_b) != params.num_layers:
        raise ShapeError("gradient list lengths do not match the model")
    for li in range(params.num_layers):
        if grad_w[li].shape != params.weights[li].shape:
            raise ShapeError(f"weight grad shape mismatch at layer {li}")
        buf = state.buf_weights[li]
        buf *= state.momentum
        buf += grad_w[li] + state.weight_decay * params.weights[li]
        params.weights[li] -= state.lr * buf

        bbuf = state.buf_biases[li]
        bbuf *= state.momentum
        bbuf += grad_b[li]
        params.biases[li] -= state.lr * bbuf
    params.version += 1
    return params, state


def lr_at(schedule, epoch):
    """Learning rate in effect at a 1-based epoch.

    "Divided by 10 after epoch 80" means the decayed rate first applies at
    epoch 81, i.e. a milestone counts only when its epoch < current epoch.
    """
    rate = schedule.initial
    for milestone_epoch, divisor in schedule.milestones:
        if epoch > milestone_epoch:
            rate /= divisor
    return rate


# --- checkpoint serialization -------------------------------------------
# Flat binary record: little-endian uint32 count of layer dims, the dims
# themselves as uint32, then all weights and biases as float64 in layer
# order (W1, b1, W2, b2, ...).

def save_checkpoint(path, params):
    with open(path, "wb") as fh:
        header = np.array([len(params.dims)] + params.dims, dtype="<u4")
        header.tofile(fh)
        for W, b in zip(params.weights, params.biases):
            np.ascontiguousarray(W, dtype="<f8").tofile(fh)
            np.ascontiguousarray(b, dtype="<f8").tofile(fh)


def load_checkpoint(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise ParseError(f"checkpoint {path} too short for a header")
    (ndims,) = np.frombuffer(raw[:4], dtype="<u4")
    if ndims < 2 or len(raw) < 4 + 4 * ndims:
        raise ParseError(f"checkpoint {path} has a corrupt dims header")
    dims = [int(d) for d in np.frombuffer(raw[4:4 + 4 * ndims], dtype="<u4")]
    if any(d <= 0 for d in dims):
        raise ParseError(f"checkpoint {path} has non-positive layer dims")
    expected = sum(o * i + o for i, o in zip(dims[:-1], dims[1:]))
    body = np.frombuffer(raw[4 + 4 * ndims:], dtype="<f8")
    if body.size != expected:
        raise ParseError(
            f"checkpoint {path}: expected {expected} floats, got {body.size}"
        )
    weights, biases, pos = [], [], 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(body[pos:pos + fan_out * fan_in]
                       .reshape(fan_out, fan_in).copy())
        pos += fan_out * fan_in
        biases.append(body[pos:pos + fan_out].copy())
        pos += fan_out
    return ModelParams(dims=dims, weights=weights, biases=biases)
