"""Label-noise transition matrices and dataset corruption.

Supported noise kinds: uniform (symmetric), asymmetric (pairwise flips),
and open-set (feature substitution from an out-of-distribution pool).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import ConfigError, DataError

ROW_SUM_TOL = 1e-9


@dataclass
class NoiseSpec:
    """Which corruption to apply and how strongly."""

    kind: str                 # uniform | asymmetric | open-set
    eta: float
    pairing: Optional[dict] = None  # asymmetric only: {source: target}
    seed: int = 0
    ood_params: dict = field(default_factory=dict)  # open-set generator overrides

    def __post_init__(self):
        if self.kind not in ("uniform", "asymmetric", "open-set"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"noise rate must be in [0, 1], got {self.eta}")
        if self.pairing is not None and any(
                j == k for j, k in self.pairing.items()):
            raise ConfigError("asymmetric pairing may not map a class to itself")


def uniform_transition(eta, c):
    """Row-stochastic matrix: 1-eta on the diagonal, eta/(c-1) elsewhere."""
    if c < 2:
        raise ConfigError(f"need at least 2 classes, got {c}")
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"noise rate must be in [0, 1], got {eta}")
    T = np.full((c, c), eta / (c - 1))
    np.fill_diagonal(T, 1.0 - eta)
    return T


def asymmetric_transition(eta, pairing, c):
    """Pairwise flips: each paired class j->k keeps 1-eta, flips eta to k.

    Unpaired classes get identity rows. The pairing must map each source
    class to a single distinct target class.
    """
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"noise rate must be in [0, 1], got {eta}")
    T = np.eye(c)
    for j, k in pairing.items():
        if j == k:
            raise ConfigError(f"pairing maps class {j} to itself")
        if not (0 <= j < c and 0 <= k < c):
            raise ConfigError(f"pairing {j}->{k} out of range for c={c}")
        T[j, j] = 1.0 - eta
        T[j, k] = eta
    return T


def cyclic_pairing(c, classes=None):
    """Default desk-scale pairing: j -> (j+1) mod c over the given classes."""
    classes = range(c) if classes is None else classes
    return {j: (j + 1) % c for j in classes}


def inject_noise(labels, T, seed):
    """Resample each label from its row of T with the seeded generator.

    Returns (noisy_labels, mask) where mask is True exactly where the label
    changed.
    """
    labels = np.asarray(labels, dtype=np.int64)
    c = T.shape[0]
    if T.shape != (c, c) or np.any(np.abs(T.sum(axis=1) - 1.0) > ROW_SUM_TOL):
        raise ConfigError("transition matrix must be square and row-stochastic")
    if len(labels) and (labels.min() < 0 or labels.max() >= c):
        raise DataError("labels out of range for the transition matrix")
    rng = np.random.default_rng(seed)
    u = rng.random(len(labels))
    cum = np.cumsum(T, axis=1)
    cum[:, -1] = 1.0  # guard against rounding in the last column
    noisy = (u[:, None] > cum[labels]).sum(axis=1).astype(np.int64)
    return noisy, noisy != labels


def openset_mix(inset, oodset, eta, seed):
    """Replace an eta-fraction of in-set FEATURES with out-of-set features.

    The original in-set labels are kept (in-set labels attached to
    out-of-set content). Replacement rows are chosen without repetition
    from both sides. Returns (mixed Dataset, mask of replaced samples).
    """
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"noise rate must be in [0, 1], got {eta}")
    if oodset.dim != inset.dim:
        raise ConfigError(
            f"out-of-distribution dim {oodset.dim} != in-set dim {inset.dim}")
    n = len(inset)
    k = int(round(eta * n))
    if len(oodset) < k:
        raise ConfigError(
            f"need {k} out-of-distribution samples, have {len(oodset)}")
    rng = np.random.default_rng(seed)
    targets = rng.choice(n, size=k, replace=False)
    sources = rng.choice(len(oodset), size=k, replace=False)
    features = inset.features.copy()
    features[targets] = oodset.features[sources]
    mask = np.zeros(n, dtype=bool)
    mask[targets] = True
    mixed = Dataset(features=features, labels=inset.labels.copy(),
                    num_classes=inset.num_classes, ids=inset.ids.copy(),
                    mask=mask)
    return mixed, mask


def corrupt(dataset, spec, oodset=None):
    """Apply a NoiseSpec to a clean dataset; returns a new Dataset with mask."""
    if spec.kind == "uniform":
        T = uniform_transition(spec.eta, dataset.num_classes)
    elif spec.kind == "asymmetric":
        pairing = spec.pairing or cyclic_pairing(dataset.num_classes)
        T = asymmetric_transition(spec.eta, pairing, dataset.num_classes)
    else:
        if oodset is None:
            raise ConfigError("open-set noise needs an out-of-distribution set")
        mixed, _ = openset_mix(dataset, oodset, spec.eta, spec.seed)
        return mixed
    noisy, mask = inject_noise(dataset.labels, T, spec.seed)
    return Dataset(features=dataset.features.copy(), labels=noisy,
                   num_classes=dataset.num_classes, ids=dataset.ids.copy(),
                   mask=mask)
