"""Deterministic synthetic datasets and the on-disk dataset format.

File format (human-inspectable, diff-friendly):

    # tcr-dataset v1, n=<n>, d=<d>, c=<c>, mask=<0|1>
    id,label[,mask],f1,...,fd

Floats are written with repr() so a load(save(d)) round-trip is bit-exact.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError, ParseError


@dataclass
class Dataset:
    """Feature matrix, integer labels, optional corruption mask, stable ids."""

    features: np.ndarray          # (n, d) float64
    labels: np.ndarray            # (n,) int64 in [0, num_classes)
    num_classes: int
    ids: np.ndarray               # (n,) int64, stable sample identifiers
    mask: Optional[np.ndarray] = None  # (n,) bool, True where corrupted

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
        n = len(self.features)
        if len(self.labels) != n or len(self.ids) != n:
            raise DataError("features, labels and ids lengths differ")
        if self.mask is not None and len(self.mask) != n:
            raise DataError("mask length differs from features")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DataError("labels out of range [0, num_classes)")

    def __len__(self):
        return len(self.features)

    @property
    def dim(self):
        return self.features.shape[1]


def _simplex_vertices(c):
    """c unit-norm, pairwise-equidistant points in R^(c-1)."""
    corners = np.eye(c) - 1.0 / c
    # orthonormal basis of the sum-zero subspace
    basis = np.linalg.svd(corners)[2][: c - 1]
    verts = corners @ basis.T
    return verts / np.linalg.norm(verts, axis=1, keepdims=True)


def gaussian_blobs(c, per_class, dim, spread, seed, radius=1.0):
    """c isotropic Gaussian clusters with well-separated seeded centers.

    Centers are the vertices of a regular simplex (or an even circle when
    dim < c-1) scaled to `radius`, embedded along a seeded random
    orthonormal basis so the layout differs between seeds.
    """
    if c < 2 or per_class < 1 or spread <= 0 or dim < 2:
        raise ConfigError(
            f"invalid blob parameters c={c} per_class={per_class} "
            f"dim={dim} spread={spread}"
        )
    rng = np.random.default_rng(seed)
    if dim >= c - 1:
        layout = _simplex_vertices(c)              # (c, c-1)
    else:
        angles = 2 * np.pi * np.arange(c) / c + rng.uniform(0, 2 * np.pi)
        layout = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (c, 2)
    k = layout.shape[1]
    basis = np.linalg.qr(rng.normal(size=(dim, k)))[0]  # (dim, k)
    centers = radius * layout @ basis.T

    n = c * per_class
    labels = np.repeat(np.arange(c), per_class)
    features = centers[labels] + spread * rng.normal(size=(n, dim))
    return Dataset(features=features, labels=labels, num_classes=c,
                   ids=np.arange(n))


def split(dataset, test_fraction, seed):
    """Seeded stratified split preserving per-class proportions within +/-1."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_rows = []
    for cls in range(dataset.num_classes):
        rows = np.flatnonzero(dataset.labels == cls)
        if len(rows) < 2:
            raise DataError(f"class {cls} has fewer than 2 samples")
        take = int(round(test_fraction * len(rows)))
        test_rows.append(rng.permutation(rows)[:take])
    test_rows = np.sort(np.concatenate(test_rows))
    in_test = np.zeros(len(dataset), dtype=bool)
    in_test[test_rows] = True
    return _take(dataset, ~in_test), _take(dataset, in_test)


def _take(dataset, rows):
    return Dataset(
        features=dataset.features[rows].copy(),
        labels=dataset.labels[rows].copy(),
        num_classes=dataset.num_classes,
        ids=dataset.ids[rows].copy(),
        mask=None if dataset.mask is None else dataset.mask[rows].copy(),
    )


def save(path, dataset):
    has_mask = dataset.mask is not None
    with open(path, "w") as fh:
        fh.write(
            f"# tcr-dataset v1, n={len(dataset)}, d={dataset.dim}, "
            f"c={dataset.num_classes}, mask={int(has_mask)}\n"
        )
        for i in range(len(dataset)):
            cols = [str(int(dataset.ids[i])), str(int(dataset.labels[i]))]
            if has_mask:
                cols.append(str(int(dataset.mask[i])))
            cols.extend(repr(float(v)) for v in dataset.features[i])
            fh.write(",".join(cols) + "\n")


def load(path):
    with open(path) as fh:
        header = fh.readline()
        if not header:
            raise DataError(f"{path} is empty")
        if not header.startswith("# tcr-dataset v1"):
            raise ParseError(f"{path}: unrecognized header {header!r}", line=1)
        try:
            fields = dict(
                part.strip().split("=")
                for part in header.split(",")[1:]
            )
            n, d, c = int(fields["n"]), int(fields["d"]), int(fields["c"])
            has_mask = bool(int(fields["mask"]))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{path}: bad header fields ({exc})", line=1)

        ids = np.empty(n, dtype=np.int64)
        labels = np.empty(n, dtype=np.int64)
        mask = np.empty(n, dtype=bool) if has_mask else None
        features = np.empty((n, d))
        expected_cols = 2 + int(has_mask) + d
        for i in range(n):
            lineno = i + 2
            line = fh.readline()
            if not line:
                raise ParseError(f"{path}: expected {n} rows, file ended",
                                 line=lineno)
            cols = line.rstrip("\n").split(",")
            if len(cols) != expected_cols:
                raise ParseError(
                    f"{path}: expected {expected_cols} columns, got {len(cols)}",
                    line=lineno)
            try:
                ids[i] = int(cols[0])
                labels[i] = int(cols[1])
                if has_mask:
                    mask[i] = bool(int(cols[2]))
                features[i] = [float(v) for v in cols[2 + int(has_mask):]]
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", line=lineno)
            if not 0 <= labels[i] < c:
                raise ParseError(
                    f"{path}: label {labels[i]} out of range [0, {c})",
                    line=lineno)
        if fh.readline():
            raise ParseError(f"{path}: trailing data after {n} rows",
                             line=n + 2)
    return Dataset(features=features, labels=labels, num_classes=c,
                   ids=ids, mask=mask)
