"""Domain types shared by every other module.

Arrays held by these types are made read-only on construction so a dataset
can be handed to a worker pool without copying.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when input data violates a structural invariant."""


class NumericalError(ArithmeticError):
    """A computation is undefined or numerically singular for its inputs."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def sort_by_score(scores) -> np.ndarray:
    """Permutation ordering samples from hardest (highest score) to easiest.

    Equal scores keep ascending original-index order.
    """
    scores = np.asarray(scores, dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(scores))
    if bad.size:
        raise ValidationError(f"non-finite score at index {int(bad[0])}")
    # stable sort on the negated key keeps ties in index order
    return np.argsort(-scores, kind="stable")


def append_bias(features) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValidationError(f"features must be 2-D, got shape {features.shape}")
    return np.hstack([features, np.ones((features.shape[0], 1))])


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int | None = None
    message: str = ""


@dataclass(frozen=True)
class ScoredDataset:
    """Features (bias column last), labels in ``[0, num_classes)`` and scores.

    ``order`` is the descending-difficulty permutation; ``order[0]`` is the
    hardest sample.
    """

    features: np.ndarray
    labels: np.ndarray
    scores: np.ndarray
    num_classes: int
    order: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen(np.asarray(self.features, dtype=np.float64)))
        object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, dtype=np.int64)))
        object.__setattr__(self, "scores", _frozen(np.asarray(self.scores, dtype=np.float64)))
        object.__setattr__(self, "num_classes", int(self.num_classes))
        if self.order is None:
            # unsortable scores are left for validate_dataset to report
            finite = np.isfinite(self.scores).all()
            order = sort_by_score(self.scores) if finite else np.arange(self.scores.size)
        else:
            order = np.asarray(self.order, dtype=np.int64)
        object.__setattr__(self, "order", _frozen(order))

    @classmethod
    def from_arrays(cls, features, labels, scores, num_classes=None, add_bias=True,
                    validate=True) -> "ScoredDataset":
        """Build a dataset, appending the bias column unless ``add_bias`` is off."""
        labels = np.asarray(labels, dtype=np.int64)
        if num_classes is None:
            num_classes = int(labels.max()) + 1 if labels.size else 0
        feats = append_bias(features) if add_bias else np.asarray(features, dtype=np.float64)
        ds = cls(feats, labels, scores, num_classes)
        if validate:
            problems = validate_dataset(ds)
            if problems:
                raise ValidationError("; ".join(p.message for p in problems))
        return ds

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        """Feature dimension including the bias coordinate."""
        return self.features.shape[1]

    def rank_of(self) -> np.ndarray:
        """Inverse of ``order``: rank (0 = hardest) of each original index."""
        ranks = np.empty(self.n, dtype=np.int64)
        ranks[self.order] = np.arange(self.n)
        return ranks


@dataclass(frozen=True)
class SubsetIndices:
    """Original-dataset indices of a selected subset, in selection order."""

    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", _frozen(np.asarray(self.indices, dtype=np.int64).ravel()))

    @property
    def m(self) -> int:
        return int(self.indices.size)

    def check(self, n: int) -> None:
        idx = self.indices
        if idx.size == 0:
            raise ValidationError("subset is empty")
        if idx.min() < 0 or idx.max() >= n:
            raise ValidationError(f"subset index out of range [0, {n})")
        if np.unique(idx).size != idx.size:
            raise ValidationError("subset contains duplicate indices")

    def as_set(self) -> set[int]:
        return set(int(i) for i in self.indices)


def validate_dataset(ds: ScoredDataset) -> list[Violation]:
    """Return every invariant violation found; an empty list means ok."""
    out: list[Violation] = []
    f, y, s = ds.features, ds.labels, ds.scores
    if f.ndim != 2:
        return [Violation("shape", None, f"features must be 2-D, got {f.shape}")]
    n = f.shape[0]
    if n < 1:
        out.append(Violation("shape", None, "dataset has no samples"))
    if f.shape[1] < 2:
        out.append(Violation("shape", None, f"feature dimension {f.shape[1]} < 2 (bias included)"))
    if y.shape != (n,):
        out.append(Violation("length", None, f"labels length {y.size} != n={n}"))
    if s.shape != (n,):
        out.append(Violation("length", None, f"scores length {s.size} != n={n}"))
    for row in np.flatnonzero(~np.isfinite(f).all(axis=1)) if f.size else []:
        out.append(Violation("non-finite", int(row), f"non-finite feature in row {row}"))
    if f.shape[1] >= 1 and n:
        for row in np.flatnonzero(f[:, -1] != 1.0):
            out.append(Violation("bias", int(row), f"bias coordinate != 1 in row {row}"))
    for i in np.flatnonzero(~np.isfinite(s)):
        out.append(Violation("non-finite", int(i), f"non-finite score at index {i}"))
    if ds.num_classes < 1:
        out.append(Violation("label-range", None, "num_classes must be positive"))
    for i in np.flatnonzero((y < 0) | (y >= ds.num_classes)):
        out.append(Violation("label-range", int(i),
                             f"label {y[i]} at index {i} outside [0, {ds.num_classes})"))
    order = ds.order
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        out.append(Violation("order", None, "order is not a permutation of [0, n)"))
    elif n > 1 and np.all(np.isfinite(s)) and np.any(np.diff(s[order]) > 0):
        out.append(Violation("order", None, "order is not descending by score"))
    return out
