"""Window-quality evaluators.

The main proxy is one-vs-rest ridge regression on the window's features,
scored by classification accuracy. Gradient matching scores and the
within/between class variability ratio are alternatives used for analysis.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .core import NumericalError, ScoredDataset, SubsetIndices, ValidationError


@dataclass(frozen=True)
class RegressionSolution:
    W: np.ndarray  # (d+1) x C, column c separates class c from the rest
    lam: float = 1.0
    window: object = None


@dataclass(frozen=True)
class GradientBundle:
    """Per-sample surrogate gradients, one row per dataset sample."""

    G: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.G, dtype=np.float64)
        if G.ndim != 2:
            raise ValidationError(f"gradients must be 2-D, got shape {G.shape}")
        if not np.isfinite(G).all():
            raise ValidationError("gradients contain non-finite entries")
        object.__setattr__(self, "G", G)


def solve_ridge(X_S, y_S, lam: float = 1.0, form: str = "auto") -> np.ndarray:
    """Minimize ``||y - X_S^T w||^2 + lam ||w||^2``.

    ``X_S`` holds one sample per column, shape (D, m). ``y_S`` may be a vector
    or an (m, C) matrix of targets that share one factorization. ``form``
    selects the primal ``(lam I_D + X X^T)^-1 X y`` or dual
    ``X (lam I_m + X^T X)^-1 y`` system; ``auto`` inverts in ``min(D, m)``.
    """
    X = np.asarray(X_S, dtype=np.float64)
    y = np.asarray(y_S, dtype=np.float64)
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if X.ndim != 2 or y.shape[0] != X.shape[1]:
        raise ValidationError(f"shape mismatch: X_S {X.shape}, y_S {y.shape}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValidationError("non-finite entry in ridge inputs")
    D, m = X.shape
    if form == "auto":
        form = "primal" if D <= m else "dual"
    try:
        if form == "primal":
            A = X @ X.T
            A.flat[::D + 1] += lam
            return linalg.cho_solve(linalg.cho_factor(A, lower=True), X @ y)
        if form == "dual":
            K = X.T @ X
            K.flat[::m + 1] += lam
            return X @ linalg.cho_solve(linalg.cho_factor(K, lower=True), y)
    except linalg.LinAlgError as exc:  # cannot happen for lam > 0 and finite input
        raise NumericalError(f"ridge factorization failed: {exc}") from exc
    raise ValueError(f"unknown form {form!r}")


def one_hot_targets(labels, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    return (labels[:, None] == np.arange(num_classes)[None, :]).astype(np.float64)


def fit_one_vs_rest(ds: ScoredDataset, subset: SubsetIndices, lam: float = 1.0,
                    window=None) -> RegressionSolution:
    """Fit all C binary (1 for the class, 0 otherwise) regressions on a window."""
    if ds.num_classes < 2:
        raise ValidationError("one-vs-rest needs at least two classes")
    subset.check(ds.n)
    idx = subset.indices
    X_S = ds.features[idx].T
    W = solve_ridge(X_S, one_hot_targets(ds.labels[idx], ds.num_classes), lam)
    return RegressionSolution(W, lam, window)


def predict(W: np.ndarray, features: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. ties go to the lowest class
    return np.argmax(features @ W, axis=1)


def proxy_accuracy(sol: RegressionSolution, ds: ScoredDataset, eval_indices) -> float:
    eval_indices = np.asarray(eval_indices, dtype=np.int64)
    if eval_indices.size == 0:
        raise ValidationError("evaluation set is empty")
    if eval_indices.min() < 0 or eval_indices.max() >= ds.n:
        raise ValidationError("evaluation index out of range")
    pred = predict(sol.W, ds.features[eval_indices])
    return float(np.mean(pred == ds.labels[eval_indices]))


def _grads(g) -> np.ndarray:
    return g.G if isinstance(g, GradientBundle) else np.asarray(g, dtype=np.float64)


def _mean_rows(G, idx, name):
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size == 0:
        raise ValidationError(f"{name} index set is empty")
    return G[idx].mean(axis=0)


def gradient_difference(g, full, subset) -> float:
    """Euclidean distance between mean gradients over ``full`` and ``subset``."""
    G = _grads(g)
    return float(np.linalg.norm(_mean_rows(G, full, "full") - _mean_rows(G, subset, "subset")))


def gradient_similarity(g, full, subset) -> float:
    """Cosine between summed gradients over ``full`` and ``subset``."""
    G = _grads(g)
    a = _mean_rows(G, full, "full")
    b = _mean_rows(G, subset, "subset")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise NumericalError("gradient similarity undefined for a zero mean gradient")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def pinv_sym(A: np.ndarray, rcond: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse via SVD, dropping singular values below rcond * max."""
    U, s, Vt = np.linalg.svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros_like(A.T)
    keep = s > rcond * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def neural_collapse_metric(features, labels) -> float:
    """``tr(Sigma_W pinv(Sigma_B))`` for features without the bias column.

    Lower values mean tighter class clusters relative to class separation.
    """
    F = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        warnings.warn("only one class present; between-class covariance is zero, metric set to 0",
                      stacklevel=2)
        return 0.0
    means = np.stack([F[labels == k].mean(axis=0) for k in classes])
    centered = F - means[np.searchsorted(classes, labels)]
    sigma_w = centered.T @ centered / F.shape[0]
    dev = means - means.mean(axis=0)
    sigma_b = dev.T @ dev / classes.size
    return float(np.trace(sigma_w @ pinv_sym(sigma_b)))
