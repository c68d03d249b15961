import numpy as np
import pytest

from bestwindow.core import ScoredDataset


def gauss_solve(A, b):
    """Dense Gaussian elimination with partial pivoting, pure Python."""
    n = len(A)
    M = [list(map(float, A[i])) + [float(b[i])] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            for c in range(col, n + 1):
                M[r][c] -= f * M[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        x[r] = (M[r][n] - sum(M[r][c] * x[c] for c in range(r + 1, n))) / M[r][r]
    return x


def naive_ridge(X, y, lam):
    """Normal equations (lam I + X X^T) w = X y, formed with explicit loops."""
    D, m = len(X), len(X[0])
    A = [[sum(X[i][k] * X[j][k] for k in range(m)) + (lam if i == j else 0.0)
          for j in range(D)] for i in range(D)]
    b = [sum(X[i][k] * y[k] for k in range(m)) for i in range(D)]
    return np.array(gauss_solve(A, b))


def naive_accuracy(W, features, labels, idx):
    hits = 0
    for i in idx:
        best_c, best_v = 0, None
        for c in range(W.shape[1]):
            v = sum(W[j, c] * features[i, j] for j in range(W.shape[0]))
            if best_v is None or v > best_v:
                best_c, best_v = c, v
        hits += best_c == labels[i]
    return hits / len(idx)


def planted_arrays(seed=0, n=500, d=16, C=4, band=(150, 350), strength=3.0):
    """Class signal only for samples ranked inside ``band``; pure noise elsewhere.

    Scores are a random permutation of n distinct values so that rank order is
    not the row order. Returns raw (features, labels, scores, C).
    """
    rng = np.random.default_rng(seed)
    rank_scores = np.linspace(1.0, 0.0, n)  # rank r has score rank_scores[r]
    perm = rng.permutation(n)              # row perm[r] holds rank r
    labels = rng.integers(0, C, n)
    feats = rng.standard_normal((n, d))
    centers = strength * np.eye(C, d)
    ranks = np.empty(n, dtype=int)
    ranks[perm] = np.arange(n)
    in_band = (ranks >= band[0]) & (ranks < band[1])
    feats[in_band] += centers[labels[in_band]]
    return feats, labels, rank_scores[ranks], C


def planted_dataset(**kw):
    feats, labels, scores, C = planted_arrays(**kw)
    return ScoredDataset.from_arrays(feats, labels, scores, num_classes=C)


def noisy_arrays(seed, n=500, d=16, C=4, frac=0.2):
    """Signal weakens toward the hard end; the hardest ``frac`` get random labels.

    Returns raw arrays plus the set of corrupted rows.
    """
    rng = np.random.default_rng(seed)
    ranks = rng.permutation(n)
    true = rng.integers(0, C, n)
    strength = 0.5 + 2.5 * ranks / n
    X = rng.standard_normal((n, d)) + strength[:, None] * np.eye(C, d)[true]
    labels = true.copy()
    corrupt = np.flatnonzero(ranks < int(frac * n))
    labels[corrupt] = rng.integers(0, C, corrupt.size)
    return X, labels, 1.0 - ranks / n, C, set(corrupt.tolist())


def noisy_dataset(seed, **kw):
    X, labels, scores, C, corrupt = noisy_arrays(seed, **kw)
    return ScoredDataset.from_arrays(X, labels, scores, num_classes=C), corrupt


@pytest.fixture
def planted():
    return planted_dataset()


@pytest.fixture
def small_ds():
    feats = np.array([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [-1.0, 0.5]])
    return ScoredDataset.from_arrays(feats, [0, 1, 1, 0], [0.1, 0.9, 0.5, 0.3], num_classes=2)
