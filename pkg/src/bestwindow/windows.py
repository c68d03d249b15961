"""Candidate subset generators over the hardest-to-easiest ordering."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ScoredDataset, SubsetIndices, ValidationError


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def ceil_tol(x: float) -> int:
    """Ceiling that ignores floating error below 1e-9 (so 1.0000000000001*m -> m)."""
    return int(math.ceil(round(x, 9)))


@dataclass(frozen=True)
class WindowSpec:
    """One candidate subset.

    ``start`` is always a rank offset into the sorted order. For ``per_class``
    windows the fractional start used per class is ``start / n``.
    """

    kind: str
    start: int
    m: int
    second_start: int | None = None
    factor: float | None = None
    seed: int | None = None


def window_grid(n: int, m: int, t: int, include_tail: bool = False) -> list[int]:
    """Start indices ``0, t, 2t, ..., floor((n-m)/t)*t``, optionally plus ``n-m``."""
    if t < 1:
        raise ValidationError(f"step must be >= 1, got {t}")
    if m < 1 or m > n:
        raise ValidationError(f"window size m={m} must satisfy 1 <= m <= n={n}")
    grid = list(range(0, (n - m) // t * t + 1, t))
    if include_tail and grid[-1] != n - m:
        grid.append(n - m)
    return grid


def contiguous_window(ds: ScoredDataset, k: int, m: int) -> SubsetIndices:
    """Samples ranked ``k`` through ``k+m-1`` (0 = hardest)."""
    if m < 1 or k < 0 or k + m > ds.n:
        raise ValidationError(f"window [{k}, {k + m}) outside [0, {ds.n})")
    return SubsetIndices(ds.order[k:k + m])


def class_quotas(class_sizes, m: int) -> np.ndarray:
    """Largest-remainder apportionment of ``m`` proportional to ``class_sizes``.

    Equal remainders go to the lower class index. Integer arithmetic only.
    """
    sizes = np.asarray(class_sizes, dtype=np.int64)
    n = int(sizes.sum())
    if n <= 0:
        raise ValidationError("class sizes must sum to a positive count")
    base = (m * sizes) // n
    rem = (m * sizes) % n
    left = m - int(base.sum())
    # sort by remainder descending, class index ascending
    ranked = sorted(range(sizes.size), key=lambda c: (-rem[c], c))
    for c in ranked[:left]:
        base[c] += 1
    return base


def per_class_window(ds: ScoredDataset, s: float, w: float) -> SubsetIndices:
    """Class-proportional window: within each class take a contiguous block of
    the class's own difficulty ordering starting at ``round(s * n_c)``.

    Blocks that would run past the easy end are shifted back and a warning is
    issued.
    """
    if not (0.0 <= s <= 1.0) or not (0.0 < w <= 1.0) or s + w > 1.0 + 1e-12:
        raise ValidationError(f"need 0 <= s, 0 < w, s + w <= 1 (s={s}, w={w})")
    m = round_half_up(w * ds.n)
    if m < 1:
        raise ValidationError(f"w={w} selects no samples out of n={ds.n}")
    ranked_labels = ds.labels[ds.order]
    sizes = np.bincount(ds.labels, minlength=ds.num_classes)
    empty = np.flatnonzero(sizes == 0)
    if empty.size:
        raise ValidationError(f"class {int(empty[0])} has no samples")
    quotas = class_quotas(sizes, m)
    picked = []
    for c in range(ds.num_classes):
        members = ds.order[ranked_labels == c]
        n_c, m_c = int(sizes[c]), int(quotas[c])
        start = round_half_up(s * n_c)
        if start + m_c > n_c:
            warnings.warn(f"class {c}: block [{start}, {start + m_c}) exceeds {n_c} samples, "
                          f"shifted to start {n_c - m_c}", stacklevel=2)
            start = n_c - m_c
        picked.append(members[start:start + m_c])
    idx = np.concatenate(picked)
    ranks = ds.rank_of()
    return SubsetIndices(idx[np.argsort(ranks[idx], kind="stable")])


def two_half_windows(ds: ScoredDataset, x1: int, x2: int, m: int) -> SubsetIndices:
    """Union of rank slices ``[x1, x1 + m//2)`` and ``[x2, x2 + m - m//2)``."""
    h = m // 2
    if m < 2:
        raise ValidationError("two-half windows need m >= 2")
    if x1 < 0 or x2 + (m - h) > ds.n:
        raise ValidationError(f"half-windows ({x1}, {x2}) with m={m} fall outside [0, {ds.n})")
    if x2 < x1 + h:
        raise ValidationError(f"half-windows overlap: x2={x2} < x1 + {h}")
    return SubsetIndices(np.concatenate([ds.order[x1:x1 + h], ds.order[x2:x2 + m - h]]))


def window_rng(seed: int, start: int) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, start)``; independent of call order."""
    key = np.array([seed, start], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def wider_window_sample(ds: ScoredDataset, s: int, m: int, c: float, seed: int = 0) -> SubsetIndices:
    """``m`` samples drawn without replacement from rank slice ``[s, s + ceil(c*m))``."""
    if c < 1.0:
        raise ValidationError(f"widening factor must be >= 1, got {c}")
    width = ceil_tol(c * m)
    if s < 0 or m < 1 or s + width > ds.n:
        raise ValidationError(f"wider window [{s}, {s + width}) outside [0, {ds.n})")
    pick = window_rng(seed, s).choice(width, size=m, replace=False)
    return SubsetIndices(ds.order[s + np.sort(pick)])


def two_half_grid(n: int, m: int, t: int) -> list[tuple[int, int]]:
    """All ``(x1, x2)`` with ``x1`` on the step grid and ``x2 = x1 + m//2 + j*t``."""
    h = m // 2
    pairs = []
    for x1 in window_grid(n, m, t):
        x2 = x1 + h
        while x2 + (m - h) <= n:
            pairs.append((x1, x2))
            x2 += t
    return pairs


def materialize(ds: ScoredDataset, spec: WindowSpec) -> SubsetIndices:
    if spec.kind == "contiguous":
        return contiguous_window(ds, spec.start, spec.m)
    if spec.kind == "per_class":
        return per_class_window(ds, spec.start / ds.n, spec.m / ds.n)
    if spec.kind == "two_half":
        return two_half_windows(ds, spec.start, spec.second_start, spec.m)
    if spec.kind == "wider_random":
        return wider_window_sample(ds, spec.start, spec.m, spec.factor, spec.seed)
    raise ValueError(f"unknown window kind {spec.kind!r}")
