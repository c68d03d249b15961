import itertools
from fractions import Fraction
from math import floor

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bestwindow.core import ScoredDataset, ValidationError
from bestwindow.windows import (class_quotas, contiguous_window, per_class_window,
                                two_half_grid, two_half_windows, wider_window_sample,
                                window_grid)


def ds_from_scores(scores, labels=None, C=2):
    n = len(scores)
    labels = np.arange(n) % C if labels is None else labels
    return ScoredDataset.from_arrays(np.zeros((n, 1)), labels, scores, num_classes=C)


def test_grid_basic():
    assert window_grid(10, 4, 2) == [0, 2, 4, 6]


def test_grid_full_dataset():
    assert window_grid(100, 100, 5) == [0]


def test_grid_tail():
    assert window_grid(7, 3, 3, include_tail=True) == [0, 3, 4]
    assert window_grid(7, 3, 3) == [0, 3]
    assert window_grid(10, 4, 2, include_tail=True) == [0, 2, 4, 6]


@pytest.mark.parametrize("args", [(5, 6, 1), (5, 2, 0), (5, 0, 1)])
def test_grid_errors(args):
    with pytest.raises(ValidationError):
        window_grid(*args)


@given(st.integers(1, 200), st.data())
def test_grid_matches_loop_bound(n, data):
    m = data.draw(st.integers(1, n))
    t = data.draw(st.integers(1, n + 3))
    grid = window_grid(n, m, t)
    assert grid == [k * t for k in range((n - m) // t + 1)]
    assert grid[-1] + m <= n


def test_contiguous_examples():
    ds = ds_from_scores([0.1, 0.9, 0.5, 0.3])
    assert contiguous_window(ds, 0, 2).indices.tolist() == [1, 2]
    assert contiguous_window(ds, 2, 2).indices.tolist() == [3, 0]
    with pytest.raises(ValidationError):
        contiguous_window(ds, 3, 2)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.data())
def test_contiguous_is_sorted_block(scores, data):
    ds = ds_from_scores(scores)
    n = len(scores)
    m = data.draw(st.integers(1, n))
    k = data.draw(st.integers(0, n - m))
    got = contiguous_window(ds, k, m).indices
    # oracle: decorate-sort-slice
    ranked = [i for _, i in sorted((-s, i) for i, s in enumerate(scores))]
    assert got.tolist() == ranked[k:k + m]


@given(st.integers(2, 40), st.data())
def test_contiguous_adjacent_disjoint(n, data):
    ds = ds_from_scores(np.random.default_rng(n).random(n))
    m = data.draw(st.integers(1, n - 1))
    k = data.draw(st.integers(0, n - m - 1))
    m2 = data.draw(st.integers(1, n - k - m))
    a = contiguous_window(ds, k, m).as_set()
    b = contiguous_window(ds, k + m, m2).as_set()
    assert not a & b


@given(st.lists(st.floats(0, 1), min_size=3, max_size=30, unique=True), st.randoms(), st.data())
def test_window_invariant_to_row_order(scores, rnd, data):
    n = len(scores)
    m = data.draw(st.integers(1, n))
    k = data.draw(st.integers(0, n - m))
    perm = list(range(n))
    rnd.shuffle(perm)
    a = {scores[i] for i in contiguous_window(ds_from_scores(scores), k, m).indices}
    shuffled = [scores[p] for p in perm]
    b = {shuffled[i] for i in contiguous_window(ds_from_scores(shuffled), k, m).indices}
    assert a == b


def _enumerate_quotas(sizes, m):
    """Oracle: among all vectors summing to m, keep those within 1 of the exact
    share with floor(share) <= q, then pick largest-remainder order."""
    n = sum(sizes)
    shares = [Fraction(m * s, n) for s in sizes]
    feasible = [q for q in itertools.product(*[range(s + 1) for s in sizes])
                if sum(q) == m and all(floor(sh) <= qi <= floor(sh) + 1
                                       for qi, sh in zip(q, shares))]
    # the winner gives the extra units to the largest remainders, lower index first
    def key(q):
        bumped = [i for i, (qi, sh) in enumerate(zip(q, shares)) if qi > floor(sh)]
        return sorted((-(shares[i] - floor(shares[i])), i) for i in bumped)
    return list(min(feasible, key=key))


def test_quotas_examples():
    assert class_quotas([3, 7], 5).tolist() == [2, 3]
    assert _enumerate_quotas([3, 7], 5) == [2, 3]
    assert class_quotas([10, 10], 4).tolist() == [2, 2]


@given(st.lists(st.integers(1, 6), min_size=1, max_size=4), st.data())
def test_quotas_match_enumeration(sizes, data):
    m = data.draw(st.integers(1, sum(sizes)))
    q = class_quotas(sizes, m)
    assert q.sum() == m
    assert q.tolist() == _enumerate_quotas(sizes, m)
    n = sum(sizes)
    for qc, nc in zip(q, sizes):
        assert abs(qc / m - nc / n) <= 1 / m + 1e-12


def test_per_class_symmetric():
    labels = np.repeat([0, 1], 10)
    scores = np.random.default_rng(1).random(20)
    ds = ds_from_scores(scores, labels)
    sub = per_class_window(ds, 0.0, 0.2)
    assert sub.m == 4
    for c in (0, 1):
        members = np.flatnonzero(labels == c)
        hardest = members[np.argsort(-scores[members])][:2]
        assert set(hardest) <= sub.as_set()


def test_per_class_unequal_sizes():
    labels = np.array([0] * 3 + [1] * 7)
    ds = ds_from_scores(np.linspace(1, 0, 10), labels)
    sub = per_class_window(ds, 0.0, 0.5)
    got = np.bincount(ds.labels[sub.indices], minlength=2)
    assert got.tolist() == [2, 3]


def test_per_class_single_class_equals_contiguous():
    scores = np.random.default_rng(5).random(20)
    ds = ds_from_scores(scores, np.zeros(20, int), C=1)
    assert per_class_window(ds, 0.3, 0.25).indices.tolist() == \
        contiguous_window(ds, 6, 5).indices.tolist()


def test_per_class_empty_class():
    ds = ScoredDataset.from_arrays(np.zeros((4, 1)), [0, 0, 2, 2], [1, 2, 3, 4], num_classes=3)
    with pytest.raises(ValidationError, match="class 1"):
        per_class_window(ds, 0.0, 0.5)


def test_per_class_clamps_with_warning():
    labels = np.array([0] * 3 + [1] * 7)
    ds = ds_from_scores(np.linspace(1, 0, 10), labels)
    with pytest.warns(UserWarning, match="shifted"):
        sub = per_class_window(ds, 0.5, 0.5)
    assert sub.m == 5


def test_two_half_adjacent_equals_contiguous():
    ds = ds_from_scores(np.random.default_rng(2).random(10))
    assert two_half_windows(ds, 2, 4, 4).as_set() == contiguous_window(ds, 2, 4).as_set()


def test_two_half_extremes():
    ds = ds_from_scores(np.linspace(1, 0, 10))
    assert two_half_windows(ds, 0, 8, 4).indices.tolist() == [0, 1, 8, 9]


def test_two_half_errors():
    ds = ds_from_scores(np.linspace(1, 0, 10))
    with pytest.raises(ValidationError, match="overlap"):
        two_half_windows(ds, 2, 3, 4)
    with pytest.raises(ValidationError):
        two_half_windows(ds, 0, 9, 4)


def test_two_half_exhaustive_small():
    for n in range(2, 13):
        ds = ds_from_scores(np.random.default_rng(n).random(n))
        for m in range(2, n + 1):
            h = m // 2
            for x1 in range(n):
                for x2 in range(x1 + h, n):
                    if x2 + m - h > n:
                        continue
                    sub = two_half_windows(ds, x1, x2, m)
                    a = set(ds.order[x1:x1 + h].tolist())
                    b = set(ds.order[x2:x2 + m - h].tolist())
                    assert not a & b and sub.as_set() == a | b and sub.m == m


def test_two_half_grid_count():
    # combinatorial oracle: x1 on the step grid, x2 in x1 + h + step * j
    n, m, t = 40, 8, 4
    h = m // 2
    expect = sum(1 for x1 in range(0, n - m + 1, t)
                 for x2 in range(x1 + h, n - (m - h) + 1, t))
    assert expect == 45
    assert len(two_half_grid(n, m, t)) == expect


def test_wider_unit_factor_is_contiguous():
    ds = ds_from_scores(np.random.default_rng(4).random(20))
    for seed in range(5):
        assert wider_window_sample(ds, 3, 5, 1.0 + 1e-12, seed).as_set() == \
            contiguous_window(ds, 3, 5).as_set()


def test_wider_deterministic():
    ds = ds_from_scores(np.random.default_rng(4).random(20))
    a = wider_window_sample(ds, 0, 5, 2.0, 7)
    b = wider_window_sample(ds, 0, 5, 2.0, 7)
    assert a.indices.tolist() == b.indices.tolist()
    assert a.m == 5 and len(a.as_set()) == 5
    assert a.as_set() <= set(ds.order[:10].tolist())


def test_wider_range_error():
    ds = ds_from_scores(np.random.default_rng(4).random(20))
    with pytest.raises(ValidationError):
        wider_window_sample(ds, 12, 5, 2.0, 0)


def test_wider_uniform_frequencies():
    ds = ds_from_scores(np.linspace(1, 0, 20))
    m, trials = 5, 10_000
    counts = np.zeros(20)
    for seed in range(trials):
        counts[wider_window_sample(ds, 0, m, 2.0, seed).indices] += 1
    freq = counts[:2 * m] / trials
    assert np.all(np.abs(freq - 0.5) <= 0.02)
    assert counts[2 * m:].sum() == 0


@settings(max_examples=50)
@given(st.integers(0, 2**63), st.integers(0, 10))
def test_wider_valid_subset(seed, s):
    ds = ds_from_scores(np.linspace(1, 0, 30))
    sub = wider_window_sample(ds, s, 6, 3.0, seed)
    sub.check(30)
    assert sub.m == 6
