"""Gaussian toy model where the better window flips from easy to hard samples
as the subset grows, plus numeric checks of the two regime bounds.

Inputs are columns x_i ~ N(0, I_d)/sqrt(d), labels sign((x_i)_1), and the
difficulty score of a sample is 1/|(x_i)_1|.
"""
from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg

from .core import NumericalError, SubsetIndices, ValidationError, sort_by_score
from .windows import window_grid

log = logging.getLogger(__name__)

MAX_RESAMPLES = 10


class InsufficientSamplesError(ValidationError):
    pass


class SingularSystemError(NumericalError):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ToyTask:
    X: np.ndarray  # d x n
    y: np.ndarray  # +1 / -1
    scores: np.ndarray
    seed: int
    stream: int = 0

    @property
    def d(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @cached_property
    def label_orders(self) -> tuple[np.ndarray, np.ndarray]:
        """Indices of positives and of negatives, each hardest first."""
        out = []
        for lab in (1.0, -1.0):
            members = np.flatnonzero(self.y == lab)
            out.append(members[sort_by_score(self.scores[members])])
        return out[0], out[1]


def generate_toy(n: int, d: int, seed: int = 0, stream: int = 0) -> ToyTask:
    if n < 1 or d < 1:
        raise ValidationError("n and d must be positive")
    rng = np.random.default_rng([seed, stream])
    X = rng.standard_normal((d, n)) / math.sqrt(d)
    # 1/|x_1| must be finite
    zero = np.flatnonzero(X[0] == 0.0)
    while zero.size:
        X[:, zero] = rng.standard_normal((d, zero.size)) / math.sqrt(d)
        zero = np.flatnonzero(X[0] == 0.0)
    y = np.where(X[0] > 0, 1.0, -1.0)
    return ToyTask(X, y, 1.0 / np.abs(X[0]), seed, stream)


def label_balanced_window(task: ToyTask, start: int, m: int) -> SubsetIndices:
    """``m/2`` positives and ``m/2`` negatives, each a contiguous block of its
    label's difficulty order beginning at rank ``start // 2``.
    """
    if m < 2 or m % 2:
        raise ValidationError(f"label-balanced window needs an even m >= 2, got {m}")
    if start < 0:
        raise ValidationError(f"negative start {start}")
    half, offset = m // 2, start // 2
    blocks = []
    for name, members in zip(("positive", "negative"), task.label_orders):
        if offset + half > members.size:
            raise InsufficientSamplesError(
                f"{name} label has {members.size} samples, window needs ranks "
                f"[{offset}, {offset + half})")
        blocks.append(members[offset:offset + half])
    return SubsetIndices(np.concatenate(blocks))


def least_squares_solve(X_S, y_S, cond_limit: float = 1e12) -> np.ndarray:
    """Minimum-norm least squares for ``y ~ X_S^T w`` with X_S of shape (d, m).

    Uses ``X (X^T X)^-1 y`` when m <= d and ``(X X^T)^-1 X y`` otherwise.
    """
    X = np.asarray(X_S, dtype=np.float64)
    y = np.asarray(y_S, dtype=np.float64)
    d, m = X.shape
    gram = X.T @ X if m <= d else X @ X.T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularSystemError(f"Gram matrix condition number {cond:.3g} exceeds {cond_limit:.0e}")
    try:
        factor = linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    if m <= d:
        return X @ linalg.cho_solve(factor, y)
    return linalg.cho_solve(factor, X @ y)


def cosine_with_axis(w) -> float:
    w = np.asarray(w, dtype=np.float64)
    norm = np.linalg.norm(w)
    if norm == 0.0:
        raise NumericalError("cosine undefined for the zero vector")
    return float(np.clip(w[0] / norm, -1.0, 1.0))


@dataclass
class PowerResult:
    value: float
    iterations: int
    converged: bool


def power_iteration(A, seed: int = 0, tol: float = 1e-8, max_iter: int = 10_000) -> PowerResult:
    """Largest |eigenvalue| of a symmetric matrix.

    Iterates on ``A^2`` implicitly so a +/- pair of equal magnitude still
    converges. Stops once the eigen-residual ``||A^2 v - mu v||`` falls below
    ``tol * mu`` with ``mu = ||A v||^2``; the estimate is ``sqrt(mu)``.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected a square matrix, got {A.shape}")
    if not np.isfinite(A).all():
        raise ValidationError("matrix has non-finite entries")
    if not np.allclose(A, A.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValidationError("matrix is not symmetric")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    mu = 0.0
    for it in range(1, max_iter + 1):
        u = A @ v
        mu = float(u @ u)
        if mu == 0.0:
            return PowerResult(0.0, it, True)
        w = A @ u
        if np.linalg.norm(w - mu * v) <= tol * mu:
            return PowerResult(math.sqrt(mu), it, True)
        v = w / np.linalg.norm(w)
    warnings.warn(f"power iteration stopped after {max_iter} iterations at {math.sqrt(mu):.6g}",
                  ConvergenceWarning, stacklevel=2)
    return PowerResult(math.sqrt(mu), max_iter, False)


def spectral_norm(A, seed: int = 0, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    return power_iteration(A, seed, tol, max_iter).value


# -- window sweep -------------------------------------------------------------

@dataclass
class ToySweepRow:
    start: int
    mean_cosine: float
    std: float
    resample_count: int


@dataclass
class ToySweep:
    n: int
    d: int
    m: int
    step: int
    seeds: list[int]
    rows: list[ToySweepRow]
    cosines: np.ndarray = field(repr=False)  # seeds x starts

    def to_csv(self) -> str:
        lines = ["start,mean_cosine,std,resample_count"]
        for r in self.rows:
            lines.append(f"{r.start},{r.mean_cosine:.17g},{r.std:.17g},{r.resample_count}")
        return "\n".join(lines) + "\n"


def _window_cosine(task: ToyTask, start: int, m: int) -> float:
    idx = label_balanced_window(task, start, m).indices
    return cosine_with_axis(least_squares_solve(task.X[:, idx], task.y[idx]))


def _seed_row(n, d, m, starts, seed):
    task = generate_toy(n, d, seed)
    cos = np.empty(len(starts))
    resamples = np.zeros(len(starts), dtype=np.int64)
    for j, start in enumerate(starts):
        current, attempt = task, 0
        while True:
            try:
                cos[j] = _window_cosine(current, start, m)
                break
            except (SingularSystemError, InsufficientSamplesError) as exc:
                attempt += 1
                if attempt > MAX_RESAMPLES:
                    raise NumericalError(
                        f"seed {seed}, start {start}: gave up after {MAX_RESAMPLES} resamples") from exc
                log.warning("seed %d start %d: %s; resampling", seed, start, exc)
                current = generate_toy(n, d, seed, stream=attempt)
        resamples[j] = attempt
    return cos, resamples


def toy_sweep(n: int, d: int, m: int, step: int, seeds, threads: int = 1) -> ToySweep:
    """Cosine between the least-squares solution and e_1 for every window start."""
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValidationError("need at least one seed")
    starts = window_grid(n, m, step)
    if threads <= 0:
        threads = os.cpu_count() or 1
    if threads == 1 or len(seeds) == 1:
        results = [_seed_row(n, d, m, starts, s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: _seed_row(n, d, m, starts, s), seeds))
    cos = np.stack([r[0] for r in results])
    resamples = np.sum([r[1] for r in results], axis=0)
    ddof = 1 if len(seeds) > 1 else 0
    std = cos.std(axis=0, ddof=ddof)
    rows = [ToySweepRow(s, float(cos[:, j].mean()), float(std[j]), int(resamples[j]))
            for j, s in enumerate(starts)]
    return ToySweep(n, d, m, step, seeds, rows, cos)


# -- regime bounds --------------------------------------------------------------

def deficient_bound(m: int, n: int, d: int) -> float:
    """``m * sqrt(7 ln n / (2 d))``."""
    return m * math.sqrt(7.0 * math.log(n) / (2.0 * d))


def sufficient_scale(d: int, m: int) -> float:
    """``d^2 ln d / m``; the bound holds up to an unspecified constant."""
    return d * d * math.log(d) / m


@dataclass
class RegimeReport:
    regime: str
    lhs: float                 # mean of the per-trial deviations
    bound: float
    trials: int
    seed: int
    lhs_values: list[float] = field(default_factory=list)
    passes: int | None = None  # deficient only
    ratio: float | None = None  # sufficient only: lhs / (d^2 ln d / m)
    gershgorin_fraction: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def pass_fraction(self) -> float | None:
        return None if self.passes is None else self.passes / self.trials

    def to_dict(self) -> dict:
        out = {
            "regime": self.regime, "lhs": self.lhs, "bound": self.bound,
            "trials": self.trials, "seed": self.seed, "params": dict(self.params),
            "lhs_values": list(self.lhs_values),
        }
        if self.passes is not None:
            out.update(passes=self.passes, pass_fraction=self.pass_fraction)
        if self.ratio is not None:
            out.update(ratio=self.ratio, gershgorin_fraction=self.gershgorin_fraction)
        return out


def _deficient_trial(d, m, seed, trial):
    rng = np.random.default_rng([seed, trial])
    X = rng.standard_normal((d, m)) / math.sqrt(d)
    dev = np.linalg.inv(X.T @ X) - np.eye(m)
    return spectral_norm((dev + dev.T) / 2, seed=trial)


def verify_deficient_bound(d: int, n_label: int, m: int, trials: int = 100, seed: int = 0,
                           threads: int = 1) -> RegimeReport:
    """Measure ``||(X_S^T X_S)^-1 - I_m||_2`` over random draws and count how
    often it stays under ``m sqrt(7 ln n / 2d)``.
    """
    if m > d:
        raise ValidationError(f"deficient regime needs m <= d (m={m}, d={d})")
    bound = deficient_bound(m, n_label, d)
    fn = lambda t: _deficient_trial(d, m, seed, t)  # noqa: E731
    lhs = _map(fn, range(trials), threads)
    passes = int(sum(v <= bound for v in lhs))
    return RegimeReport("deficient", float(np.mean(lhs)), bound, trials, seed, lhs, passes,
                        params={"d": d, "n": n_label, "m": m})


def sufficient_design(d: int, m: int, a_values, rng) -> np.ndarray:
    """First row fixed to a_i/sqrt(d); other rows N(0, 1)/sqrt(d)."""
    X = rng.standard_normal((d, m)) / math.sqrt(d)
    X[0] = np.asarray(a_values, dtype=np.float64) / math.sqrt(d)
    return X


def _sufficient_trial(d, m, a_values, seed, trial):
    rng = np.random.default_rng([seed, trial])
    X = sufficient_design(d, m, a_values, rng)
    A = (d / m) * (X @ X.T)
    a = float(np.mean(np.square(a_values)))
    try:
        A_inv = linalg.cho_solve(linalg.cho_factor(A, lower=True), np.eye(d))
    except linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    B_inv = np.eye(d)
    B_inv[0, 0] = 1.0 / a
    dev = A_inv - B_inv
    off = np.abs(A).sum(axis=1) - np.abs(np.diag(A))
    return spectral_norm((dev + dev.T) / 2, seed=trial), bool(np.all(off < np.diag(A)))


def verify_sufficient_bound(d: int, m: int, a_values=None, seed: int = 0, trials: int = 1,
                            threads: int = 1) -> RegimeReport:
    """Measure ``||(d/m X_S X_S^T)^-1 - B^-1||_2`` with B = diag(a, 1, ..., 1).

    The reported ``ratio`` divides by ``d^2 ln d / m``; with no known constant
    this is a trend indicator, not a pass/fail test.
    """
    if m < d:
        raise ValidationError(f"sufficient regime needs m >= d (m={m}, d={d})")
    a_values = np.ones(m) if a_values is None else np.asarray(a_values, dtype=np.float64)
    if a_values.shape != (m,):
        raise ValidationError(f"need {m} a-values, got {a_values.shape}")
    fn = lambda t: _sufficient_trial(d, m, a_values, seed, t)  # noqa: E731
    res = _map(fn, range(trials), threads)
    lhs = [r[0] for r in res]
    scale = sufficient_scale(d, m)
    mean = float(np.mean(lhs))
    return RegimeReport("sufficient", mean, scale, trials, seed, lhs, ratio=mean / scale,
                        gershgorin_fraction=float(np.mean([r[1] for r in res])),
                        params={"d": d, "m": m, "a": float(np.mean(a_values ** 2))})


def _map(fn, items, threads):
    items = list(items)
    if threads == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads if threads > 0 else None) as pool:
        return list(pool.map(fn, items))
