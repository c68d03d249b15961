"""Best window selection: sweep candidate windows, score each, keep the best."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ScoredDataset, SubsetIndices, ValidationError
from .proxy import (GradientBundle, fit_one_vs_rest, gradient_difference,
                    gradient_similarity, proxy_accuracy)
from .windows import (WindowSpec, ceil_tol, materialize, two_half_grid,
                      window_grid)

log = logging.getLogger(__name__)

PROXIES = ("krr", "grad_diff", "grad_sim")
EVAL_MODES = ("full", "low50")
WINDOW_MODES = ("global", "per_class")


@dataclass(frozen=True)
class Candidate:
    spec: WindowSpec
    score: float


@dataclass
class SweepReport:
    candidates: list[Candidate]
    winner: int
    eval_mode: str = "full"
    proxy_kind: str = "krr"
    lam: float = 1.0
    step: int = 1
    m: int = 1
    params: dict = field(default_factory=dict)

    @property
    def best(self) -> Candidate:
        return self.candidates[self.winner]

    def scores(self) -> np.ndarray:
        return np.array([c.score for c in self.candidates])

    def check_winner(self) -> bool:
        """True if the recorded winner is optimal over the emitted table."""
        s = self.scores()
        if self.proxy_kind == "grad_diff":
            return bool(s[self.winner] <= s.min())
        return bool(s[self.winner] >= s.max())


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("BWS_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def noise_robust_eval_indices(ds: ScoredDataset, fraction: float = 0.5) -> np.ndarray:
    """The ``ceil(fraction * n)`` easiest samples, i.e. the tail of the order."""
    if not (0.0 < fraction <= 1.0):
        raise ValidationError(f"fraction must lie in (0, 1], got {fraction}")
    k = ceil_tol(fraction * ds.n)
    return np.array(ds.order[ds.n - k:])


def eval_indices(ds: ScoredDataset, eval_mode: str, fraction: float = 0.5) -> np.ndarray:
    if eval_mode == "full":
        return np.arange(ds.n)
    if eval_mode == "low50":
        return noise_robust_eval_indices(ds, fraction)
    raise ValidationError(f"unknown eval mode {eval_mode!r}")


def _scorer(ds, proxy_kind, lam, evals, gradients):
    if proxy_kind == "krr":
        def score(subset: SubsetIndices) -> float:
            return proxy_accuracy(fit_one_vs_rest(ds, subset, lam), ds, evals)
        return score
    if proxy_kind in ("grad_diff", "grad_sim"):
        if gradients is None:
            raise ValidationError(f"proxy {proxy_kind!r} needs a gradient bundle")
        if not isinstance(gradients, GradientBundle):
            gradients = GradientBundle(gradients)
        if gradients.G.shape[0] != ds.n:
            raise ValidationError(f"gradient rows {gradients.G.shape[0]} != n={ds.n}")
        fn = gradient_difference if proxy_kind == "grad_diff" else gradient_similarity
        return lambda subset: fn(gradients, evals, subset.indices)
    raise ValidationError(f"unknown proxy {proxy_kind!r}")


def _pick(scores: list[float], proxy_kind: str) -> int:
    # first optimum in grid order = smallest start = harder window
    s = np.asarray(scores)
    return int(np.argmin(s) if proxy_kind == "grad_diff" else np.argmax(s))


def evaluate_candidates(ds, specs, proxy_kind="krr", lam=1.0, eval_mode="full",
                        gradients=None, threads=1, eval_fraction=0.5, verbose=False):
    """Score every spec; results come back in ``specs`` order whatever the pool does."""
    evals = eval_indices(ds, eval_mode, eval_fraction)
    score = _scorer(ds, proxy_kind, lam, evals, gradients)

    def run(spec):
        return score(materialize(ds, spec))

    threads = resolve_threads(threads)
    if threads == 1 or len(specs) < 2:
        scores = [run(s) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(run, specs))
    if verbose:
        for spec, sc in zip(specs, scores):
            log.info("start=%d m=%d score=%.6f", spec.start, spec.m, sc)
    return [Candidate(sp, float(sc)) for sp, sc in zip(specs, scores)]


def best_window_select(ds: ScoredDataset, m: int, t: int, lam: float = 1.0,
                       proxy_kind: str = "krr", eval_mode: str = "full",
                       window_mode: str = "global", gradients=None,
                       include_tail: bool = False, threads: int | None = 1,
                       eval_fraction: float = 0.5, verbose: bool = False):
    """Sweep windows of size ``m`` at starts ``0, t, 2t, ...`` and return
    ``(report, subset)`` for the best-scoring one.
    """
    if window_mode not in WINDOW_MODES:
        raise ValidationError(f"unknown window mode {window_mode!r}")
    kind = "contiguous" if window_mode == "global" else "per_class"
    specs = [WindowSpec(kind, k, m) for k in window_grid(ds.n, m, t, include_tail)]
    cands = evaluate_candidates(ds, specs, proxy_kind, lam, eval_mode, gradients,
                                threads, eval_fraction, verbose)
    winner = _pick([c.score for c in cands], proxy_kind)
    report = SweepReport(cands, winner, eval_mode, proxy_kind, lam, t, m,
                         {"n": ds.n, "window_mode": window_mode, "include_tail": include_tail})
    return report, materialize(ds, cands[winner].spec)


def ablation_specs(n: int, family: str, m: int, t: int, factor: float = 2.0,
                   seed: int = 0) -> list[WindowSpec]:
    if family == "two_half":
        specs = [WindowSpec("two_half", x1, m, second_start=x2)
                 for x1, x2 in two_half_grid(n, m, t)]
    elif family == "wider":
        if factor < 1.0:
            raise ValidationError(f"widening factor must be >= 1, got {factor}")
        width = ceil_tol(factor * m)
        if width > n:
            specs = []
        else:
            specs = [WindowSpec("wider_random", s, m, factor=factor, seed=seed)
                     for s in window_grid(n, width, t)]
    else:
        raise ValidationError(f"unknown ablation family {family!r}")
    if not specs:
        raise ValidationError(f"{family} grid is empty for n={n}, m={m}, step={t}")
    return specs


def ablation_sweep(ds: ScoredDataset, family: str, m: int, t: int, factor: float = 2.0,
                   seed: int = 0, lam: float = 1.0, eval_mode: str = "full",
                   threads: int | None = 1, verbose: bool = False):
    """Sweep the two-half or wider-window family with the ridge proxy."""
    specs = ablation_specs(ds.n, family, m, t, factor, seed)
    cands = evaluate_candidates(ds, specs, "krr", lam, eval_mode, None, threads,
                                verbose=verbose)
    winner = _pick([c.score for c in cands], "krr")
    params = {"n": ds.n, "family": family}
    if family == "wider":
        params.update(factor=factor, seed=seed)
    report = SweepReport(cands, winner, eval_mode, "krr", lam, t, m, params)
    return report, materialize(ds, cands[winner].spec)


def ratio_to_m(ratio: float, n: int) -> int:
    if not (0.0 < ratio <= 1.0):
        raise ValidationError(f"ratio must lie in (0, 1], got {ratio}")
    return max(1, int(math.floor(ratio * n + 0.5)))
