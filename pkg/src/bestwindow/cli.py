"""Command line entry point.

Exit codes: 0 success, 1 invalid arguments or data, 2 I/O or file-format
failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as bio
from .core import NumericalError, ValidationError
from .selection import (EVAL_MODES, PROXIES, WINDOW_MODES, SweepReport,
                        ablation_sweep, best_window_select, ratio_to_m,
                        resolve_threads)
from .theory import toy_sweep, verify_deficient_bound, verify_sufficient_bound
from .windows import round_half_up

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("bestwindow")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2), which is our I/O code
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    ratio: float | None = None
    m: int | None = None
    step: float = 0.05
    lam: float = 1.0
    seed: int = 0
    threads: int = 1
    paths: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def resolve_m(self, n: int) -> int:
        if (self.ratio is None) == (self.m is None):
            raise ValidationError("give exactly one of --ratio or --m")
        if self.m is not None:
            if not (1 <= self.m <= n):
                raise ValidationError(f"--m {self.m} must lie in [1, {n}]")
            return self.m
        return ratio_to_m(self.ratio, n)

    def resolve_step(self, n: int) -> int:
        return resolve_step(self.step, n)


def resolve_step(step: float, n: int) -> int:
    """Fractional steps (< 1) scale with n using round-half-up; others are counts."""
    if step <= 0:
        raise ValidationError(f"--step must be positive, got {step}")
    if step < 1:
        t = round_half_up(step * n)
    else:
        if step != int(step):
            raise ValidationError(f"--step {step} >= 1 must be a whole sample count")
        t = int(step)
    if t < 1:
        raise ValidationError(f"--step {step} resolves to less than one sample for n={n}")
    return t


# -- report serialization ---------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    s = f"{x:.17g}"
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _dump(obj, indent: int, level: int = 0) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dump(obj[k], indent, level + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + _dump(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    return _dump(obj, indent) + "\n"


def report_to_dict(report: SweepReport) -> dict:
    cands = []
    for c in report.candidates:
        entry = {"start": c.spec.start, "m": c.spec.m, "score": c.score}
        if c.spec.second_start is not None:
            entry["second_start"] = c.spec.second_start
        cands.append(entry)
    params = dict(report.params)
    params.update(lam=float(report.lam), step=report.step, m=report.m)
    return {
        "params": params,
        "candidates": cands,
        "winner_start": report.best.spec.start,
        "winner_score": report.best.score,
        "eval_mode": report.eval_mode,
        "proxy": report.proxy_kind,
    }


def serialize_report(report: SweepReport) -> str:
    return dumps(report_to_dict(report))


def parse_report(text: str) -> dict:
    return json.loads(text)


# -- commands -----------------------------------------------------------------

def _add_dataset_args(p):
    p.add_argument("--features", type=Path, required=True, help=".bwsf or .csv")
    p.add_argument("--labels", type=Path, required=True, help=".bwsl or .csv")
    p.add_argument("--scores", type=Path, required=True, help=".bwss or .csv")
    p.add_argument("--num-classes", type=int, default=None,
                   help="class count for CSV labels (default max label + 1)")
    p.add_argument("--ratio", type=float, default=None, help="subset size as a fraction of n")
    p.add_argument("--m", type=int, default=None, help="subset size in samples")
    p.add_argument("--step", type=float, default=0.05,
                   help="grid step: fraction of n if < 1, else a sample count")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--eval-mode", choices=EVAL_MODES, default="full")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads, 0 = all cores (env BWS_THREADS)")
    p.add_argument("--report", type=Path, default=None, help="JSON sweep report")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bws", description="Best window selection for data pruning")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (("select", "pick the best window and write the subset"),
                           ("sweep", "score every window and write the table")):
        p = sub.add_parser(name, help=helptext)
        _add_dataset_args(p)
        p.add_argument("--proxy", choices=PROXIES, default="krr")
        p.add_argument("--gradients", type=Path, default=None,
                       help="per-sample gradients (.csv or .npy) for grad proxies")
        p.add_argument("--window-mode", choices=WINDOW_MODES, default="global")
        p.add_argument("--include-tail", action="store_true")
        p.add_argument("--out", type=Path, required=(name == "select"),
                       help="subset file (select) or CSV table (sweep)")

    p = sub.add_parser("ablation", help="sweep two-half or wider windows")
    _add_dataset_args(p)
    p.add_argument("--family", choices=("two_half", "wider"), required=True)
    p.add_argument("--factor", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="winner subset file")

    p = sub.add_parser("toy", help="Gaussian toy-model window sweep (CSV)")
    p.add_argument("--d", type=int, default=256)
    p.add_argument("--n", type=int, default=25600)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--seeds", type=int, default=5, help="number of seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("verify", help="numeric check of a regime bound (JSON)")
    p.add_argument("--regime", choices=("deficient", "sufficient"), required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=100, help="nominal n in the deficient bound")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--a-values", type=Path, default=None,
                   help="file with m first-coordinate magnitudes (default all ones)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_gradients(path: Path) -> np.ndarray:
    if path.suffix.lower() == ".npy":
        return np.load(path)
    return bio.csv_import(path, "gradients")


def _write_text(path: Path, text: str) -> None:
    path.write_bytes(text.encode("ascii"))


def _sweep_csv(report: SweepReport) -> str:
    lines = ["start,m,score"]
    lines += [f"{c.spec.start},{c.spec.m},{_fmt_float(c.score)}" for c in report.candidates]
    return "\n".join(lines) + "\n"


def _cmd_dataset(args, cfg: RunConfig) -> int:
    ds = bio.load_dataset(args.features, args.labels, args.scores, args.num_classes)
    m, t = cfg.resolve_m(ds.n), cfg.resolve_step(ds.n)
    if args.command == "ablation":
        report, subset = ablation_sweep(ds, args.family, m, t, args.factor, args.seed,
                                        cfg.lam, args.eval_mode, cfg.threads, args.verbose)
    else:
        grads = _load_gradients(args.gradients) if args.gradients else None
        report, subset = best_window_select(
            ds, m, t, cfg.lam, args.proxy, args.eval_mode, args.window_mode, grads,
            args.include_tail, cfg.threads, verbose=args.verbose)
    if not report.check_winner():
        raise NumericalError("winner is not optimal over the emitted table")
    if args.report:
        _write_text(args.report, serialize_report(report))
    if args.command == "sweep":
        if args.out:
            _write_text(args.out, _sweep_csv(report))
        elif not args.report:
            sys.stdout.write(serialize_report(report))
    elif args.out:
        bio.save_subset(subset, args.out)
    log.info("winner start=%d score=%.6f (%d candidates)", report.best.spec.start,
             report.best.score, len(report.candidates))
    return EXIT_OK


def _cmd_toy(args, cfg: RunConfig) -> int:
    if args.seeds < 1:
        raise ValidationError("--seeds must be >= 1")
    t = resolve_step(args.step, args.n)
    seeds = list(range(args.seed, args.seed + args.seeds))
    result = toy_sweep(args.n, args.d, args.m, t, seeds, threads=cfg.threads)
    _write_text(args.out, result.to_csv())
    return EXIT_OK


def _cmd_verify(args, cfg: RunConfig) -> int:
    if args.regime == "deficient":
        rep = verify_deficient_bound(args.d, args.n, args.m, args.trials, args.seed, cfg.threads)
    else:
        a = None
        if args.a_values is not None:
            a = np.loadtxt(args.a_values, delimiter=",", ndmin=1)
        rep = verify_sufficient_bound(args.d, args.m, a, args.seed, args.trials, cfg.threads)
    text = dumps(rep.to_dict())
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    cfg = RunConfig(command=args.command, ratio=getattr(args, "ratio", None),
                    m=getattr(args, "m", None), step=args.step if hasattr(args, "step") else 0.05,
                    lam=getattr(args, "lam", 1.0), seed=getattr(args, "seed", 0),
                    threads=resolve_threads(args.threads))
    handlers = {"select": _cmd_dataset, "sweep": _cmd_dataset, "ablation": _cmd_dataset,
                "toy": _cmd_toy, "verify": _cmd_verify}
    try:
        return handlers[args.command](args, cfg)
    except (ValidationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
