"""Binary and CSV readers/writers for features, labels, scores and subsets.

Binary layouts (all little-endian)::

    BWSF  u32 version=1  u64 n  u64 d   n*d float32, row-major, no bias column
    BWSL  u32 version=1  u64 n  u64 C   n uint32 labels
    BWSS  u32 version=1  u64 n          n float64 scores
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .core import ScoredDataset, SubsetIndices, ValidationError, append_bias

VERSION = 1
FEATURE_MAGIC = b"BWSF"
LABEL_MAGIC = b"BWSL"
SCORE_MAGIC = b"BWSS"

_HEADER_2 = struct.Struct("<4sIQQ")
_HEADER_1 = struct.Struct("<4sIQ")


class FormatError(OSError):
    """Base class for malformed input files. ``code`` identifies the failure."""

    code = "format"

    def __init__(self, path, detail):
        self.path = str(path)
        super().__init__(f"{self.path}: {self.code}: {detail}")


class BadMagicError(FormatError):
    code = "magic mismatch"


class BadVersionError(FormatError):
    code = "unsupported version"


class CountMismatchError(FormatError):
    code = "n mismatch"


class TruncatedPayloadError(FormatError):
    code = "truncated payload"


class TrailingBytesError(FormatError):
    code = "trailing bytes"


class NonFiniteValueError(FormatError):
    code = "non-finite value"


class LabelRangeError(FormatError):
    code = "label out of range"


class CsvParseError(FormatError):
    code = "csv parse error"

    def __init__(self, path, row, col, detail):
        self.row, self.col = row, col
        super().__init__(path, f"row {row}" + (f", column {col}" if col else "") + f": {detail}")


def _read_header(path, blob: bytes, magic: bytes, st: struct.Struct):
    if len(blob) < 4 or blob[:4] != magic:
        raise BadMagicError(path, f"expected {magic!r}, found {blob[:4]!r}")
    if len(blob) < st.size:
        raise TruncatedPayloadError(path, "header shorter than expected")
    fields = st.unpack_from(blob)
    if fields[1] != VERSION:
        raise BadVersionError(path, f"version {fields[1]}")
    return fields[2:]


def _payload(path, blob: bytes, offset: int, nbytes: int) -> bytes:
    have = len(blob) - offset
    if have < nbytes:
        raise TruncatedPayloadError(path, f"expected {nbytes} payload bytes, found {have}")
    if have > nbytes:
        raise TrailingBytesError(path, f"{have - nbytes} bytes after declared payload")
    return blob[offset:]


def read_features(path) -> np.ndarray:
    """Raw n x d float32 matrix as stored (no bias column)."""
    blob = Path(path).read_bytes()
    n, d = _read_header(path, blob, FEATURE_MAGIC, _HEADER_2)
    data = _payload(path, blob, _HEADER_2.size, 4 * n * d)
    arr = np.frombuffer(data, dtype="<f4").reshape(n, d)
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteValueError(path, f"row {bad[0][0]}, column {bad[0][1]}")
    return arr.astype(np.float32)


def read_labels(path) -> tuple[np.ndarray, int]:
    blob = Path(path).read_bytes()
    n, num_classes = _read_header(path, blob, LABEL_MAGIC, _HEADER_2)
    data = _payload(path, blob, _HEADER_2.size, 4 * n)
    labels = np.frombuffer(data, dtype="<u4").astype(np.int64)
    bad = np.flatnonzero(labels >= num_classes)
    if bad.size:
        raise LabelRangeError(path, f"label {labels[bad[0]]} at index {bad[0]} >= C={num_classes}")
    return labels, int(num_classes)


def read_scores(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    (n,) = _read_header(path, blob, SCORE_MAGIC, _HEADER_1)
    data = _payload(path, blob, _HEADER_1.size, 8 * n)
    scores = np.frombuffer(data, dtype="<f8").astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(scores))
    if bad.size:
        raise NonFiniteValueError(path, f"index {bad[0]}")
    return scores


def write_features(path, features) -> None:
    arr = np.ascontiguousarray(features, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError("features must be 2-D")
    n, d = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER_2.pack(FEATURE_MAGIC, VERSION, n, d))
        fh.write(arr.tobytes())


def write_labels(path, labels, num_classes: int) -> None:
    arr = np.asarray(labels)
    if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
        raise ValueError(f"labels must lie in [0, {num_classes})")
    with open(path, "wb") as fh:
        fh.write(_HEADER_2.pack(LABEL_MAGIC, VERSION, arr.size, int(num_classes)))
        fh.write(np.ascontiguousarray(arr, dtype="<u4").tobytes())


def write_scores(path, scores) -> None:
    arr = np.ascontiguousarray(scores, dtype="<f8").ravel()
    with open(path, "wb") as fh:
        fh.write(_HEADER_1.pack(SCORE_MAGIC, VERSION, arr.size))
        fh.write(arr.tobytes())


# -- CSV ------------------------------------------------------------------

def _read_csv_rows(path) -> list[tuple[int, list[str]]]:
    rows = []
    with open(path, newline="", encoding="ascii") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            rows.append((lineno, [c.strip() for c in row]))
    return rows


def _is_header(cells: list[str]) -> bool:
    try:
        [float(c) for c in cells]
    except ValueError:
        return True
    return False


def _parse_matrix(path, rows, conv=float) -> list[list]:
    if rows and _is_header(rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise CsvParseError(path, 1, None, "no data rows")
    width = len(rows[0][1])
    out = []
    for lineno, cells in rows:
        if len(cells) != width:
            raise CsvParseError(path, lineno, None, f"expected {width} columns, found {len(cells)}")
        vals = []
        for j, cell in enumerate(cells, start=1):
            try:
                vals.append(conv(cell))
            except ValueError:
                raise CsvParseError(path, lineno, j, f"cannot parse {cell!r}") from None
        out.append(vals)
    return out


def csv_import(path, kind: str, num_classes: int | None = None):
    """Read a comma-separated file.

    ``features`` returns an n x (d+1) float64 matrix with the bias column
    appended; ``gradients`` returns n x p float64 without bias; ``labels``
    returns ``(labels, num_classes)``; ``scores`` returns a float64 vector.
    A non-numeric first row is treated as a header.
    """
    rows = _read_csv_rows(path)
    if kind in ("features", "gradients"):
        arr = np.array(_parse_matrix(path, rows), dtype=np.float64)
        _check_finite(path, arr)
        return append_bias(arr) if kind == "features" else arr
    if kind == "scores":
        arr = np.array(_parse_matrix(path, rows), dtype=np.float64)
        if arr.shape[1] != 1:
            raise CsvParseError(path, rows[0][0], None, "scores must have one column")
        _check_finite(path, arr)
        return arr[:, 0]
    if kind == "labels":
        arr = np.array(_parse_matrix(path, rows, conv=int), dtype=np.int64)
        if arr.shape[1] != 1:
            raise CsvParseError(path, rows[0][0], None, "labels must have one column")
        labels = arr[:, 0]
        if labels.min() < 0:
            raise LabelRangeError(path, "negative label")
        if num_classes is None:
            num_classes = int(labels.max()) + 1
        if labels.max() >= num_classes:
            raise LabelRangeError(path, f"label {labels.max()} >= C={num_classes}")
        return labels, int(num_classes)
    raise ValueError(f"unknown CSV kind {kind!r}")


def _check_finite(path, arr):
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteValueError(path, f"row {bad[0][0] + 1}, column {bad[0][-1] + 1}")


def csv_export(path, kind: str, values) -> None:
    """Inverse of :func:`csv_import`. Pass features without the bias column."""
    arr = np.asarray(values)
    if arr.ndim == 1:
        arr = arr[:, None]
    with open(path, "w", newline="", encoding="ascii") as fh:
        for row in arr:
            if kind == "labels":
                fh.write(",".join(str(int(v)) for v in row) + "\n")
            else:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


# -- datasets and subsets ---------------------------------------------------

def _is_csv(path) -> bool:
    return Path(path).suffix.lower() == ".csv"


def load_dataset(feature_path, label_path, score_path, num_classes: int | None = None) -> ScoredDataset:
    """Load and validate a dataset; ``.csv`` paths use the CSV reader."""
    if _is_csv(feature_path):
        feats = csv_import(feature_path, "features")
    else:
        feats = append_bias(read_features(feature_path))
    if _is_csv(label_path):
        labels, c = csv_import(label_path, "labels", num_classes)
    else:
        labels, c = read_labels(label_path)
    scores = csv_import(score_path, "scores") if _is_csv(score_path) else read_scores(score_path)
    n = feats.shape[0]
    if labels.size != n:
        raise CountMismatchError(label_path, f"{labels.size} labels for {n} feature rows")
    if scores.size != n:
        raise CountMismatchError(score_path, f"{scores.size} scores for {n} feature rows")
    return ScoredDataset.from_arrays(feats, labels, scores, num_classes=c, add_bias=False)


def save_dataset(prefix, features, labels, scores, num_classes: int) -> tuple[Path, Path, Path]:
    """Write the three binary files ``prefix.bwsf/.bwsl/.bwss``."""
    prefix = Path(prefix)
    paths = (prefix.with_suffix(".bwsf"), prefix.with_suffix(".bwsl"), prefix.with_suffix(".bwss"))
    write_features(paths[0], features)
    write_labels(paths[1], labels, num_classes)
    write_scores(paths[2], scores)
    return paths


def save_subset(subset: SubsetIndices, path) -> None:
    """Write indices one per line, ascending, ASCII, trailing newline."""
    if subset.m == 0:
        raise ValidationError("refusing to write an empty subset")
    idx = np.sort(subset.indices)
    if np.any(np.diff(idx) == 0) or idx[0] < 0:
        raise ValidationError("subset indices must be unique and non-negative")
    Path(path).write_bytes("".join(f"{int(i)}\n" for i in idx).encode("ascii"))


def load_subset(path) -> SubsetIndices:
    text = Path(path).read_text(encoding="ascii")
    vals = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            vals.append(int(line))
        except ValueError:
            raise CsvParseError(path, lineno, None, f"cannot parse {line!r}") from None
    return SubsetIndices(np.array(vals, dtype=np.int64))
