"""Tab-delimited ingestion of per-hypothesis replicate statistics.

load_tsv parses a header plus tab-separated records into a Dataset: one
identifier column and one or more numeric replicate columns.  Blank or NA
cells are skipped per hypothesis; rows with no valid replicate at all are
dropped (counted, not fatal).  fit_null_scale estimates the null standard
deviation robustly from the averaged statistics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DataError

# cells treated as missing replicates (case-insensitive, surrounding
# whitespace ignored)
_NA_TOKENS = frozenset({"", "na", "nan", "n/a", "null"})

# MAD about the median divided by the normal upper quartile is a consistent
# scale estimate for Gaussian data
_NORMAL_UPPER_QUARTILE = float(special.ndtri(0.75))

_MIN_SCALE_SAMPLES = 10


@dataclass(frozen=True)
class Dataset:
    """Per-hypothesis identifiers, raw replicates, and replicate means."""

    ids: tuple[str, ...]
    replicate_values: tuple[tuple[float, ...], ...]
    averaged: tuple[float, ...]
    dropped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if not (len(self.ids) == len(self.replicate_values) == len(self.averaged)):
            raise DataError("ids, replicate_values, and averaged must align")
        if len(self.ids) == 0:
            raise DataError("dataset has no hypotheses")
        for i, (reps, avg) in enumerate(zip(self.replicate_values, self.averaged)):
            if len(reps) == 0:
                raise DataError(f"hypothesis {self.ids[i]!r} has no replicates")
            mean = math.fsum(reps) / len(reps)
            if not math.isclose(avg, mean, rel_tol=1e-12, abs_tol=1e-12):
                raise DataError(
                    f"averaged value for {self.ids[i]!r} does not equal the "
                    f"replicate mean"
                )

    @property
    def n(self) -> int:
        return len(self.ids)

    def samples(self) -> np.ndarray:
        """Averaged statistics as a float array, ready for estimation."""
        return np.asarray(self.averaged, dtype=float)


def _is_na(cell: str) -> bool:
    return cell.strip().lower() in _NA_TOKENS


def load_tsv(
    path: str | Path,
    id_column: str | None = None,
    value_columns: Sequence[str] | None = None,
) -> Dataset:
    """Parse a tab-delimited file of per-hypothesis replicate statistics.

    The first row is a header.  ``id_column`` names the identifier column
    (default: the first column); ``value_columns`` names the numeric
    replicate columns (default: every other column).  NA-like cells are
    skipped; a hypothesis keeps the mean of its remaining replicates.  Rows
    with zero valid replicates are dropped and counted in ``dropped``.

    Raises DataError for a missing/empty file, missing declared columns, or
    a malformed numeric cell (reported with its line number).
    """
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if id_column is None:
            id_idx = 0
        else:
            if id_column not in header:
                raise DataError(f"{path}: id column {id_column!r} not in header")
            id_idx = header.index(id_column)
        if value_columns is None:
            value_idx = [j for j in range(len(header)) if j != id_idx]
        else:
            missing = [c for c in value_columns if c not in header]
            if missing:
                raise DataError(f"{path}: value columns {missing} not in header")
            value_idx = [header.index(c) for c in value_columns]
        if not value_idx:
            raise DataError(f"{path}: no replicate columns declared")

        ids: list[str] = []
        replicates: list[tuple[float, ...]] = []
        averaged: list[float] = []
        dropped = 0
        for line_no, row in enumerate(reader, start=2):
            if not row or all(_is_na(cell) for cell in row):
                continue
            if len(row) <= id_idx:
                raise DataError(f"{path}:{line_no}: row has no identifier cell")
            values: list[float] = []
            for j in value_idx:
                cell = row[j] if j < len(row) else ""
                if _is_na(cell):
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{line_no}: malformed numeric cell {cell!r}"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}:{line_no}: non-finite numeric cell {cell!r}"
                    )
                values.append(value)
            if not values:
                dropped += 1
                continue
            ids.append(row[id_idx].strip())
            replicates.append(tuple(values))
            averaged.append(math.fsum(values) / len(values))
        if not ids:
            raise DataError(f"{path}: no rows with valid replicates")
    return Dataset(tuple(ids), tuple(replicates), tuple(averaged), dropped)


def write_tsv(dataset: Dataset, path: str | Path, id_header: str = "id") -> None:
    """Write a Dataset back to tab-delimited form (inverse of load_tsv).

    Rows may have different replicate counts; shorter rows pad with blank
    cells, which load_tsv skips, so write-then-load reproduces the Dataset.
    """
    path = Path(path)
    width = max(len(reps) for reps in dataset.replicate_values)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow([id_header] + [f"rep{j + 1}" for j in range(width)])
        for hid, reps in zip(dataset.ids, dataset.replicate_values):
            cells = [repr(v) for v in reps] + [""] * (width - len(reps))
            writer.writerow([hid] + cells)


def fit_null_scale(
    samples: np.ndarray | Sequence[float], override: float | None = None
) -> float:
    """Robust null standard deviation: MAD about the median, rescaled.

    Dividing the median absolute deviation by the standard normal upper
    quartile makes the estimate consistent for Gaussian data while staying
    insensitive to a minority of shifted means.  Passing ``override``
    skips fitting and returns it unchanged (after validation).

    Raises DataError for fewer than 10 samples or constant data (zero MAD).
    """
    if override is not None:
        if not (override > 0 and math.isfinite(override)):
            raise DataError(f"scale override must be positive, got {override}")
        return float(override)
    values = np.asarray(samples, dtype=float)
    if values.ndim != 1:
        raise DataError("samples must be one-dimensional")
    if values.size < _MIN_SCALE_SAMPLES:
        raise DataError(
            f"need at least {_MIN_SCALE_SAMPLES} samples to fit a scale, "
            f"got {values.size}"
        )
    if not np.all(np.isfinite(values)):
        raise DataError("samples must be finite")
    mad = float(np.median(np.abs(values - np.median(values))))
    if mad <= 0.0:
        raise DataError("samples are (nearly) constant; scale fit is degenerate")
    return mad / _NORMAL_UPPER_QUARTILE
