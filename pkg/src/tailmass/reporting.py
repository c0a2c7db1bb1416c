"""Report containers and their JSON/CSV serialization.

Every command and experiment driver emits the same document shape:

    {"meta": {"version": ..., "seed": ..., "config": {...}, "summary": {...}},
     "results": [row, ...]}

CSV output mirrors the results rows (header from the first row's keys).
Floats are rounded to 9 significant digits before serialization in both
formats, so identical configurations produce byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import __version__


def round9(value: float) -> float:
    return float(f"{float(value):.9g}")


def _rounded(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round9(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def format_float(value: float) -> str:
    return f"{float(value):.9g}"


def join_floats(values) -> str:
    """Pack per-trial float lists into one delimited cell ("a|b|c")."""
    return "|".join(format_float(v) for v in values)


def json_document(
    config: dict,
    results: list[dict],
    seed: int | None = None,
    summary: dict | None = None,
) -> str:
    meta: dict = {"version": __version__, "seed": seed, "config": _rounded(config)}
    if summary is not None:
        meta["summary"] = _rounded(summary)
    return json.dumps({"meta": meta, "results": _rounded(results)}, indent=2) + "\n"


def csv_document(results: list[dict]) -> str:
    if not results:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(results[0].keys())
    writer.writerow(header)
    for row in results:
        writer.writerow(
            [
                format_float(row[k])
                if isinstance(row[k], float) and not isinstance(row[k], bool)
                else row[k]
                for k in header
            ]
        )
    return buf.getvalue()


@dataclass
class ExperimentReport:
    """Outcome of one simulation experiment, ready to serialize or plot."""

    kind: str
    params: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seed: int = 0
    trials: int = 0

    def to_json(self) -> str:
        config = {"kind": self.kind, "trials": self.trials, **self.params}
        return json_document(config, self.rows, seed=self.seed, summary=self.summary)

    def to_csv(self) -> str:
        return csv_document(self.rows)
