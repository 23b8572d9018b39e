"""Deterministic JSON and CSV reports.

Floats are written with Python's shortest round-trip ``repr`` so identical
inputs give byte-identical output; non-finite floats become the strings
``"inf"``, ``"-inf"`` and ``"nan"`` because JSON has no literal for them.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__

TOP_LEVEL_KEYS = ("command", "config", "verdicts", "values", "errors", "version")


def clean(obj: Any) -> Any:
    """Convert numpy scalars, tuples and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


@dataclass
class Report:
    command: str
    config: dict
    verdicts: list[dict] = field(default_factory=list)
    values: list[dict] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    version: str = __version__

    def verdict(self, name: str, passed: bool, detail: str = "", **data) -> None:
        self.verdicts.append({"name": name, "passed": bool(passed), "detail": detail, **data})

    def error(self, r: float | None, kind: str, message: str) -> None:
        self.errors.append({"r": r, "kind": kind, "message": message})

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(v["passed"] for v in self.verdicts)

    def to_dict(self) -> dict:
        return {key: clean(getattr(self, key)) for key in TOP_LEVEL_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        rows = [clean(v) for v in self.values]
        columns: list[str] = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")
