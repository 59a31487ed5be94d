"""Deterministic CSV/JSON emission for experiment runs.

All numbers are printed with ``repr`` (shortest round-trip form), iteration
orders are fixed, and nothing time- or path-dependent enters the output, so
a run with the same (config, seed) is byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return _jsonable(float(value))
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_manifest(path: str | Path, manifest: dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(_jsonable(manifest), sort_keys=True, indent=2) + "\n")


def batch_standard_error(values: np.ndarray, batches: int = 10) -> float:
    """Standard error of the mean by batch means.

    Robust for sup-type statistics whose distribution is far from normal;
    falls back to the plain SE when there are too few values.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 2:
        return math.inf
    b = min(batches, n)
    if b < 2:
        return float(np.std(values, ddof=1) / math.sqrt(n))
    cut = (n // b) * b
    means = values[:cut].reshape(b, -1).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(b))
