"""Canonical report emission: sorted keys, 6-significant-digit floats.

Two runs over identical inputs must produce byte-identical files, so
reports carry no timestamps and float formatting is fixed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence


def _round_floats(value: Any) -> Any:
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"reports must not contain non-finite floats: {value!r}")
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {str(key): _round_floats(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(item) for item in value]
    return value


def canonical_json(payload: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed floats, trailing newline."""
    return (
        json.dumps(_round_floats(payload), sort_keys=True, indent=2, ensure_ascii=False)
        + "\n"
    )


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class ReportBundle:
    """One command's auditable output: what ran, on what, with what result."""

    command: str
    config: Mapping[str, Any]
    version: str
    input_digests: Mapping[str, str]
    result: Any

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": dict(self.config),
            "version": self.version,
            "inputs": dict(self.input_digests),
            "result": self.result,
        }


def emit_report(bundle: ReportBundle, path: str | Path) -> int:
    """Write the canonical JSON form; returns the byte count."""
    data = canonical_json(bundle.to_dict()).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return len(data)


def write_heatmap_csv(
    path: str | Path,
    row_ids: Sequence[str],
    col_ids: Sequence[str],
    matrix: Sequence[Sequence[float | None]],
) -> None:
    """Rectangular CSV with id headers on both axes."""
    if len(matrix) != len(row_ids) or any(len(row) != len(col_ids) for row in matrix):
        raise ValueError("heatmap matrix shape does not match its headers")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([""] + list(col_ids))
    for row_id, row in zip(row_ids, matrix):
        writer.writerow(
            [row_id] + ["" if value is None else f"{value:.6g}" for value in row]
        )
    Path(path).write_text(buffer.getvalue(), encoding="utf-8")
