"""CSV traces and dictionary snapshots, each with a JSON sidecar."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import KsdtError

TRACE_HEADER = ("step", "dict_size", "ksd", "normalized_ksd", "kernel_evals", "wall_ms")


class OutputError(KsdtError, OSError):
    pass


@dataclass(frozen=True)
class TraceRecord:
    step: int
    dict_size: int
    ksd: float
    normalized_ksd: float
    kernel_evals: int
    wall_ms: int


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(int(value))


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def _write_json(path: Path, payload: dict) -> None:
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_trace(records, path, meta: dict | None = None) -> None:
    """Write records as CSV; ``meta`` (resolved config and seed) goes to
    ``<path>.meta.json``."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            for rec in records:
                writer.writerow([_fmt(getattr(rec, f.name)) for f in fields(TraceRecord)])
    except OSError as exc:
        raise OutputError(f"cannot write trace {path}: {exc}") from exc
    if meta is not None:
        _write_json(sidecar_path(path), meta)


def read_trace(path) -> list[TraceRecord]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != TRACE_HEADER:
                raise OutputError(f"{path}: unexpected header {reader.fieldnames}")
            return [
                TraceRecord(
                    step=int(row["step"]),
                    dict_size=int(row["dict_size"]),
                    ksd=float(row["ksd"]),
                    normalized_ksd=float(row["normalized_ksd"]),
                    kernel_evals=int(row["kernel_evals"]),
                    wall_ms=int(row["wall_ms"]),
                )
                for row in reader
            ]
    except OSError as exc:
        raise OutputError(f"cannot read trace {path}: {exc}") from exc


def write_snapshot(state, path, step: int) -> None:
    """Dump the dictionary, one point per row, plus {size, ksd, step}."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"x{i}" for i in range(state.dim)])
            for p in state.points:
                writer.writerow([_fmt(v) for v in p])
    except OSError as exc:
        raise OutputError(f"cannot write snapshot {path}: {exc}") from exc
    ksd = state.ksd() if len(state) else None
    _write_json(sidecar_path(path), {"size": len(state), "ksd": ksd, "step": step})


def read_snapshot(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    points = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta = json.loads(sidecar_path(path).read_text())
    return points, meta
