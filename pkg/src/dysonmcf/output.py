"""Trajectory CSV files and JSON manifests."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__

MANIFEST = "manifest.json"


def trajectory_filename(index: int) -> str:
    return f"traj_{index:05d}.csv"


def write_table(path: Path, header, columns) -> None:
    """Write columns as CSV with 17 significant digits."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def write_record(path: Path, record) -> None:
    write_table(path, ("t",) + tuple(record.columns), [record.times] + list(record.values.T))


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def build_manifest(command: str, cfg: dict, records, files, wall_time: float, extra: dict | None = None) -> dict:
    manifest = {
        "command": command,
        "config": _jsonable(cfg),
        "seed": cfg.get("seed"),
        "n_traj": len(records),
        "stop_reasons": [r.stop_reason for r in records],
        "stopped_at": [r.stopped_at for r in records],
        "files": list(files),
        "artifact_version": __version__,
        "wall_time_s": wall_time,
    }
    if extra:
        manifest.update(_jsonable(extra))
    return manifest


def write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def read_manifest(path: Path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    return json.loads(path.read_text())
