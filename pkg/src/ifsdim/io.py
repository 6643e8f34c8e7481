"""File output: commented CSV, JSON with an embedded meta block, and the
binary measure snapshot (magic IFSM, little-endian).

Writes are atomic (temp file in the target directory, then rename) and
contain no timestamps, so identical runs produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import sys
import tempfile
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .simulate import EmpiricalMeasure, Trajectory

VERSION = "0.1.0"
SNAPSHOT_MAGIC = b"IFSM"
SNAPSHOT_VERSION = 1


def config_hash(effective: dict) -> str:
    blob = json.dumps(effective, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def header_lines(effective: dict, seed: int) -> list[str]:
    compact = json.dumps(effective, sort_keys=True, separators=(",", ":"), default=str)
    return [
        f"# ifsdim {VERSION}",
        f"# config_hash={config_hash(effective)}",
        f"# seed={seed}",
        f"# config={compact}",
    ]


def fmt(x) -> str:
    """Shortest round-trip decimal form; deterministic."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-ifsdim-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_bytes(path: str, blob: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-ifsdim-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(out: Optional[str], headers: Sequence[str], columns: Sequence[str],
              rows: Iterable[Sequence]) -> None:
    lines = list(headers)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out:
        _atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def write_json(out: Optional[str], payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False, default=_json_default) + "\n"
    if out:
        _atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def trajectory_rows(traj: Trajectory):
    d = traj.d
    for t in range(len(traj)):
        row = [t]
        row.extend(traj.points[t, j] for j in range(d))
        row.append(int(traj.symbols[t]))
        row.append(traj.log_deriv[t])
        row.append(traj.log_prob[t])
        yield row


def trajectory_columns(d: int) -> list[str]:
    return ["step"] + [f"x{j+1}" for j in range(d)] + ["symbol", "log_deriv", "log_prob"]


def measure_rows(measure: EmpiricalMeasure):
    for i in range(measure.n):
        yield list(measure.points[i]) + [measure.weights[i]]


def measure_columns(d: int) -> list[str]:
    return [f"x{j+1}" for j in range(d)] + ["weight"]


def save_measure(measure: EmpiricalMeasure, path: str) -> None:
    """Binary snapshot: magic 'IFSM', u32 version, u32 d, u64 count, then
    little-endian float64 points (row-major) and weights."""
    head = SNAPSHOT_MAGIC + struct.pack("<IIQ", SNAPSHOT_VERSION, measure.d, measure.n)
    body = measure.points.astype("<f8").tobytes() + measure.weights.astype("<f8").tobytes()
    _atomic_write_bytes(path, head + body)


def load_measure(path: str) -> EmpiricalMeasure:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != SNAPSHOT_MAGIC:
        raise ConfigError(f"{path}: not a measure snapshot (bad magic)")
    version, d, count = struct.unpack("<IIQ", blob[4:20])
    if version != SNAPSHOT_VERSION:
        raise ConfigError(f"{path}: unsupported snapshot version {version}")
    need = 20 + count * d * 8 + count * 8
    if len(blob) != need:
        raise ConfigError(f"{path}: truncated snapshot ({len(blob)} bytes, expected {need})")
    pts = np.frombuffer(blob, dtype="<f8", count=count * d, offset=20).reshape(count, d)
    weights = np.frombuffer(blob, dtype="<f8", count=count, offset=20 + count * d * 8)
    return EmpiricalMeasure(pts.astype(float), weights.astype(float))
