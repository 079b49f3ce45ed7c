"""Trace files: comma-separated text with a metadata comment line.

Layout:

    # spinpoint-trace schema=<name> config=<hash>
    t,qx,qy,qz,wx,wy,wz,spin,psi,V,dist_desired,dist_antipodal[,extras...]
    <rows>

Floats are printed with 17 significant digits, so a read-back reproduces
every value bit-exactly. Writes go through a temporary file in the target
directory followed by an atomic rename; a failed write leaves nothing
behind.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from .integrator import FlowTrace

__all__ = ["FLOW_COLUMNS", "write_trace", "read_trace"]

FLOW_COLUMNS = ("t", "qx", "qy", "qz", "wx", "wy", "wz",
                "spin", "psi", "V", "dist_desired", "dist_antipodal")
SCHEMA_FLOW = "flow-1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _columns_of(trace: FlowTrace) -> Dict[str, np.ndarray]:
    cols = {
        "t": trace.t,
        "qx": trace.q[:, 0], "qy": trace.q[:, 1], "qz": trace.q[:, 2],
        "wx": trace.w[:, 0], "wy": trace.w[:, 1], "wz": trace.w[:, 2],
        "spin": trace.spin, "psi": trace.psi, "V": trace.V,
        "dist_desired": trace.dist_desired, "dist_antipodal": trace.dist_antipodal,
    }
    for name, arr in trace.extra.items():
        if name in cols:
            raise ValueError(f"extra column shadows a schema column: {name}")
        cols[name] = np.asarray(arr, dtype=float)
    return cols


def write_trace(trace: FlowTrace, path: str | Path, config_hash: str = "none") -> None:
    """Write a trace atomically; extras in `trace.extra` append columns."""
    path = Path(path)
    cols = _columns_of(trace)
    names = list(FLOW_COLUMNS) + [n for n in cols if n not in FLOW_COLUMNS]
    n = len(trace.t)
    for name in names:
        if len(cols[name]) != n:
            raise ValueError(f"column {name} has length {len(cols[name])}, expected {n}")
    schema = SCHEMA_FLOW if len(names) == len(FLOW_COLUMNS) else "sim-1"
    lines = [f"# spinpoint-trace schema={schema} config={config_hash}",
             ",".join(names)]
    data = [cols[name] for name in names]
    for i in range(n):
        lines.append(",".join(_fmt(col[i]) for col in data))
    payload = "\n".join(lines) + "\n"

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def read_trace(path: str | Path) -> Tuple[Dict[str, np.ndarray], Dict[str, str]]:
    """Read a trace file; returns (columns, metadata)."""
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# spinpoint-trace"):
        raise ValueError(f"{path}: not a trace file")
    meta = dict(item.split("=", 1) for item in lines[0][2:].split()[1:])
    names = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(names)))
    if rows and data.shape[1] != len(names):
        raise ValueError(f"{path}: inconsistent column count")
    return {name: data[:, j] for j, name in enumerate(names)}, meta
