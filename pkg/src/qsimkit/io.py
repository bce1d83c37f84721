"""Atomic file output and JSON helpers."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

OUTPUT_DIR_ENV = "QSIMKIT_OUTPUT_DIR"


def resolve_output(path) -> Path:
    """Relative paths are placed under ``$QSIMKIT_OUTPUT_DIR`` when it is set."""
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def atomic_write(path, text: str) -> Path:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = resolve_output(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(data) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(data, indent=2, default=_default, allow_nan=False)


def complex_matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m]


def complex_matrix_from_json(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("expected a list of rows")
    out = np.empty((len(rows), len(rows[0])), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != out.shape[1]:
            raise ValueError("ragged matrix")
        for j, z in enumerate(row):
            if isinstance(z, dict):
                out[i, j] = complex(float(z.get("re", 0.0)), float(z.get("im", 0.0)))
            else:
                out[i, j] = complex(z)
    return out
