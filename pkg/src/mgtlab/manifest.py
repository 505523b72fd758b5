"""Artifact plumbing: deterministic CSV writers and the run manifest.

CSV files are the determinism contract of the package: the same config and
seed must reproduce them byte for byte.  To that end every float is
serialized with ``repr`` (shortest round-trip form), newlines are fixed to
``\\n``, and row order is whatever the caller's (fixed) reduction order
produced.  Timings and other run-varying facts live only in the manifest,
never in a CSV.

The manifest itself is JSON, written atomically and *last*, so a manifest
on disk implies its artifacts are complete.
"""

from __future__ import annotations

import json
import os
import platform
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__


def format_cell(x) -> str:
    """One CSV cell.  Floats via repr for byte-stable round-trips."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, complex):
        return f"{repr(x.real)}{'+' if x.imag >= 0 else '-'}{repr(abs(x.imag))}j"
    return str(x)


def write_csv(path, header, rows) -> None:
    """Write a deterministic CSV (no quoting; cells must not contain commas)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(c) for c in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return {"fraction": str(obj), "float": float(obj)}
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "__dataclass_fields__"):
        return {k: getattr(obj, k) for k in obj.__dataclass_fields__}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj, *, atomic=False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if atomic:
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def module_versions() -> dict:
    return {
        "mgtlab": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def write_manifest(path, manifest: dict) -> Path:
    """Atomically write the run manifest.  Call this after every other
    artifact is on disk."""
    write_json(path, manifest, atomic=True)
    return Path(path)


def load_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
