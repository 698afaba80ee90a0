"""Checkpoint files and JSON text form for nodal and spectral fields.

Binary layout: one ASCII line ``SSNLSE1 <json header>\\n`` followed by the
field data as interleaved little-endian float64 ``(re, im)`` pairs.  The
header always carries ``a``, ``b``, ``N`` and ``representation``
(``"nodal"`` or ``"spectral"``); simulation checkpoints add
``step_index``, ``time`` and ``scheme``.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .grid import ConfigurationError, Grid1D, NodalField, SpectralField

__all__ = ["save_field", "load_field", "field_to_json", "field_from_json"]

MAGIC = b"SSNLSE1 "
_DTYPE = np.dtype("<f8")


def _header(field, extra) -> dict:
    g = field.grid
    rep = "nodal" if isinstance(field, NodalField) else "spectral"
    head = {"a": g.a, "b": g.b, "N": g.N, "representation": rep}
    for k, v in (extra or {}).items():
        if k in head:
            raise ConfigurationError(f"header key {k!r} is reserved")
        head[k] = v
    return head


def _data(field) -> np.ndarray:
    return field.values if isinstance(field, NodalField) else field.coefficients


def _build(head: dict, data: np.ndarray):
    grid = Grid1D(head["a"], head["b"], head["N"])
    rep = head["representation"]
    if rep == "nodal":
        return NodalField(grid, data)
    if rep == "spectral":
        return SpectralField(grid, data)
    raise ConfigurationError(f"unknown representation {rep!r}")


def save_field(path, field, extra: dict | None = None) -> Path:
    """Write ``field`` atomically (temporary file, then rename)."""
    path = Path(path)
    head = json.dumps(_header(field, extra), sort_keys=True).encode("ascii")
    data = _data(field)
    inter = np.empty(2 * data.size, dtype=_DTYPE)
    inter[0::2] = data.real
    inter[1::2] = data.imag
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC + head + b"\n")
            fh.write(inter.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_field(path):
    """Return ``(field, header)``."""
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise ConfigurationError(f"{path}: not a field checkpoint")
    end = raw.index(b"\n")
    head = json.loads(raw[len(MAGIC):end].decode("ascii"))
    inter = np.frombuffer(raw[end + 1:], dtype=_DTYPE)
    data = inter[0::2] + 1j * inter[1::2]
    return _build(head, data), head


def field_to_json(field, extra: dict | None = None) -> str:
    head = _header(field, extra)
    data = _data(field)
    head["data"] = [[float(z.real), float(z.imag)] for z in data]
    return json.dumps(head, sort_keys=True)


def field_from_json(text: str):
    head = json.loads(text)
    pairs = np.asarray(head.pop("data"), dtype=float).reshape(-1, 2)
    return _build(head, pairs[:, 0] + 1j * pairs[:, 1]), head
