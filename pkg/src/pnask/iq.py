"""Raw I/Q files: interleaved little-endian float32 ``(re, im)`` pairs.

Metadata lives in a JSON sidecar next to the data file (``<path>.json``).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

IQ_DTYPE = np.dtype("<f4")
FORMAT_NAME = "cf32_le"
DEFAULT_SAMPLE_RATE = 0.5e6
DEFAULT_CENTER_FREQUENCY = 2.432e9


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_iq(
    path,
    samples,
    sample_rate: float = DEFAULT_SAMPLE_RATE,
    center_frequency: float = DEFAULT_CENTER_FREQUENCY,
    **extra,
) -> Path:
    x = np.asarray(samples, dtype=np.complex128).ravel()
    interleaved = np.empty(2 * x.size, dtype=IQ_DTYPE)
    interleaved[0::2] = x.real
    interleaved[1::2] = x.imag
    path = Path(path)
    path.write_bytes(interleaved.tobytes())
    meta = {
        "format": FORMAT_NAME,
        "sample_rate": float(sample_rate),
        "center_frequency": float(center_frequency),
        "count": int(x.size),
        **extra,
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_iq(path) -> tuple[np.ndarray, dict]:
    """Return ``(complex64 samples, metadata)``; the sidecar is optional."""
    path = Path(path)
    raw = np.frombuffer(path.read_bytes(), dtype=IQ_DTYPE)
    if raw.size % 2:
        raise ValueError(f"{path}: odd number of float32 values, not an I/Q pair stream")
    samples = (raw[0::2] + 1j * raw[1::2]).astype(np.complex64)
    side = sidecar_path(path)
    meta = json.loads(side.read_text()) if side.exists() else {}
    if meta.get("count", samples.size) != samples.size:
        raise ValueError(f"{path}: sidecar count {meta['count']} != {samples.size} samples")
    return samples, meta
