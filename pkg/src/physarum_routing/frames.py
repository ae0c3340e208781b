"""8-bit binary PGM frames with a per-frame linear scale sidecar."""
from __future__ import annotations

import os
import re

import numpy as np


def frame_name(kind: str, step: int) -> str:
    kind = re.sub(r"[^A-Za-z0-9_.-]+", "_", kind)
    return f"frame_{kind}_{step:06d}"


def to_bytes(values) -> tuple[np.ndarray, float]:
    """Scale to 0..255 so the frame maximum maps to 255. Returns (pixels, scale)."""
    a = np.asarray(values, dtype=np.float64)
    if a.dtype == bool:
        a = a.astype(np.float64)
    top = float(a.max()) if a.size else 0.0
    scale = 255.0 / top if top > 0 else 0.0
    px = np.clip(np.rint(np.clip(a, 0.0, None) * scale), 0, 255).astype(np.uint8)
    return px, scale


def encode_pgm(pixels: np.ndarray) -> bytes:
    h, w = pixels.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def decode_pgm(data: bytes) -> np.ndarray:
    """Inverse of ``encode_pgm`` for the header layout written here."""
    magic, dims, maxval, body = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit P5 frame")
    w, h = map(int, dims.split())
    return np.frombuffer(body, dtype=np.uint8, count=w * h).reshape(h, w)


def write_frame(directory, kind: str, step: int, values) -> str:
    """Write ``<name>.pgm`` plus ``<name>.txt`` holding the scale factor."""
    px, scale = to_bytes(values)
    stem = os.path.join(directory, frame_name(kind, step))
    with open(stem + ".pgm", "wb") as fh:
        fh.write(encode_pgm(px))
    with open(stem + ".txt", "w") as fh:
        fh.write(f"scale {scale!r}\nmax {float(np.max(values)) if np.size(values) else 0.0!r}\n")
    return stem + ".pgm"
