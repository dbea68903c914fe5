"""Reading and writing grayscale images (binary PGM and PNG)."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

_PGM_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)"
                         rb"\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_pgm_raw(path) -> np.ndarray:
    """Raw integer samples of a binary (P5) PGM file, ``uint8`` or ``uint16``."""
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if m is None:
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    w, h, maxval = (int(g) for g in m.groups())
    if not 0 < maxval < 65536:
        raise ValueError(f"{path}: bad maxval {maxval}")
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    n = w * h * dtype.itemsize
    body = data[m.end():m.end() + n]
    if len(body) != n:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=dtype).reshape(h, w).astype(
        np.uint8 if maxval < 256 else np.uint16)


def write_pgm_raw(path, data: np.ndarray) -> None:
    """Write 8-bit (or 16-bit) integer samples as a binary PGM."""
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError("PGM data must be 2D")
    if data.dtype == np.uint8:
        maxval, body = 255, data.tobytes()
    elif data.dtype == np.uint16:
        maxval, body = 65535, data.astype(">u2").tobytes()
    else:
        raise TypeError(f"unsupported PGM dtype {data.dtype}")
    h, w = data.shape
    Path(path).write_bytes(b"P5\n%d %d\n%d\n" % (w, h, maxval) + body)


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize ``[0, 1]`` intensities to 8 bits (values outside are clipped)."""
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def normalize_uint8(values: np.ndarray) -> np.ndarray:
    """Min-max stretch to 0..255; a constant map becomes mid-gray (128)."""
    values = np.asarray(values, dtype=np.float64)
    finite = np.isfinite(values)
    out = np.zeros(values.shape, dtype=np.uint8)
    if not finite.any():
        return out
    lo, hi = values[finite].min(), values[finite].max()
    if hi == lo:
        out[finite] = 128
    else:
        out[finite] = np.round((values[finite] - lo) / (hi - lo) * 255.0).astype(np.uint8)
    return out


def load_image(path) -> np.ndarray:
    """Load a PGM or PNG file as a float image rescaled to ``[0, 1]``.

    Color inputs are reduced to gray by averaging the channels.
    """
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        raw = read_pgm_raw(path)
        scale = 255.0 if raw.dtype == np.uint8 else 65535.0
        return raw.astype(np.float64) / scale
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim == 3:
        arr = arr[..., :3].astype(np.float64).mean(axis=2)
    scale = 65535.0 if arr.dtype == np.uint16 or arr.max() > 255 else 255.0
    return arr.astype(np.float64) / scale


def save_image(path, img: np.ndarray) -> None:
    """Save a ``[0, 1]`` float image, or a ``uint8`` gray/RGB array, as PGM or PNG."""
    path = Path(path)
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        arr = to_uint8(arr)
    if path.suffix.lower() == ".pgm" and arr.ndim == 2:
        write_pgm_raw(path, arr)
        return
    from PIL import Image as PILImage

    PILImage.fromarray(arr).save(path)
