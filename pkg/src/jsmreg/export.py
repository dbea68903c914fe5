"""Debug and figure exports: edge overlays, similarity surfaces, maps.

All images are written through :mod:`jsmreg.io`, so ``.pgm`` paths give
raw P5 files and anything else goes through Pillow.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage
from skimage.feature import canny

from .image import RigidTransform, as_image, image_center, warp_image
from .io import normalize_uint8, save_image, to_uint8
from .jsm import JointSaliencyMap
from .saliency import RsvField

CANNY_SIGMA = 1.0
CANNY_QUANTILES = (0.7, 0.9)


def edges(img: np.ndarray, mask=None) -> np.ndarray:
    """Canny edge map: Gaussian sigma 1, Sobel gradients, hysteresis at the
    70th and 90th percentiles of the gradient magnitude."""
    img = as_image(img)
    if np.ptp(img) == 0:
        return np.zeros(img.shape, dtype=bool)
    low, high = CANNY_QUANTILES
    return canny(img, sigma=CANNY_SIGMA, low_threshold=low, high_threshold=high,
                 mask=mask, use_quantiles=True)


def overlay(ref, flt, t: RigidTransform = RigidTransform(), center=None) -> np.ndarray:
    """RGB ``uint8`` overlay of reference edges (red) and floating edges (green).

    The floating image is resampled onto the reference grid through ``t``
    first, so edges that line up add to yellow. The gray base is the
    reference at half brightness.
    """
    ref, flt = as_image(ref), as_image(flt)
    if center is None:
        center = image_center(ref.shape)
    warped, valid = warp_image(flt, t, ref.shape, center)
    red = edges(ref)
    green = edges(warped, mask=valid)
    base = to_uint8(0.5 * ref)
    rgb = np.repeat(base[..., None], 3, axis=2)
    rgb[red | green] = 0
    rgb[red, 0] = 255
    rgb[green, 1] = 255
    return rgb


def edge_agreement(ref_edges: np.ndarray, flt_edges: np.ndarray, radius: int = 1) -> float:
    """Fraction of reference edge pixels with a floating edge within ``radius`` px."""
    if not ref_edges.any():
        return 0.0
    near = ndimage.binary_dilation(flt_edges, np.ones((2 * radius + 1,) * 2, dtype=bool))
    return float((near & ref_edges).sum() / ref_edges.sum())


def surface_csv(grid: np.ndarray) -> str:
    """One CSV row per grid row; missing values are left empty."""
    rows = []
    for row in np.asarray(grid, dtype=np.float64):
        rows.append(",".join("" if not np.isfinite(v) else repr(float(v)) for v in row))
    return "\n".join(rows) + "\n"


def export_surface(grid: np.ndarray, stem) -> list[Path]:
    """Write ``<stem>.csv``, ``<stem>.pgm`` (normalized heatmap, missing = 0)
    and ``<stem>_mask.pgm`` (255 where a value is missing)."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("empty surface grid")
    stem = Path(stem)
    csv_path = stem.with_suffix(".csv")
    pgm_path = stem.with_suffix(".pgm")
    mask_path = stem.with_name(stem.name + "_mask.pgm")
    csv_path.write_text(surface_csv(grid))
    save_image(pgm_path, normalize_uint8(grid))
    save_image(mask_path, np.where(np.isfinite(grid), 0, 255).astype(np.uint8))
    return [csv_path, pgm_path, mask_path]


def export_saliency(field: RsvField, path) -> None:
    save_image(path, normalize_uint8(field.saliency))


def rsv_table(field: RsvField) -> str:
    """Valid RSVs as ``x y vx vy saliency`` lines, row-major."""
    ys, xs = np.nonzero(field.valid)
    lines = ["# x y vx vy saliency"]
    for x, y in zip(xs, ys):
        vx, vy = field.vectors[y, x]
        lines.append(f"{x} {y} {vx:.9f} {vy:.9f} {field.saliency[y, x]:.9g}")
    return "\n".join(lines) + "\n"


def export_jsm(jsm: JointSaliencyMap, path) -> None:
    save_image(path, normalize_uint8(jsm.weights))
