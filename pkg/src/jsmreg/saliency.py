"""Multiscale intensity-contrast saliency and regional saliency vectors.

The saliency of a pixel is the sum of squared intensity differences to its
8-connected neighbors, accumulated over a Gaussian pyramid. The regional
saliency vector (RSV) of a pixel is the major principal axis of the saliency
mass inside a disc of radius 5.5 pixels around it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .image import GaussianPyramid, as_image, build_pyramid, upsample_to

REGION_RADIUS = 5.5
SALIENCY_THRESHOLD = 0.1
ISOTROPY_RTOL = 1e-6


@dataclass(frozen=True)
class RsvField:
    """Per-pixel RSVs co-registered with their saliency map.

    ``vectors`` has shape ``(h, w, 2)`` holding unit ``(vx, vy)`` where
    ``valid`` is set and zeros elsewhere.
    """

    saliency: np.ndarray
    vectors: np.ndarray
    valid: np.ndarray

    @property
    def shape(self):
        return self.saliency.shape


def local_saliency(img) -> np.ndarray:
    """Sum of squared differences to the in-bounds 8-connected neighbors."""
    img = as_image(img)
    h, w = img.shape
    out = np.zeros_like(img)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            vy = slice(max(0, -dy), h - max(0, dy))
            vx = slice(max(0, -dx), w - max(0, dx))
            uy = slice(max(0, dy), h - max(0, -dy))
            ux = slice(max(0, dx), w - max(0, -dx))
            d = img[vy, vx] - img[uy, ux]
            out[vy, vx] += d * d
    return out


def multiscale_saliency(pyr: GaussianPyramid) -> np.ndarray:
    """Local saliency of every pyramid level, magnified to level 0 and summed."""
    h, w = pyr[0].shape
    total = local_saliency(pyr[0])
    for level in pyr.levels[1:]:
        total += upsample_to(local_saliency(level), w, h)
    return total


def disc_offsets(radius: float = REGION_RADIUS) -> tuple[np.ndarray, np.ndarray]:
    """Integer offsets ``(dx, dy)`` with ``dx**2 + dy**2 <= radius**2``."""
    r = int(np.floor(radius))
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    inside = dx * dx + dy * dy <= radius * radius
    return dx[inside], dy[inside]


def inertia_matrix(s: np.ndarray, v, radius: float = REGION_RADIUS) -> np.ndarray:
    """Central second moments of saliency in the disc around pixel ``v = (x, y)``.

    The disc is clipped to the image. Returns ``[[mu20, mu11], [mu11, mu02]]``,
    or the zero matrix when the disc carries no saliency.
    """
    vx, vy = int(v[0]), int(v[1])
    h, w = s.shape
    dx, dy = disc_offsets(radius)
    keep = (vx + dx >= 0) & (vx + dx < w) & (vy + dy >= 0) & (vy + dy < h)
    dx, dy = dx[keep].astype(np.float64), dy[keep].astype(np.float64)
    mass = s[vy + dy.astype(int), vx + dx.astype(int)]
    m00 = mass.sum()
    if m00 == 0:
        return np.zeros((2, 2))
    gx = (dx * mass).sum() / m00
    gy = (dy * mass).sum() / m00
    mu20 = ((dx - gx) ** 2 * mass).sum()
    mu02 = ((dy - gy) ** 2 * mass).sum()
    mu11 = ((dx - gx) * (dy - gy) * mass).sum()
    return np.array([[mu20, mu11], [mu11, mu02]])


def inertia_fields(s: np.ndarray, radius: float = REGION_RADIUS):
    """``(mu20, mu11, mu02)`` for every pixel at once, via disc correlations."""
    r = int(np.floor(radius))
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    disc = (dx * dx + dy * dy <= radius * radius).astype(np.float64)

    def moment(kernel):
        return ndimage.correlate(s, kernel, mode="constant", cval=0.0)

    m00 = moment(disc)
    m10 = moment(disc * dx)
    m01 = moment(disc * dy)
    m20 = moment(disc * dx * dx)
    m02 = moment(disc * dy * dy)
    m11 = moment(disc * dx * dy)
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(m00 > 0, 1.0 / m00, 0.0)
    mu20 = np.maximum(m20 - m10 * m10 * inv, 0.0)
    mu02 = np.maximum(m02 - m01 * m01 * inv, 0.0)
    mu11 = m11 - m10 * m01 * inv
    zero = m00 <= 0
    mu20[zero] = mu02[zero] = mu11[zero] = 0.0
    return mu20, mu11, mu02


def principal_axes(a, b, c, rtol: float = ISOTROPY_RTOL):
    """Major eigenvectors of the symmetric matrices ``[[a, b], [b, c]]``.

    Returns ``(vectors, ok)`` where ``vectors`` has a trailing axis of 2.
    Zero and isotropic matrices (relative eigenvalue gap below ``rtol``)
    are flagged not ok. Signs are canonical: first nonzero component > 0.
    """
    a, b, c = np.broadcast_arrays(*(np.asarray(x, dtype=np.float64) for x in (a, b, c)))
    mats = np.empty(a.shape + (2, 2))
    mats[..., 0, 0] = a
    mats[..., 0, 1] = mats[..., 1, 0] = b
    mats[..., 1, 1] = c
    evals, evecs = np.linalg.eigh(mats)
    scale = np.abs(evals).max(axis=-1)
    ok = (scale > 0) & (evals[..., 1] - evals[..., 0] > rtol * scale)
    vec = evecs[..., :, 1]
    vec = vec / np.linalg.norm(vec, axis=-1, keepdims=True)
    flip = (vec[..., 0] < 0) | ((vec[..., 0] == 0) & (vec[..., 1] < 0))
    vec = np.where(flip[..., None], -vec, vec)
    vec = np.where(ok[..., None], vec, 0.0)
    return vec, ok


def rsv(m) -> Optional[np.ndarray]:
    """Unit eigenvector of the larger eigenvalue of 2x2 symmetric ``m``, or ``None``."""
    m = np.asarray(m, dtype=np.float64)
    vec, ok = principal_axes(m[0, 0], m[0, 1], m[1, 1])
    return vec if bool(ok) else None


def build_rsv_field(img, pyramid_levels: Optional[int] = 3,
                    threshold: float = SALIENCY_THRESHOLD) -> RsvField:
    """Saliency map and RSV field of ``img``.

    Pixels with saliency below ``threshold`` times the map maximum are left
    invalid without eigen-analysis, as are pixels with isotropic structure.
    """
    img = as_image(img)
    sal = multiscale_saliency(build_pyramid(img, pyramid_levels))
    smax = sal.max()
    vectors = np.zeros(img.shape + (2,))
    valid = np.zeros(img.shape, dtype=bool)
    if smax > 0:
        candidates = sal >= threshold * smax
        mu20, mu11, mu02 = inertia_fields(sal)
        vec, ok = principal_axes(mu20[candidates], mu11[candidates], mu02[candidates])
        vectors[candidates] = vec
        valid[candidates] = ok
    for arr in (sal, vectors, valid):
        arr.setflags(write=False)
    return RsvField(sal, vectors, valid)
