"""Images, rigid transforms, bilinear sampling and Gaussian pyramids.

Images are plain 2D ``float64`` numpy arrays indexed ``img[y, x]`` (row,
column). All geometry uses continuous ``(x, y)`` coordinates where ``x`` is
the column and ``y`` the row, with pixel centers on integers.

Rotation convention
-------------------
A :class:`RigidTransform` ``(tx, ty, beta)`` maps a point ``p`` to::

    R(beta) @ (p - center) + center + (tx, ty)

with ``R(beta) = [[cos, -sin], [sin, cos]]`` acting on ``(x, y)``. Because
``y`` grows downwards, a positive ``beta`` turns the x axis towards the y
axis (counterclockwise in image coordinates, clockwise on screen). Every
module in the package uses this single definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

BINOMIAL_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
MIN_PYRAMID_SIDE = 32
MAX_PYRAMID_LEVELS = 4


def as_image(data) -> np.ndarray:
    """Validate and convert ``data`` to a finite, non-empty 2D float image."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {img.shape}")
    if img.size == 0:
        raise ValueError("empty image")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite intensities")
    return img


def image_center(shape) -> tuple[float, float]:
    """Continuous center ``((w-1)/2, (h-1)/2)`` of an image of ``shape``."""
    h, w = shape[:2]
    return ((w - 1) / 2.0, (h - 1) / 2.0)


@dataclass(frozen=True)
class RigidTransform:
    """Rigid motion: translation in pixels, rotation ``beta`` in degrees."""

    tx: float = 0.0
    ty: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        # plain floats keep reprs and serialized records free of numpy types
        for name in ("tx", "ty", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, params) -> "RigidTransform":
        tx, ty, beta = (float(v) for v in params)
        return cls(tx, ty, beta)

    def as_array(self) -> np.ndarray:
        return np.array([self.tx, self.ty, self.beta], dtype=np.float64)

    def rotation_matrix(self) -> np.ndarray:
        b = math.radians(self.beta)
        c, s = math.cos(b), math.sin(b)
        return np.array([[c, -s], [s, c]])

    def inverse(self) -> "RigidTransform":
        """Inverse about the same center.

        ``p = R(q - c) + c + t`` inverts to ``q = R^-1 (p - c) + c - R^-1 t``.
        """
        r_inv = self.rotation_matrix().T
        t = -r_inv @ np.array([self.tx, self.ty])
        return RigidTransform(float(t[0]), float(t[1]), -self.beta)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return ``self o other`` (apply ``other`` first), same center."""
        r = self.rotation_matrix()
        t = r @ np.array([other.tx, other.ty]) + np.array([self.tx, self.ty])
        return RigidTransform(float(t[0]), float(t[1]), self.beta + other.beta)

    def scaled(self, factor: float) -> "RigidTransform":
        """Same motion expressed on a grid ``factor`` times finer."""
        return RigidTransform(self.tx * factor, self.ty * factor, self.beta)

    def __str__(self) -> str:
        return f"({self.tx:.4f}, {self.ty:.4f}, {self.beta:.4f} deg)"


def apply_transform(t: RigidTransform, p, center=(0.0, 0.0)) -> np.ndarray:
    """Map point(s) ``p`` (``(..., 2)`` as ``(x, y)``) through ``t`` about ``center``."""
    p = np.asarray(p, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)
    return (p - c) @ t.rotation_matrix().T + c + np.array([t.tx, t.ty])


def transform_grid(t: RigidTransform, shape, center=None) -> tuple[np.ndarray, np.ndarray]:
    """Transformed coordinates ``(xs, ys)`` of every pixel of a grid of ``shape``."""
    h, w = shape
    if center is None:
        center = image_center(shape)
    cx, cy = center
    r = t.rotation_matrix()
    x = np.arange(w, dtype=np.float64) - cx
    y = np.arange(h, dtype=np.float64) - cy
    xs = r[0, 0] * x[None, :] + r[0, 1] * y[:, None] + cx + t.tx
    ys = r[1, 0] * x[None, :] + r[1, 1] * y[:, None] + cy + t.ty
    return xs, ys


# Positions within this distance outside the grid are snapped back onto it;
# absorbs round-off from the rotation about the center.
_DOMAIN_TOL = 1e-6


def bilinear_setup(shape, xs, ys):
    """Neighbor indices and fractional offsets for bilinear lookups.

    Returns ``(valid, x0, y0, x1, y1, fx, fy)`` where all arrays are flattened
    to the valid positions only. The valid domain is the closed rectangle
    ``[0, w-1] x [0, h-1]``: all four neighbors must exist.
    """
    h, w = shape
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    valid = ((xs >= -_DOMAIN_TOL) & (xs <= w - 1 + _DOMAIN_TOL)
             & (ys >= -_DOMAIN_TOL) & (ys <= h - 1 + _DOMAIN_TOL))
    x = np.clip(xs[valid], 0.0, w - 1)
    y = np.clip(ys[valid], 0.0, h - 1)
    x0 = np.clip(np.floor(x).astype(np.intp), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.intp), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    return valid, x0, y0, x1, y1, fx, fy


def sample_bilinear_many(img: np.ndarray, xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear samples of ``img`` at ``(xs, ys)``.

    Returns ``(values, valid)`` with the shape of ``xs``; invalid positions
    hold ``nan`` in ``values``.
    """
    valid, x0, y0, x1, y1, fx, fy = bilinear_setup(img.shape, xs, ys)
    out = np.full(np.shape(xs), np.nan)
    out[valid] = ((1 - fx) * (1 - fy) * img[y0, x0] + fx * (1 - fy) * img[y0, x1]
                  + (1 - fx) * fy * img[y1, x0] + fx * fy * img[y1, x1])
    return out, valid


def sample_bilinear(img: np.ndarray, p) -> Optional[float]:
    """Intensity at continuous point ``p = (x, y)``, or ``None`` outside the image."""
    vals, valid = sample_bilinear_many(img, np.array([p[0]]), np.array([p[1]]))
    return float(vals[0]) if valid[0] else None


def warp_image(flt: np.ndarray, t: RigidTransform, shape=None, center=None):
    """Resample ``flt`` onto a reference grid through ``t`` (ref -> flt).

    Returns ``(warped, valid)``; pixels mapping outside ``flt`` are 0 and
    flagged invalid.
    """
    if shape is None:
        shape = flt.shape
    xs, ys = transform_grid(t, shape, center)
    vals, valid = sample_bilinear_many(flt, xs, ys)
    return np.where(valid, vals, 0.0), valid


def smooth_binomial(img: np.ndarray) -> np.ndarray:
    """Separable [1,4,6,4,1]/16 smoothing with mirrored borders."""
    out = ndimage.correlate1d(img, BINOMIAL_KERNEL, axis=0, mode="reflect")
    return ndimage.correlate1d(out, BINOMIAL_KERNEL, axis=1, mode="reflect")


def pyramid_depth(shape, num_levels: Optional[int] = None,
                  min_side: int = MIN_PYRAMID_SIDE) -> int:
    """Number of levels such that the coarsest stays at least ``min_side``.

    ``None`` requests the default depth, capped at ``MAX_PYRAMID_LEVELS``.
    Images already smaller than ``min_side`` get a single level.
    """
    if num_levels is None:
        num_levels = MAX_PYRAMID_LEVELS
    if num_levels < 1:
        raise ValueError("num_levels must be >= 1")
    h, w = shape
    levels = 1
    while levels < num_levels:
        h, w = -(-h // 2), -(-w // 2)
        if min(h, w) < min_side:
            break
        levels += 1
    return levels


@dataclass(frozen=True)
class GaussianPyramid:
    """Level 0 is the finest; each level halves (ceil) the previous one."""

    levels: tuple

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.levels[k]


def build_pyramid(img, num_levels: Optional[int] = None) -> GaussianPyramid:
    """Gaussian pyramid; ``num_levels`` is clamped so the coarsest side is >= 32."""
    img = as_image(img)
    n = pyramid_depth(img.shape, num_levels)
    levels = [img]
    for _ in range(n - 1):
        levels.append(smooth_binomial(levels[-1])[::2, ::2].copy())
    for lvl in levels:
        lvl.setflags(write=False)
    return GaussianPyramid(tuple(levels))


def upsample_to(img: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Bilinear magnification with corner-aligned coordinates."""
    h, w = img.shape
    if target_w < w or target_h < h:
        raise ValueError(f"target {target_w}x{target_h} smaller than source {w}x{h}")
    if (target_w, target_h) == (w, h):
        return img.copy()
    ys = np.linspace(0.0, h - 1, target_h) if target_h > 1 else np.zeros(1)
    xs = np.linspace(0.0, w - 1, target_w) if target_w > 1 else np.zeros(1)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return ndimage.map_coordinates(img, [yy, xx], order=1, mode="nearest")
