"""Seeded synthetic registration pairs with known ground truth.

The base image is a procedural texture (smooth background gradient,
Gaussian blobs, anti-aliased ellipses and bars). It is rendered on a padded
canvas; the reference is the central crop and the floating image is the
canvas resampled through the ground-truth transform, so that
``flt(t(v)) == ref(v)`` for every reference pixel ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import ndimage

from .image import RigidTransform, image_center, sample_bilinear_many, transform_grid

INTENSITY_RANGE = (0.05, 0.8)
EDGE_BLUR = 1.0


@dataclass(frozen=True)
class OutlierSpec:
    """A structure pasted into one image only.

    ``center`` is in pixels of the receiving image; ``value`` is the patch
    intensity. ``shape`` is ``"rect"`` (``size = (w, h)``) or ``"disc"``
    (``size[0]`` is the diameter).
    """

    center: tuple = (100.0, 100.0)
    size: tuple = (60, 60)
    value: float = 1.0
    shape: str = "rect"
    target: str = "flt"

    def area(self) -> float:
        if self.shape == "disc":
            return float(np.pi * (self.size[0] / 2.0) ** 2)
        return float(self.size[0] * self.size[1])

    def mask(self, shape) -> np.ndarray:
        h, w = shape
        yy, xx = np.mgrid[0:h, 0:w]
        cx, cy = self.center
        if self.shape == "disc":
            r = self.size[0] / 2.0
            return (xx - cx + 0.5) ** 2 + (yy - cy + 0.5) ** 2 <= r * r
        if self.shape != "rect":
            raise ValueError(f"unknown outlier shape {self.shape!r}")
        x0 = int(round(cx - self.size[0] / 2.0))
        y0 = int(round(cy - self.size[1] / 2.0))
        m = np.zeros(shape, dtype=bool)
        m[max(y0, 0):max(y0 + self.size[1], 0), max(x0, 0):max(x0 + self.size[0], 0)] = True
        return m


@dataclass(frozen=True)
class SyntheticCase:
    """Everything needed to regenerate a pair byte for byte."""

    case_id: str = "case"
    seed: int = 0
    width: int = 256
    height: int = 256
    truth: RigidTransform = field(default_factory=RigidTransform)
    outlier: Optional[OutlierSpec] = None
    noise: float = 0.0
    gain: float = 1.0
    bias: float = 0.0
    illumination_target: str = "flt"
    padding: int = 48


@dataclass(frozen=True)
class SyntheticPair:
    ref: np.ndarray
    flt: np.ndarray
    truth: RigidTransform
    flt_valid: np.ndarray  # False where the floating image was resampled from outside the canvas


def render_texture(width: int, height: int, rng: np.random.Generator) -> np.ndarray:
    """Procedural test texture with values in ``INTENSITY_RANGE``."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = rng.uniform(-0.3, 0.3) * xx / width + rng.uniform(-0.3, 0.3) * yy / height
    area = width * height / 256.0 ** 2

    for _ in range(int(round(25 * area))):
        cx, cy = rng.uniform(0, width), rng.uniform(0, height)
        sigma = rng.uniform(4.0, 18.0)
        img += rng.uniform(-0.6, 0.6) * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma ** 2))

    for _ in range(int(round(18 * area))):
        cx, cy = rng.uniform(0, width), rng.uniform(0, height)
        a, b = rng.uniform(6.0, 30.0), rng.uniform(4.0, 20.0)
        phi = rng.uniform(0, np.pi)
        u = (xx - cx) * np.cos(phi) + (yy - cy) * np.sin(phi)
        v = -(xx - cx) * np.sin(phi) + (yy - cy) * np.cos(phi)
        # signed distance proxy, scaled so the edge ramp is about one pixel wide
        d = (np.sqrt((u / a) ** 2 + (v / b) ** 2) - 1.0) * min(a, b)
        img += rng.uniform(-0.5, 0.5) * np.clip(0.5 - d, 0.0, 1.0)

    for _ in range(int(round(6 * area))):
        cx, cy = rng.uniform(0, width), rng.uniform(0, height)
        phi = rng.uniform(0, np.pi)
        half_len, half_w = rng.uniform(20.0, 60.0), rng.uniform(1.5, 4.0)
        u = (xx - cx) * np.cos(phi) + (yy - cy) * np.sin(phi)
        v = -(xx - cx) * np.sin(phi) + (yy - cy) * np.cos(phi)
        inside = np.clip(half_w + 0.5 - np.abs(v), 0.0, 1.0) * np.clip(half_len + 0.5 - np.abs(u), 0.0, 1.0)
        img += rng.uniform(-0.4, 0.4) * inside

    img = ndimage.gaussian_filter(img, EDGE_BLUR, mode="reflect")
    lo, hi = img.min(), img.max()
    a, b = INTENSITY_RANGE
    return a + (img - lo) / (hi - lo) * (b - a)


def generate_case(case: SyntheticCase) -> SyntheticPair:
    """Render the reference/floating pair described by ``case``."""
    if case.outlier is not None and case.outlier.area() > 0.5 * case.width * case.height:
        raise ValueError("outlier patch covers more than half of the image")
    rng = np.random.default_rng(case.seed)
    p = case.padding
    canvas = render_texture(case.width + 2 * p, case.height + 2 * p, rng)
    shape = (case.height, case.width)
    ref = canvas[p:p + case.height, p:p + case.width].copy()

    cx, cy = image_center(shape)
    xs, ys = transform_grid(case.truth.inverse(), shape, (cx, cy))
    vals, flt_valid = sample_bilinear_many(canvas, xs + p, ys + p)
    flt = np.where(flt_valid, vals, 0.0)

    images = {"ref": ref, "flt": flt}
    if case.outlier is not None:
        # blend through a blurred mask so the patch edge is imaged like the texture
        alpha = ndimage.gaussian_filter(case.outlier.mask(shape).astype(np.float64), EDGE_BLUR)
        target = images[case.outlier.target]
        target += alpha * (case.outlier.value - target)
    if case.gain != 1.0 or case.bias != 0.0:
        target = images[case.illumination_target]
        target *= case.gain
        target += case.bias
    if case.noise > 0:
        for name in ("ref", "flt"):
            images[name] += rng.normal(0.0, case.noise, shape)
    ref = np.clip(images["ref"], 0.0, 1.0)
    flt = np.clip(images["flt"], 0.0, 1.0)
    return SyntheticPair(ref, flt, case.truth, flt_valid)


def random_suite(n: int, seed: int = 0, outliers: bool = False, size: int = 256,
                 max_shift: float = 10.0, max_angle: float = 8.0,
                 area_range=(0.09, 0.16), gain: float = 1.0,
                 noise: float = 0.0) -> list[SyntheticCase]:
    """``n`` cases with transforms drawn uniformly within the given bounds.

    With ``outliers`` each case gets one constant square patch of 9-16 % of
    the image area in the floating image, placed so it stays inside, and the
    floating image gets illumination ``gain``. The patch intensity is drawn
    from ``INTENSITY_RANGE`` so that it competes with the texture values
    instead of sitting in bins no texture pixel uses.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n):
        truth = RigidTransform(round(float(rng.uniform(-max_shift, max_shift)), 3),
                               round(float(rng.uniform(-max_shift, max_shift)), 3),
                               round(float(rng.uniform(-max_angle, max_angle)), 3))
        outlier = None
        if outliers:
            frac = rng.uniform(*area_range)
            side = int(round(np.sqrt(frac * size * size)))
            margin = side / 2.0 + 8
            center = (round(float(rng.uniform(margin, size - margin)), 1),
                      round(float(rng.uniform(margin, size - margin)), 1))
            value = round(float(rng.uniform(*INTENSITY_RANGE)), 3)
            outlier = OutlierSpec(center=center, size=(side, side), value=value)
        cases.append(SyntheticCase(case_id=f"case{i:02d}", seed=int(rng.integers(2 ** 31)),
                                   width=size, height=size, truth=truth, outlier=outlier,
                                   noise=noise, gain=gain if outliers else 1.0))
    return cases


def with_truth(case: SyntheticCase, truth: RigidTransform) -> SyntheticCase:
    return replace(case, truth=truth)
