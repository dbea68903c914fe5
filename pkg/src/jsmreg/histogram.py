"""Weighted joint intensity histograms.

The reference grid drives accumulation: every reference pixel ``v`` in the
overlap is paired with the floating image around ``t(v)``. In ``pv``
(partial volume) mode the deposit is split over the four floating neighbors
with their bilinear coefficients instead of interpolating an intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .image import RigidTransform, bilinear_setup, image_center, transform_grid

MODES = ("nearest", "bilinear", "pv")
DEFAULT_BINS = 64


class EmptyOverlapError(ValueError):
    """Raised when no weight lands in the joint histogram."""


@dataclass(frozen=True)
class JointHistogram:
    """``counts[r, f]``: reference bins along rows, floating bins along columns."""

    counts: np.ndarray

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    @property
    def mass(self) -> float:
        return float(self.counts.sum())

    def probabilities(self) -> np.ndarray:
        mass = self.mass
        if mass <= 0:
            raise EmptyOverlapError("joint histogram has zero mass")
        return self.counts / mass

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        """``(p_ref, p_flt)`` derived from the joint probabilities."""
        p = self.probabilities()
        return p.sum(axis=1), p.sum(axis=0)


def quantize(intensity: float, bins: int) -> int:
    """Bin index ``floor(intensity * bins)`` clamped to ``[0, bins - 1]``."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if not math.isfinite(intensity):
        raise ValueError(f"non-finite intensity {intensity}")
    return min(max(int(math.floor(intensity * bins)), 0), bins - 1)


def quantize_array(values: np.ndarray, bins: int) -> np.ndarray:
    """Vectorized :func:`quantize`."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite intensity")
    return np.clip(np.floor(values * bins), 0, bins - 1).astype(np.intp)


def build_weighted_histogram(ref: np.ndarray, flt: np.ndarray, t: RigidTransform,
                             weights: Optional[np.ndarray], mode: str = "pv",
                             bins: int = DEFAULT_BINS, center=None,
                             ref_bins: Optional[np.ndarray] = None,
                             flt_bins: Optional[np.ndarray] = None) -> JointHistogram:
    """Joint histogram with per-reference-pixel ``weights``.

    ``weights=None`` means unit weight on the whole overlap. ``ref_bins`` and
    ``flt_bins`` may carry precomputed quantized images to save work inside
    an optimization loop. Raises :class:`EmptyOverlapError` if nothing is
    deposited.
    """
    if mode not in MODES:
        raise ValueError(f"unknown interpolation mode {mode!r}")
    if center is None:
        center = image_center(ref.shape)
    if ref_bins is None:
        ref_bins = quantize_array(ref, bins)
    xs, ys = transform_grid(t, ref.shape, center)
    valid, x0, y0, x1, y1, fx, fy = bilinear_setup(flt.shape, xs, ys)

    r = ref_bins[valid]
    w = np.ones(r.shape) if weights is None else np.asarray(weights, dtype=np.float64)[valid]
    keep = w > 0
    if not keep.all():
        r, w = r[keep], w[keep]
        x0, y0, x1, y1, fx, fy = (a[keep] for a in (x0, y0, x1, y1, fx, fy))

    if mode == "pv":
        if flt_bins is None:
            flt_bins = quantize_array(flt, bins)
        idx = np.concatenate([r * bins + flt_bins[y0, x0], r * bins + flt_bins[y0, x1],
                              r * bins + flt_bins[y1, x0], r * bins + flt_bins[y1, x1]])
        dep = np.concatenate([w * (1 - fx) * (1 - fy), w * fx * (1 - fy),
                              w * (1 - fx) * fy, w * fx * fy])
    else:
        if mode == "nearest":
            nx = np.where(fx >= 0.5, x1, x0)
            ny = np.where(fy >= 0.5, y1, y0)
            f = flt[ny, nx]
        else:
            f = ((1 - fx) * (1 - fy) * flt[y0, x0] + fx * (1 - fy) * flt[y0, x1]
                 + (1 - fx) * fy * flt[y1, x0] + fx * fy * flt[y1, x1])
        idx = r * bins + quantize_array(f, bins)
        dep = w
    counts = np.bincount(idx, weights=dep, minlength=bins * bins).reshape(bins, bins)
    if not counts.sum() > 0:
        raise EmptyOverlapError("no overlapping pixels carry weight")
    return JointHistogram(counts)


def build_unweighted_histogram(ref: np.ndarray, flt: np.ndarray, t: RigidTransform,
                               mode: str = "pv", bins: int = DEFAULT_BINS,
                               center=None, **kwargs) -> JointHistogram:
    """Joint histogram where every overlapping pixel pair counts once."""
    return build_weighted_histogram(ref, flt, t, None, mode, bins, center, **kwargs)


def histogram_csv(h: JointHistogram) -> str:
    """Histogram as ``bins`` CSV rows of ``bins`` columns."""
    return "\n".join(",".join(repr(float(v)) for v in row) for row in h.counts) + "\n"


def histogram_heatmap(h: JointHistogram) -> np.ndarray:
    """Log-scaled 8-bit heatmap, reference bins down the rows."""
    from .io import normalize_uint8

    return normalize_uint8(np.log1p(h.counts))
