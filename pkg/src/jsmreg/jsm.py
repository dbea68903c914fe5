"""Joint saliency map: per-pixel agreement of the two images' RSVs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import RigidTransform, bilinear_setup, image_center, sample_bilinear_many, transform_grid
from .saliency import RsvField

NEGATIVE_COSINE_POLICIES = ("abs", "clamp")
JSM_LOOKUPS = ("nearest", "bilinear")


@dataclass(frozen=True)
class JointSaliencyMap:
    """Weights in ``[0, 1]`` on the reference grid.

    ``overlap`` marks reference pixels whose transformed position falls
    inside the floating image; weights are zero outside it.
    """

    weights: np.ndarray
    overlap: np.ndarray
    transform: RigidTransform
    center: tuple
    floating_shape: tuple

    @property
    def mass(self) -> float:
        return float(self.weights.sum())


def overlap_mask(ref_shape, flt_shape, t: RigidTransform, center=None) -> np.ndarray:
    """Reference pixels whose image under ``t`` lies in the floating grid."""
    xs, ys = transform_grid(t, ref_shape, center)
    valid, *_ = bilinear_setup(flt_shape, xs, ys)
    return valid


def _agreement(ref_vec, ref_ok, flt_rsv: RsvField, nx, ny, policy):
    cos = (ref_vec * flt_rsv.vectors[ny, nx]).sum(axis=1)
    cos = np.abs(cos) if policy == "abs" else np.maximum(cos, 0.0)
    return np.where(ref_ok & flt_rsv.valid[ny, nx], np.minimum(cos, 1.0), 0.0)


def compute_jsm(ref_rsv: RsvField, flt_rsv: RsvField, t: RigidTransform,
                center=None, policy: str = "abs", lookup: str = "nearest") -> JointSaliencyMap:
    """Joint saliency ``|<x_R, x_F>|`` of each overlapping pixel pair.

    With ``lookup="nearest"`` the floating RSV is read at the nearest
    floating grid pixel. With ``lookup="bilinear"`` the agreement is
    computed against each of the four floating neighbors and the resulting
    scalars are blended with bilinear coefficients, which keeps the map
    continuous in ``t`` (vectors are never interpolated). Pixels where
    either RSV is missing contribute 0. With ``policy="clamp"`` negative
    cosines become 0 instead of being folded.
    """
    if policy not in NEGATIVE_COSINE_POLICIES:
        raise ValueError(f"unknown negative-cosine policy {policy!r}")
    if lookup not in JSM_LOOKUPS:
        raise ValueError(f"unknown JSM lookup {lookup!r}")
    if center is None:
        center = image_center(ref_rsv.shape)
    fh, fw = flt_rsv.shape
    xs, ys = transform_grid(t, ref_rsv.shape, center)
    overlap, x0, y0, x1, y1, fx, fy = bilinear_setup((fh, fw), xs, ys)
    ref_vec = ref_rsv.vectors[overlap]
    ref_ok = ref_rsv.valid[overlap]

    if lookup == "nearest":
        nx = np.where(fx >= 0.5, x1, x0)
        ny = np.where(fy >= 0.5, y1, y0)
        w = _agreement(ref_vec, ref_ok, flt_rsv, nx, ny, policy)
    else:
        w = ((1 - fx) * (1 - fy) * _agreement(ref_vec, ref_ok, flt_rsv, x0, y0, policy)
             + fx * (1 - fy) * _agreement(ref_vec, ref_ok, flt_rsv, x1, y0, policy)
             + (1 - fx) * fy * _agreement(ref_vec, ref_ok, flt_rsv, x0, y1, policy)
             + fx * fy * _agreement(ref_vec, ref_ok, flt_rsv, x1, y1, policy))
    weights = np.zeros(ref_rsv.shape)
    weights[overlap] = np.clip(w, 0.0, 1.0)
    return JointSaliencyMap(weights, overlap, t, tuple(center), (fh, fw))


def update_jsm(prev: JointSaliencyMap, t_prev: RigidTransform,
               t_new: RigidTransform) -> JointSaliencyMap:
    """Approximate the map for ``t_new`` by resampling ``prev``.

    A reference pixel ``v`` now meets the floating point ``t_new(v)``, which
    under ``t_prev`` was met by ``t_prev^-1(t_new(v))``; the previous weight
    there is read with bilinear interpolation. Positions outside the grid
    read as zero.
    """
    step = t_prev.inverse().compose(t_new)
    xs, ys = transform_grid(step, prev.weights.shape, prev.center)
    vals, valid = sample_bilinear_many(prev.weights, xs, ys)
    overlap = overlap_mask(prev.weights.shape, prev.floating_shape, t_new, prev.center)
    weights = np.where(valid & overlap, np.clip(vals, 0.0, 1.0), 0.0)
    return JointSaliencyMap(weights, overlap, t_new, prev.center, prev.floating_shape)


def within_update_range(t_ref: RigidTransform, t_new: RigidTransform,
                        max_shift: float = 3.0, max_angle: float = 3.0) -> bool:
    """Whether ``t_new`` is close enough to ``t_ref`` for :func:`update_jsm`."""
    return (abs(t_new.tx - t_ref.tx) < max_shift and abs(t_new.ty - t_ref.ty) < max_shift
            and abs(t_new.beta - t_ref.beta) < max_angle)
