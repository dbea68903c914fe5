"""Multiresolution rigid registration with JSM-weighted mutual information.

Two measures are available:

``jmi``
    mutual information of the joint histogram weighted by the joint
    saliency map. The map is recomputed from the RSV fields when a level
    starts and then every ``cadence`` cost evaluations; in between it is
    resampled from the last full computation (:func:`jsm.update_jsm`).
``nmi``
    normalized mutual information of the plain joint histogram (baseline).

At pyramid level ``k`` the images are sampled every ``2**k`` pixels, so a
transform is expressed on that level by dividing the translation by
``2**k`` and rotating about the level-0 center divided by ``2**k``.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .histogram import DEFAULT_BINS, EmptyOverlapError, build_weighted_histogram, quantize_array
from .image import RigidTransform, as_image, build_pyramid, image_center, pyramid_depth
from .jsm import compute_jsm, overlap_mask, update_jsm, within_update_range
from .optimizer import SimplexConfig, maximize
from .saliency import SALIENCY_THRESHOLD, build_rsv_field
from .similarity import mutual_information, normalized_mutual_information

MEASURE_NAMES = ("jmi", "nmi")
FAILURE = -np.inf


class RegistrationError(RuntimeError):
    """The start transform leaves (almost) no overlap to register."""


@dataclass(frozen=True)
class RegistrationConfig:
    measure: str = "jmi"
    mode: str = "bilinear"
    bins: int = DEFAULT_BINS
    levels: Optional[int] = None
    cadence: int = 12
    threshold: float = SALIENCY_THRESHOLD
    policy: str = "abs"
    jsm_lookup: str = "nearest"
    saliency_levels: int = 3
    simplex: SimplexConfig = field(default_factory=SimplexConfig)
    min_overlap: float = 0.01
    min_level_bins: int = 16
    update_shift: float = 3.0
    update_angle: float = 3.0

    def __post_init__(self):
        if self.measure not in MEASURE_NAMES:
            raise ValueError(f"measure must be one of {MEASURE_NAMES}")
        if not 1 <= self.cadence <= 50:
            raise ValueError("cadence must be in [1, 50]")
        if not 0 <= self.threshold < 1:
            raise ValueError("threshold must be in [0, 1)")

    def level_bins(self, level: int) -> int:
        """Bin count at pyramid ``level``: halved per level, never below ``min_level_bins``."""
        return max(min(self.bins, self.min_level_bins), self.bins >> level)

    def level_simplex(self, descent: int, level: int) -> SimplexConfig:
        """Simplex for the ``descent``-th level visited (0 = coarsest) at pyramid ``level``.

        ``simplex.initial_step`` is given in finest-level pixels for the
        coarsest level and halves with every descent.
        """
        tx, ty, beta = self.simplex.initial_step
        shrink = 2.0 ** descent
        px = 2.0 ** level
        return replace(self.simplex, initial_step=(tx / shrink / px, ty / shrink / px, beta / shrink))


@dataclass
class LevelTrace:
    level: int
    shape: tuple
    start: RigidTransform
    result: RigidTransform
    value: float
    evaluations: int
    reason: str
    best_so_far: list
    full_jsm_updates: int = 0


@dataclass
class RegistrationResult:
    transform: RigidTransform
    similarity: float
    levels: list
    evaluations: int
    seconds: float

    def record(self) -> str:
        """Single-line ``tx ty beta similarity evals seconds`` record."""
        t = self.transform
        return (f"{t.tx:.6f} {t.ty:.6f} {t.beta:.6f} {self.similarity:.6f} "
                f"{self.evaluations} {self.seconds:.3f}")

    def to_json(self) -> str:
        doc = {
            "transform": asdict(self.transform),
            "similarity": self.similarity,
            "evaluations": self.evaluations,
            "seconds": self.seconds,
            "levels": [
                {**asdict(lv), "start": asdict(lv.start), "result": asdict(lv.result),
                 "shape": list(lv.shape)}
                for lv in self.levels
            ],
        }
        return json.dumps(doc, indent=2)


class SimilarityCost:
    """Similarity of ``ref`` and ``flt`` as a function of the transform.

    Holds the per-image state that stays fixed during optimization
    (quantized intensities, RSV fields) and the JSM recompute schedule.
    """

    def __init__(self, ref: np.ndarray, flt: np.ndarray, cfg: RegistrationConfig,
                 center=None, exact_jsm: bool = False):
        self.ref, self.flt, self.cfg = ref, flt, cfg
        self.center = image_center(ref.shape) if center is None else center
        self.ref_bins = quantize_array(ref, cfg.bins)
        self.flt_bins = quantize_array(flt, cfg.bins)
        self.exact_jsm = exact_jsm
        self.min_mass = cfg.min_overlap * ref.size
        self.full_updates = 0
        self._anchor = None
        self._since_full = 0
        if cfg.measure == "jmi":
            self.ref_rsv = build_rsv_field(ref, cfg.saliency_levels, cfg.threshold)
            self.flt_rsv = build_rsv_field(flt, cfg.saliency_levels, cfg.threshold)

    def weights(self, t: RigidTransform) -> Optional[np.ndarray]:
        if self.cfg.measure != "jmi":
            return None
        stale = (self._anchor is None or self._since_full >= self.cfg.cadence
                 or not within_update_range(self._anchor.transform, t,
                                            self.cfg.update_shift, self.cfg.update_angle))
        if self.exact_jsm or stale:
            self._anchor = compute_jsm(self.ref_rsv, self.flt_rsv, t, self.center,
                                       self.cfg.policy, self.cfg.jsm_lookup)
            self._since_full = 0
            self.full_updates += 1
            jsm = self._anchor
        else:
            jsm = update_jsm(self._anchor, self._anchor.transform, t)
        self._since_full += 1
        return jsm.weights

    def histogram(self, t: RigidTransform):
        return build_weighted_histogram(self.ref, self.flt, t, self.weights(t), self.cfg.mode,
                                        self.cfg.bins, self.center, ref_bins=self.ref_bins,
                                        flt_bins=self.flt_bins)

    def __call__(self, t: RigidTransform) -> float:
        if overlap_mask(self.ref.shape, self.flt.shape, t, self.center).sum() < self.min_mass:
            return FAILURE
        try:
            h = self.histogram(t)
        except EmptyOverlapError:
            return FAILURE
        if self.cfg.measure == "jmi":
            return mutual_information(h)
        return normalized_mutual_information(h)


def register(ref, flt, start: RigidTransform = RigidTransform(),
             cfg: RegistrationConfig = RegistrationConfig()) -> RegistrationResult:
    """Coarse-to-fine registration; returns the finest-level optimum.

    ``start`` and the result map reference pixel coordinates into the
    floating image, rotating about the reference image center.
    """
    t0 = time.perf_counter()
    ref, flt = as_image(ref), as_image(flt)
    n_levels = min(pyramid_depth(ref.shape, cfg.levels), pyramid_depth(flt.shape, cfg.levels))
    ref_pyr = build_pyramid(ref, n_levels)
    flt_pyr = build_pyramid(flt, n_levels)
    c0 = np.array(image_center(ref.shape))

    coarse = n_levels - 1
    s = 2.0 ** coarse
    mask = overlap_mask(ref_pyr[coarse].shape, flt_pyr[coarse].shape, start.scaled(1 / s), c0 / s)
    if mask.sum() < cfg.min_overlap * ref_pyr[coarse].size:
        raise RegistrationError("start transform yields less than the minimum overlap")

    current = start
    traces = []
    total = 0
    value = FAILURE
    for descent, level in enumerate(range(coarse, -1, -1)):
        s = 2.0 ** level
        level_cfg = replace(cfg, bins=cfg.level_bins(level))
        cost = SimilarityCost(ref_pyr[level], flt_pyr[level], level_cfg, tuple(c0 / s))
        res = maximize(cost, current.scaled(1 / s), cfg.level_simplex(descent, level))
        best = []
        for _, _, v in res.trace:
            best.append(v if not best else max(best[-1], v))
        traces.append(LevelTrace(level, ref_pyr[level].shape, current, res.best.scaled(s),
                                 res.value, res.evaluations, res.reason, best, cost.full_updates))
        current = res.best.scaled(s)
        value = res.value
        total += res.evaluations
    return RegistrationResult(current, value, traces, total, time.perf_counter() - t0)


def similarity_surface(ref, flt, t0: RigidTransform, cfg: RegistrationConfig = RegistrationConfig(),
                       extent: float = 10.0, step: float = 1.0) -> np.ndarray:
    """Measure on the translation grid ``t0 + (dx, dy, 0)``, ``|dx|, |dy| <= extent``.

    Rows index ``dy`` and columns ``dx``, both increasing from ``-extent``.
    The JSM is recomputed at every grid point. Degenerate points are ``nan``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    ref, flt = as_image(ref), as_image(flt)
    n = int(round(2 * extent / step)) + 1
    offsets = -extent + step * np.arange(n)
    cost = SimilarityCost(ref, flt, cfg, exact_jsm=True)
    grid = np.full((n, n), np.nan)
    for i, dy in enumerate(offsets):
        for j, dx in enumerate(offsets):
            v = cost(RigidTransform(t0.tx + dx, t0.ty + dy, t0.beta))
            if np.isfinite(v):
                grid[i, j] = v
    return grid


def count_local_maxima(grid: np.ndarray) -> int:
    """Grid points strictly greater than every existing 8-neighbor."""
    g = np.where(np.isfinite(grid), grid, -np.inf)
    padded = np.pad(g, 1, constant_values=-np.inf)
    h, w = g.shape
    is_max = np.isfinite(g)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx or dy:
                is_max &= g > padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return int(is_max.sum())
