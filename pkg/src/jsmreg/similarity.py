"""Entropies, mutual information and normalized mutual information (bits)."""

from __future__ import annotations

import numpy as np

from .histogram import EmptyOverlapError, JointHistogram

NMI_MAX = 2.0


def entropy(p) -> float:
    """Shannon entropy ``-sum p log2 p`` of a normalized distribution."""
    p = np.asarray(p, dtype=np.float64).ravel()
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("entropy expects a normalized, non-negative distribution")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def _entropies(h: JointHistogram) -> tuple[float, float, float]:
    if not h.mass > 0:
        raise EmptyOverlapError("joint histogram has zero mass")
    p = h.probabilities()
    # renormalize each term so round-off in the division never trips entropy()
    p_ref = p.sum(axis=1)
    p_flt = p.sum(axis=0)
    return (entropy(p_ref / p_ref.sum()), entropy(p_flt / p_flt.sum()),
            entropy(p / p.sum()))


def mutual_information(h: JointHistogram) -> float:
    """``H(R) + H(F) - H(R, F)`` of the histogram's joint distribution."""
    h_ref, h_flt, h_joint = _entropies(h)
    return h_ref + h_flt - h_joint


def normalized_mutual_information(h: JointHistogram) -> float:
    """``(H(R) + H(F)) / H(R, F)``; 2 when the joint entropy vanishes."""
    h_ref, h_flt, h_joint = _entropies(h)
    if h_joint <= 0:
        return NMI_MAX
    return (h_ref + h_flt) / h_joint


MEASURES = {
    "mi": mutual_information,
    "nmi": normalized_mutual_information,
}
