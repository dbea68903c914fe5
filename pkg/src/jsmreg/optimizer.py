"""Nelder-Mead simplex maximization over rigid-transform parameters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .image import RigidTransform

STEP_TOLERANCE = "step_tolerance"
EVAL_LIMIT = "eval_limit"


@dataclass(frozen=True)
class SimplexConfig:
    """Initial steps are (pixels, pixels, degrees); they also set the scaling."""

    initial_step: tuple = (8.0, 8.0, 4.0)
    min_step: float = 1e-5
    max_evaluations: int = 200
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5

    def __post_init__(self):
        if not self.min_step > 0:
            raise ValueError("min_step must be positive")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")
        if len(self.initial_step) != 3 or any(s <= 0 for s in self.initial_step):
            raise ValueError("initial_step needs three positive entries")


@dataclass
class OptResult:
    best: RigidTransform
    value: float
    evaluations: int
    reason: str
    trace: list = field(default_factory=list)  # (eval index, params, value)


class _BudgetExhausted(Exception):
    pass


def maximize(cost: Callable[[RigidTransform], float], start: RigidTransform,
             cfg: SimplexConfig = SimplexConfig()) -> OptResult:
    """Maximize ``cost`` with the Nelder-Mead simplex method.

    Parameters are scaled by ``cfg.initial_step`` so the simplex works in
    unitless coordinates. The step length used for termination is the
    largest vertex-to-centroid distance in those coordinates. The search
    stops when it drops below ``cfg.min_step`` or when the evaluation budget
    is spent; the best point ever evaluated is returned.
    """
    origin = start.as_array()
    scale = np.asarray(cfg.initial_step, dtype=np.float64)
    trace = []
    best = [None, -np.inf]

    def evaluate(z):
        if len(trace) >= cfg.max_evaluations:
            raise _BudgetExhausted
        params = origin + z * scale
        value = float(cost(RigidTransform.from_array(params)))
        if np.isnan(value):
            value = -np.inf
        trace.append((len(trace), params.copy(), value))
        if best[0] is None or value > best[1]:
            best[0], best[1] = params.copy(), value
        return value

    n = origin.size
    reason = EVAL_LIMIT
    try:
        verts = [np.zeros(n)] + [np.eye(n)[i] for i in range(n)]
        vals = []
        for z in verts:
            vals.append(evaluate(z))
        verts = np.array(verts)
        vals = np.array(vals)
        while True:
            order = np.argsort(-vals, kind="stable")
            verts, vals = verts[order], vals[order]
            spread = np.linalg.norm(verts - verts.mean(axis=0), axis=1).max()
            if spread < cfg.min_step:
                reason = STEP_TOLERANCE
                break
            centroid = verts[:-1].mean(axis=0)
            worst = verts[-1]
            zr = centroid + cfg.reflection * (centroid - worst)
            fr = evaluate(zr)
            if fr > vals[0]:
                ze = centroid + cfg.expansion * (zr - centroid)
                fe = evaluate(ze)
                verts[-1], vals[-1] = (ze, fe) if fe > fr else (zr, fr)
                continue
            if fr > vals[-2]:
                verts[-1], vals[-1] = zr, fr
                continue
            if fr > vals[-1]:
                zc = centroid + cfg.contraction * (zr - centroid)
                fc = evaluate(zc)
                if fc >= fr:
                    verts[-1], vals[-1] = zc, fc
                    continue
            else:
                zc = centroid + cfg.contraction * (worst - centroid)
                fc = evaluate(zc)
                if fc > vals[-1]:
                    verts[-1], vals[-1] = zc, fc
                    continue
            for i in range(1, n + 1):
                verts[i] = verts[0] + cfg.shrink * (verts[i] - verts[0])
                vals[i] = evaluate(verts[i])
    except _BudgetExhausted:
        reason = EVAL_LIMIT

    return OptResult(RigidTransform.from_array(best[0]), best[1], len(trace), reason, trace)


def trace_csv(trace) -> str:
    """Per-evaluation log as CSV: ``eval,tx,ty,beta,value``."""
    lines = ["eval,tx,ty,beta,value"]
    for i, params, value in trace:
        tx, ty, beta = (float(v) for v in params)
        lines.append(f"{i},{tx!r},{ty!r},{beta!r},{float(value)!r}")
    return "\n".join(lines) + "\n"
