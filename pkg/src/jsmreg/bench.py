"""Benchmark runner over suites of synthetic cases.

A suite file has one case per line as whitespace separated ``key=value``
tokens; blank lines and ``#`` comments are ignored::

    id=case00 seed=11 tx=-3.2 ty=4.1 beta=2.5
    id=case01 seed=12 tx=5 ty=0 beta=-6 outlier=120,90,70,70,0.4 gain=1.2 noise=0.02

``outlier`` is ``cx,cy,w,h,value`` (a rectangle in the floating image).
Other keys: ``size``, ``bias``, ``padding``.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .image import RigidTransform
from .registration import RegistrationConfig, register
from .synth import OutlierSpec, SyntheticCase, generate_case

CSV_HEADER = ("case,measure,correct_tx,correct_ty,correct_beta,"
              "computed_tx,computed_ty,computed_beta,err_tx,err_ty,err_beta,evaluations,status")
SUITE_KEYS = ("id", "seed", "tx", "ty", "beta", "outlier", "noise", "gain", "bias", "size", "padding")


@dataclass(frozen=True)
class BenchRecord:
    case_id: str
    measure: str
    correct: RigidTransform
    computed: Optional[RigidTransform]
    evaluations: int
    seconds: float
    status: str = "ok"

    @property
    def error(self) -> Optional[tuple]:
        """``|computed - correct|`` per parameter, ``None`` for failed cases."""
        if self.computed is None:
            return None
        return tuple(np.abs(self.computed.as_array() - self.correct.as_array()).tolist())

    def csv_row(self, timing: bool = False) -> str:
        c = self.correct
        fields = [self.case_id, self.measure, f"{c.tx:.4f}", f"{c.ty:.4f}", f"{c.beta:.4f}"]
        if self.computed is None:
            fields += [""] * 6
        else:
            t = self.computed
            fields += [f"{t.tx:.4f}", f"{t.ty:.4f}", f"{t.beta:.4f}"]
            fields += [f"{e:.4f}" for e in self.error]
        fields += [str(self.evaluations), self.status]
        if timing:
            fields.append(f"{self.seconds:.3f}")
        return ",".join(fields)


def _parse_value(key, text):
    if key == "id":
        return text
    if key == "outlier":
        cx, cy, w, h, value = (float(v) for v in text.split(","))
        return OutlierSpec(center=(cx, cy), size=(int(w), int(h)), value=value)
    if key in ("seed", "size", "padding"):
        return int(text)
    return float(text)


def parse_suite(text: str) -> list[SyntheticCase]:
    """Cases from the suite format described in the module docstring."""
    cases = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        kv = {}
        for token in line.split():
            key, sep, value = token.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected key=value, got {token!r}")
            if key not in SUITE_KEYS:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            try:
                kv[key] = _parse_value(key, value)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad value for {key}: {exc}") from None
        size = kv.get("size", 256)
        cases.append(SyntheticCase(
            case_id=kv.get("id", f"case{len(cases):02d}"), seed=kv.get("seed", 0),
            width=size, height=size,
            truth=RigidTransform(kv.get("tx", 0.0), kv.get("ty", 0.0), kv.get("beta", 0.0)),
            outlier=kv.get("outlier"), noise=kv.get("noise", 0.0), gain=kv.get("gain", 1.0),
            bias=kv.get("bias", 0.0), padding=kv.get("padding", 48)))
    return cases


def format_suite(cases) -> str:
    lines = []
    for c in cases:
        t = c.truth
        parts = [f"id={c.case_id}", f"seed={c.seed}", f"tx={t.tx!r}", f"ty={t.ty!r}",
                 f"beta={t.beta!r}"]
        if c.width != 256 or c.height != 256:
            parts.append(f"size={c.width}")
        if c.outlier is not None:
            o = c.outlier
            parts.append(f"outlier={o.center[0]!r},{o.center[1]!r},{o.size[0]},{o.size[1]},{o.value!r}")
        if c.noise:
            parts.append(f"noise={c.noise!r}")
        if c.gain != 1.0:
            parts.append(f"gain={c.gain!r}")
        if c.bias:
            parts.append(f"bias={c.bias!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def run_case(case: SyntheticCase, measure: str, cfg: RegistrationConfig) -> BenchRecord:
    """Register one case from identity; errors become a failed record."""
    t0 = time.perf_counter()
    try:
        pair = generate_case(case)
        res = register(pair.ref, pair.flt, RigidTransform(), replace(cfg, measure=measure))
    except Exception as exc:  # a broken case must not sink the suite
        return BenchRecord(case.case_id, measure, case.truth, None, 0,
                           time.perf_counter() - t0, f"failed: {type(exc).__name__}")
    return BenchRecord(case.case_id, measure, case.truth, res.transform, res.evaluations,
                       res.seconds)


def run_benchmark(suite, measures=("jmi", "nmi"), cfg: RegistrationConfig = RegistrationConfig(),
                  workers: int = 1) -> list[BenchRecord]:
    """Every case under every measure, in suite order then measure order."""
    if not suite:
        raise ValueError("empty suite")
    jobs = [(case, m, cfg) for case in suite for m in measures]
    if workers <= 1:
        return [run_case(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_case, *zip(*jobs)))


def records_csv(records, timing: bool = False) -> str:
    """CSV of the records. Timing is off by default so reruns are byte-identical."""
    header = CSV_HEADER + (",seconds" if timing else "")
    return "\n".join([header] + [r.csv_row(timing) for r in records]) + "\n"


def summary_table(records) -> str:
    """Plain-text table laid out like a correct-vs-computed results table."""
    head = f"{'case':<10} {'measure':<7} {'Correct (X, Y, beta)':<28} {'Computed (X, Y, beta)':<28} {'evals':>6} {'sec':>7}"
    lines = [head, "-" * len(head)]
    for r in records:
        c = r.correct
        correct = f"({c.tx:.2f}, {c.ty:.2f}, {c.beta:.2f})"
        if r.computed is None:
            computed = r.status
        else:
            t = r.computed
            computed = f"({t.tx:.2f}, {t.ty:.2f}, {t.beta:.2f})"
        lines.append(f"{r.case_id:<10} {r.measure:<7} {correct:<28} {computed:<28} "
                     f"{r.evaluations:>6} {r.seconds:>7.2f}")
    for m in dict.fromkeys(r.measure for r in records):
        errs = np.array([r.error for r in records if r.measure == m and r.computed is not None])
        if errs.size:
            mx, my, mb = errs.mean(axis=0)
            lines.append(f"mean error {m}: ({mx:.3f} px, {my:.3f} px, {mb:.3f} deg)")
    return "\n".join(lines) + "\n"
