"""Command-line entry point: ``jsmreg <command> ...`` (or ``python -m jsmreg``).

Commands
--------
register   register two images and print ``tx ty beta similarity evals seconds``
surface    export a similarity surface over translations
synth      write a synthetic pair plus its ``tx ty beta`` truth file
bench      run a suite file, write CSV and a results table
saliency   export a saliency map and the RSV table of one image
jsm        export the joint saliency map of two images at a transform

Registration settings come from ``--config FILE`` (``key = value`` lines,
``#`` comments) and are overridden by the matching command-line flags.
"""

from __future__ import annotations

import argparse
import ast
import sys
from dataclasses import fields, replace
from pathlib import Path

from . import bench, export
from .image import RigidTransform
from .io import load_image, save_image
from .jsm import compute_jsm
from .optimizer import SimplexConfig
from .registration import RegistrationConfig, RegistrationError, register, similarity_surface
from .saliency import build_rsv_field
from .synth import OutlierSpec, SyntheticCase, generate_case

_SIMPLEX_KEYS = {f.name for f in fields(SimplexConfig)}
_CONFIG_KEYS = {f.name for f in fields(RegistrationConfig)} - {"simplex"}


def read_config(path) -> dict:
    """Parse a ``key = value`` file; values are Python/TOML-style literals."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = key.strip(), value.strip()
        if value.lower() in ("true", "false"):
            out[key] = value.lower() == "true"
            continue
        try:
            out[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            out[key] = value.strip("'\"")
    return out


def build_config(settings: dict) -> RegistrationConfig:
    unknown = set(settings) - _CONFIG_KEYS - _SIMPLEX_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    simplex = {k: v for k, v in settings.items() if k in _SIMPLEX_KEYS}
    if "initial_step" in simplex:
        simplex["initial_step"] = tuple(float(v) for v in simplex["initial_step"])
    main = {k: v for k, v in settings.items() if k in _CONFIG_KEYS}
    return RegistrationConfig(simplex=SimplexConfig(**simplex), **main)


def config_from_args(args) -> RegistrationConfig:
    settings = read_config(args.config) if args.config else {}
    for key in ("measure", "mode", "bins", "levels", "cadence", "threshold", "policy",
                "max_evaluations"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return build_config(settings)


def read_truth(path) -> RigidTransform:
    tx, ty, beta = (float(v) for v in Path(path).read_text().split()[:3])
    return RigidTransform(tx, ty, beta)


def write_truth(path, t: RigidTransform) -> None:
    Path(path).write_text(f"{t.tx!r} {t.ty!r} {t.beta!r}\n")


def _transform_arg(text) -> RigidTransform:
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected 'tx,ty,beta'")
    return RigidTransform(*(float(p) for p in parts))


def _add_config_flags(p):
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--measure", choices=("jmi", "nmi"))
    p.add_argument("--mode", choices=("nearest", "bilinear", "pv"), help="histogram update")
    p.add_argument("--bins", type=int)
    p.add_argument("--levels", type=int, help="pyramid levels (default: automatic)")
    p.add_argument("--cadence", type=int, help="cost evaluations between full JSM updates")
    p.add_argument("--threshold", type=float, help="saliency threshold, fraction of max")
    p.add_argument("--policy", choices=("abs", "clamp"), help="negative cosine handling")
    p.add_argument("--max-evaluations", dest="max_evaluations", type=int)


def cmd_register(args) -> int:
    cfg = config_from_args(args)
    ref, flt = load_image(args.ref), load_image(args.flt)
    res = register(ref, flt, args.start, cfg)
    print(res.record())
    if args.json:
        Path(args.json).write_text(res.to_json())
    if args.trace:
        rows = ["level,eval,best"]
        for lv in res.levels:
            rows += [f"{lv.level},{i},{v!r}" for i, v in enumerate(lv.best_so_far)]
        Path(args.trace).write_text("\n".join(rows) + "\n")
    if args.overlay:
        save_image(args.overlay, export.overlay(ref, flt, res.transform))
    if args.truth:
        err = abs(res.transform.as_array() - read_truth(args.truth).as_array())
        print(f"error {err[0]:.4f} {err[1]:.4f} {err[2]:.4f}")
    return 0


def cmd_surface(args) -> int:
    cfg = config_from_args(args)
    grid = similarity_surface(load_image(args.ref), load_image(args.flt), args.center, cfg,
                              args.extent, args.step)
    for path in export.export_surface(grid, args.out):
        print(path)
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.suite:
        cases = bench.parse_suite(Path(args.suite).read_text())
    else:
        outlier = None
        if args.outlier:
            cx, cy, w, h, value = (float(v) for v in args.outlier.split(","))
            outlier = OutlierSpec(center=(cx, cy), size=(int(w), int(h)), value=value)
        cases = [SyntheticCase(case_id=args.id, seed=args.seed, width=args.size,
                               height=args.size, truth=args.truth, outlier=outlier,
                               noise=args.noise, gain=args.gain)]
    for case in cases:
        pair = generate_case(case)
        save_image(out / f"{case.case_id}_ref.pgm", pair.ref)
        save_image(out / f"{case.case_id}_flt.pgm", pair.flt)
        write_truth(out / f"{case.case_id}_truth.txt", pair.truth)
        print(case.case_id)
    return 0


def cmd_bench(args) -> int:
    cfg = config_from_args(args)
    suite = bench.parse_suite(Path(args.suite).read_text())
    measures = tuple(args.measures.split(","))
    records = bench.run_benchmark(suite, measures, cfg, workers=args.workers)
    csv = bench.records_csv(records, timing=args.timing)
    if args.csv:
        Path(args.csv).write_text(csv)
    else:
        sys.stdout.write(csv)
    table = bench.summary_table(records)
    if args.table:
        Path(args.table).write_text(table)
    else:
        sys.stdout.write(table)
    failed = [r for r in records if r.status != "ok"]
    for r in failed:
        print(f"{r.case_id} {r.measure}: {r.status}", file=sys.stderr)
    return 1 if failed else 0


def cmd_saliency(args) -> int:
    field = build_rsv_field(load_image(args.image), args.saliency_levels, args.threshold)
    export.export_saliency(field, args.out)
    if args.rsv:
        Path(args.rsv).write_text(export.rsv_table(field))
    return 0


def cmd_jsm(args) -> int:
    ref_rsv = build_rsv_field(load_image(args.ref), args.saliency_levels, args.threshold)
    flt_rsv = build_rsv_field(load_image(args.flt), args.saliency_levels, args.threshold)
    jsm = compute_jsm(ref_rsv, flt_rsv, args.transform, policy=args.policy)
    export.export_jsm(jsm, args.out)
    print(f"mass {jsm.mass:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jsmreg", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", help="register two images")
    p.add_argument("ref")
    p.add_argument("flt")
    p.add_argument("--start", type=_transform_arg, default=RigidTransform(),
                   help="start transform 'tx,ty,beta' (default identity)")
    p.add_argument("--json", help="write the JSON result with per-level traces")
    p.add_argument("--trace", help="write per-level best-so-far values as CSV")
    p.add_argument("--overlay", help="write a red/green edge overlay image")
    p.add_argument("--truth", help="truth file 'tx ty beta'; prints the error")
    _add_config_flags(p)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("surface", help="similarity over a translation grid")
    p.add_argument("ref")
    p.add_argument("flt")
    p.add_argument("--out", required=True, help="output stem (.csv, .pgm, _mask.pgm)")
    p.add_argument("--center", type=_transform_arg, default=RigidTransform(),
                   help="grid center transform 'tx,ty,beta'")
    p.add_argument("--extent", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1.0)
    _add_config_flags(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("synth", help="generate synthetic pairs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--suite", help="suite file; overrides the single-case flags")
    p.add_argument("--id", default="case")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--truth", type=_transform_arg, default=RigidTransform())
    p.add_argument("--outlier", help="rectangle 'cx,cy,w,h,value' in the floating image")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--gain", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="benchmark a suite file")
    p.add_argument("suite")
    p.add_argument("--measures", default="jmi,nmi")
    p.add_argument("--csv", help="CSV output path (default stdout)")
    p.add_argument("--table", help="table output path (default stdout)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="add a seconds column to the CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    for name, helptext in (("saliency", "saliency map and RSV table"),
                           ("jsm", "joint saliency map of two images")):
        p = sub.add_parser(name, help=helptext)
        if name == "saliency":
            p.add_argument("image")
            p.add_argument("--rsv", help="write the 'x y vx vy saliency' table")
            p.set_defaults(func=cmd_saliency)
        else:
            p.add_argument("ref")
            p.add_argument("flt")
            p.add_argument("--transform", type=_transform_arg, default=RigidTransform())
            p.add_argument("--policy", choices=("abs", "clamp"), default="abs")
            p.set_defaults(func=cmd_jsm)
        p.add_argument("--out", required=True)
        p.add_argument("--saliency-levels", dest="saliency_levels", type=int, default=3)
        p.add_argument("--threshold", type=float, default=0.1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RegistrationError) as exc:
        print(f"jsmreg {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
