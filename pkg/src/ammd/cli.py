"""Command line entry point: ``ammd {decompose,distance,classify,sweep,synth}``.

Log verbosity comes from the ``AMMD_LOG_LEVEL`` environment variable
(DEBUG, INFO, WARNING, ...; default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import _backend
from .classifier import describe_sequence
from .decompose import check_delta, decompose
from .descriptor import describe
from .distance import COMBINED_AMMD, Feature, Matcher, MeasureKind, manifold_distance
from .dataset import (PRESETS, DatasetManifest, SequenceFormat, Split, SplitProtocol, load_manifest,
                      load_sequence_file, make_splits, normalize_handedness, synthesize_dataset,
                      write_dataset)
from .experiments import describe_dataset, run_splits, spread_by_measure, sweep
from .geometry import ConfigError, InputError

log = logging.getLogger("ammd")


def _measure(text: str) -> MeasureKind:
    try:
        return MeasureKind.parse(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_delta_range(text: str) -> list[float]:
    """``a:b:step`` -> [a, a+step, ..., b] (inclusive, rounded to 10 decimals)."""
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"delta range must look like start:stop:step, got {text!r}") from None
    if not a > 1.0:
        raise ConfigError(f"delta range must start above 1, got {a}")
    if not step > 0 or b < a:
        raise ConfigError("delta range needs step > 0 and stop >= start")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 10) for i in range(n)]


def parse_k_range(text: str) -> list[int]:
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"k range must look like start:stop, got {text!r}") from None
    if a < 1 or b < a:
        raise ConfigError("k range needs 1 <= start <= stop")
    return list(range(a, b + 1))


def _format(args) -> SequenceFormat:
    base = PRESETS[args.format]
    if args.joints != base.joints:
        if base.columns is not None:
            raise ConfigError(f"--joints cannot be changed for the {args.format!r} preset")
        return SequenceFormat(joints=args.joints)
    return base


def _write(out, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_decompose(args) -> int:
    check_delta(args.delta)
    seq = load_sequence_file(args.input, _format(args))
    if args.handedness:
        seq = normalize_handedness(seq)
    patches = decompose(seq, args.delta, args.k)
    report = {
        "config": {"input": str(args.input), "delta": args.delta, "k": args.k,
                   "format": args.format, "joints": args.joints, "handedness": args.handedness},
        "frames": len(seq),
        "patches": [
            # frame numbers in the report are 1-based and inclusive
            dict(start=p.start + 1, end=p.end + 1, score=p.score,
                 **describe(p, diagnostics=True).to_dict())
            for p in patches
        ],
    }
    _write(args.out, _dumps(report))
    return 0


def cmd_distance(args) -> int:
    fmt = _format(args)
    seqs = [load_sequence_file(p, fmt) for p in (args.reference, args.test)]
    if args.handedness:
        seqs = [normalize_handedness(s) for s in seqs]
    ref, test = (describe_sequence(s, args.delta, args.k) for s in seqs)
    d = manifold_distance(ref, test, args.measure)
    _write(args.out, _dumps({"reference": str(args.reference), "test": str(args.test),
                             "measure": str(args.measure), "delta": args.delta, "k": args.k,
                             "reference_patches": len(ref), "test_patches": len(test),
                             "distance": d}))
    return 0


def _load(manifest: DatasetManifest, handedness: bool):
    seqs = manifest.load_all()
    if handedness:
        seqs = [normalize_handedness(s) for s in seqs]
    return seqs


def _splits_for(args, manifest):
    if args.protocol is None:
        raise ConfigError("--protocol is required with --manifest")
    protocol = SplitProtocol.parse(args.protocol, args.grouping, args.seed)
    return make_splits(manifest, protocol, args.reps)


def cmd_classify(args) -> int:
    check_delta(args.delta)
    if args.manifest:
        manifest = load_manifest(args.manifest)
        seqs = _load(manifest, args.handedness)
        splits = _splits_for(args, manifest)
        described = describe_dataset(seqs, args.delta, args.k)
        source = {"manifest": str(args.manifest), "protocol": args.protocol,
                  "grouping": args.grouping, "reps": args.reps}
    elif args.train_manifest and args.test_manifest:
        train_m, test_m = load_manifest(args.train_manifest), load_manifest(args.test_manifest)
        seqs = _load(train_m, args.handedness) + _load(test_m, args.handedness)
        n = len(train_m)
        splits = [Split(tuple(range(n)), tuple(range(n, len(seqs))), "explicit")]
        described = describe_dataset(seqs, args.delta, args.k)
        source = {"train_manifest": str(args.train_manifest), "test_manifest": str(args.test_manifest)}
    else:
        raise ConfigError("give --manifest with --protocol, or --train-manifest and --test-manifest")
    res = run_splits(described, splits, [args.measure], args.delta, args.k)[args.measure]
    report = {
        "config": dict(source, measure=str(args.measure), delta=args.delta, k=args.k,
                       seed=args.seed, handedness=args.handedness),
        "accuracy": res.mean_accuracy,
        "split_accuracies": res.accuracies,
        "splits": [dict(tag=t, **r.to_dict()) for t, r in zip(res.tags, res.reports)],
    }
    _write(args.out, _dumps(report))
    if args.out not in (None, "-"):
        print(f"accuracy {res.mean_accuracy:.4f} over {len(splits)} split(s) -> {args.out}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    if args.delta_range:
        deltas = parse_delta_range(args.delta_range)
    else:
        deltas = [check_delta(args.delta)]
    ks = parse_k_range(args.k_range) if args.k_range else [args.k]
    measures = args.measure or [MeasureKind(f, Matcher.AMMD) for f in Feature]
    manifest = load_manifest(args.manifest)
    seqs = _load(manifest, args.handedness)
    splits = _splits_for(args, manifest)
    rows = sweep(seqs, splits, deltas, ks, measures)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "k", "measure", "mean_accuracy", "splits"])
    for r in rows:
        w.writerow([repr(r["delta"]), r["k"], r["measure"], repr(r["mean_accuracy"]), r["splits"]])
    _write(args.out, buf.getvalue())
    spread = spread_by_measure(rows)
    print("accuracy spread (max-min) per measure: "
          + ", ".join(f"{m}={v:.3f}" for m, v in spread.items()), file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    manifest, seqs = synthesize_dataset(args.classes, args.per_class, args.frames, args.joints,
                                        args.noise, args.seed, args.spread, args.waypoints)
    path = write_dataset(args.out_dir, manifest, seqs)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ammd", description=__doc__.splitlines()[0])
    p.add_argument("--backend", choices=["cython", "python"], help="force a kernel backend")
    sub = p.add_subparsers(dest="command", required=True)

    def params(sp, measure=True):
        sp.add_argument("--delta", type=float, default=1.04, help="nonlinearity threshold (> 1)")
        sp.add_argument("--k", type=int, default=5, help="sequential neighbours per side")
        if measure:
            sp.add_argument("--measure", type=_measure, default=COMBINED_AMMD,
                            help="{mpd|mdd|combined}-{ammd|equal|closest|dtw}")
        sp.add_argument("--handedness", action="store_true",
                        help="swap left/right y coordinates for left-handed sequences")
        sp.add_argument("--out", help="output file (default stdout)")

    def fileformat(sp):
        sp.add_argument("--format", choices=sorted(PRESETS), default="canonical")
        sp.add_argument("--joints", type=int, default=15)

    def protocol(sp):
        sp.add_argument("--manifest", type=Path)
        sp.add_argument("--protocol", choices=["setupA", "setupB", "setupC", "new-person",
                                               "cross-person-env", "loo"])
        sp.add_argument("--grouping", default="all",
                        choices=["gestures", "actions", "subset1", "subset2", "subset3", "all"])
        sp.add_argument("--reps", type=int, default=1, help="repetitions for setups A/B/C")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("decompose", help="split one sequence file into patches")
    sp.add_argument("input", type=Path)
    params(sp, measure=False)
    fileformat(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("distance", help="manifold distance between two sequence files")
    sp.add_argument("reference", type=Path)
    sp.add_argument("test", type=Path)
    params(sp)
    fileformat(sp)
    sp.set_defaults(func=cmd_distance)

    sp = sub.add_parser("classify", help="fit + evaluate on a protocol or an explicit split")
    protocol(sp)
    sp.add_argument("--train-manifest", type=Path)
    sp.add_argument("--test-manifest", type=Path)
    params(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("sweep", help="accuracy over a delta / k grid, CSV output")
    protocol(sp)
    sp.add_argument("--delta", type=float, default=1.04)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--delta-range", help="start:stop:step, start > 1")
    sp.add_argument("--k-range", help="start:stop")
    sp.add_argument("--measure", type=_measure, action="append",
                    help="repeatable; default mpd-ammd, mdd-ammd, combined-ammd")
    sp.add_argument("--handedness", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("synth", help="write a synthetic dataset and its manifest")
    sp.add_argument("out_dir", type=Path)
    sp.add_argument("--classes", type=int, default=5)
    sp.add_argument("--per-class", type=int, default=10)
    sp.add_argument("--frames", type=int, default=60)
    sp.add_argument("--joints", type=int, default=15)
    sp.add_argument("--noise", type=float, default=1.0)
    sp.add_argument("--spread", type=float, default=5.0)
    sp.add_argument("--waypoints", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    level = os.environ.get("AMMD_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.backend:
            _backend.use_backend(args.backend)
        return args.func(args)
    except (InputError, ConfigError, RuntimeError) as exc:
        print(f"ammd {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
