"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Each row is the best of N runs, in milliseconds, for the same inputs on
both backends; the last column is the speedup of the compiled kernels.
"""
import argparse
import json
import sys
import timeit

import numpy as np

import ammd
from ammd import _backend
from ammd.classifier import describe_sequence
from ammd.dataset import SplitProtocol, make_splits, synthesize_dataset
from ammd.experiments import describe_dataset, run_splits


def cases():
    rng = np.random.default_rng(0)
    manifest, seqs = synthesize_dataset(classes=5, per_class=10, frames=120, seed=0)
    X = seqs[0].postures
    long_patch = np.cumsum(rng.normal(size=(60, 45)), axis=0)
    R = describe_sequence(seqs[0], 1.04, 5)
    T = describe_sequence(seqs[11], 1.04, 5)
    m, n = 40, 40
    C = rng.random((m, n))
    U = rng.normal(size=(m, 45))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    flat = np.zeros(m, dtype=bool)
    splits = make_splits(manifest, SplitProtocol.parse("new-person"))

    def new_person():
        described = describe_dataset(seqs, 1.04, 5)
        run_splits(described, splits, [ammd.MeasureKind.parse("combined-ammd")], 1.04, 5)

    k = lambda: _backend.kernels()  # noqa: E731
    return [
        ("nonlinearity score, 60 frames, k=5", lambda: k().nonlinearity(long_patch, 5)),
        ("decompose, 120 frames, k=5", lambda: k().decompose_bounds(X, 1.04, 5)),
        ("sine matrices, 40 x 40 patches", lambda: k().sine_matrices(U, U, flat, U, U, flat)),
        ("ammd on a 40 x 40 matrix", lambda: k().ammd_from_matrix(C)),
        ("dtw on a 40 x 40 matrix", lambda: k().dtw_from_matrix(C)),
        ("manifold distance (combined-ammd)", lambda: ammd.ammd(R, T)),
        ("new-person run, 50 sequences", new_person),
    ]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="also write the timings here")
    args = p.parse_args(argv)

    backends = ammd.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; timing the numpy fallback only", file=sys.stderr)
    rows = []
    for name, fn in cases():
        row = {"case": name}
        for b in backends:
            prev = ammd.use_backend(b)
            try:
                fn()  # warm up
                number = 1 if name.startswith("new-person") else 20
                best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
                row[b] = best * 1e3
            finally:
                ammd.use_backend(prev)
        rows.append(row)

    head = f"{'case':40s}" + "".join(f"{b + ' ms':>14s}" for b in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10s}"
    print(head)
    for r in rows:
        line = f"{r['case']:40s}" + "".join(f"{r[b]:14.3f}" for b in backends)
        if len(backends) == 2:
            line += f"{r['python'] / r['cython']:9.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
