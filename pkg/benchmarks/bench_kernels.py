"""Compare the compiled and pure-Python clustering kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 50 200 1000] [--repeat 5]

Times ``cluster_sorted`` (threshold + HAC + ranking) on random score vectors
and, unless ``--no-end-to-end`` is given, one chronological sweep of the
default synthetic suite under each backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sbld import kernels

SWEEP_SNIPPET = """
import tempfile, time
from sbld import kernels
from sbld.abstraction import AbstractionConfig
from sbld.corpus import abstract_corpus, load_corpus
from sbld.evaluation import load_signatures, prepare_tests, sweep
from sbld.synth import SynthParams, generate
root = tempfile.mkdtemp()
paths = generate(root, SynthParams(tests=1), seed=0)
logs, vocab = abstract_corpus(load_corpus(root), AbstractionConfig())
sigs, assignment = load_signatures(paths["signatures"])
test = prepare_tests(logs, vocab, sigs, assignment)[0]
start = time.perf_counter()
n = len(sweep(test))
print(kernels.BACKEND, n, time.perf_counter() - start)
"""


def case(n, rng):
    values = np.round(rng.random(n), 3)
    ids = np.arange(n, dtype=np.int64)
    order = np.lexsort((ids, values))
    return values[order], ids[order]


def bench_kernels(sizes, repeat):
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    print(f"{'n':>6}  " + "  ".join(f"{name:>12}" for name in backends) + "     speedup")
    for n in sizes:
        values, ids = case(n, rng)
        times = {}
        for name, mod in backends.items():
            number = max(1, 2000 // n)
            best = min(timeit.repeat(lambda: mod.cluster_sorted(values, ids, 0), number=number, repeat=repeat))
            times[name] = best / number
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{n:>6}  " + "  ".join(f"{t * 1e6:>10.1f}us" for t in times.values()) + f"  {speed:>9.1f}x")


def bench_sweep():
    print("\nsweep of one synthetic test (10 failing x 20 passing, all measures):")
    for pure in ("", "1"):
        env = dict(os.environ, SBLD_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", SWEEP_SNIPPET], env=env, capture_output=True, text=True, check=True)
        backend, records, seconds = out.stdout.split()
        print(f"  {backend:>7}: {records} records in {float(seconds):.2f}s")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 50, 200, 1000, 5000])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--no-end-to-end", action="store_true")
    args = parser.parse_args()
    bench_kernels(args.sizes, args.repeat)
    if not args.no_end_to_end:
        bench_sweep()


if __name__ == "__main__":
    main()
