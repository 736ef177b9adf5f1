"""Compare the compiled and pure-Python kernel backends.

The backend is fixed at import, so each one runs in its own interpreter::

    python3 benchmarks/bench_kernels.py            # both backends, side by side
    python3 benchmarks/bench_kernels.py --worker   # current backend only
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np


def worker(sizes, number):
    from hdivtest import kernels
    from hdivtest.inference import GridSpec, invert
    from hdivtest.simulation import DGPConfig, Sparsity, generate

    out = {"backend": kernels.BACKEND, "rows": []}
    for n, K in sizes:
        data = generate(DGPConfig(n=n, K=K, mu2=30.0, sparsity=Sparsity.sparse(K)), 0)
        e = np.asarray(data.Y - data.X)
        P = data.gram
        grid = GridSpec(-4, 6, 100)
        cases = {
            "pair_sums": lambda: kernels.pair_sums(P, e),
            "column_scores": lambda: kernels.column_scores(data.Z, e),
            "invert_jar_100": lambda: invert(data, grid, "JAR"),
        }
        for name, fn in cases.items():
            fn()
            t = min(timeit.repeat(fn, number=number, repeat=5)) / number
            out["rows"].append({"n": n, "K": K, "case": name, "seconds": t})
    print(json.dumps(out))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--worker", action="store_true")
    ap.add_argument("--sizes", default="200x100,200x300,500x300")
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args()
    sizes = [tuple(int(v) for v in s.split("x")) for s in args.sizes.split(",")]
    if args.worker:
        worker(sizes, args.number)
        return

    results = {}
    for label, env in (("cython", {}), ("python", {"HDIVTEST_PURE_PYTHON": "1"})):
        proc = subprocess.run(
            [sys.executable, __file__, "--worker", "--sizes", args.sizes, "--number", str(args.number)],
            env={**os.environ, **env}, capture_output=True, text=True, check=True,
        )
        res = json.loads(proc.stdout)
        if res["backend"] != label:
            print(f"note: requested {label} backend, got {res['backend']}")
        results[label] = {(r["n"], r["K"], r["case"]): r["seconds"] for r in res["rows"]}

    print(f"{'n':>5} {'K':>5} {'case':<16} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    for key, tc in results["cython"].items():
        tp = results["python"][key]
        print(f"{key[0]:>5} {key[1]:>5} {key[2]:<16} {tc * 1e3:>10.3f} {tp * 1e3:>10.3f} {tp / tc:>8.2f}")


if __name__ == "__main__":
    main()
