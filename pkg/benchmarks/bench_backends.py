"""Time the numba and pure-numpy kernel backends side by side.

Each backend runs in its own interpreter (the backend is fixed at import time
by HOLOPHASE_BACKEND).  Timings are best-of-repeat after one warm-up call, so
numba compilation is excluded.

    python benchmarks/bench_backends.py [--repeat 5] [--json]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
import holophase
from holophase import analysis, kernels, model, uhlmann
from holophase.linalg import unitary_exp_batch

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
h = rng.normal(size=(4096, 4, 4)) + 1j * rng.normal(size=(4096, 4, 4))
h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
steps = unitary_exp_batch(0.01j * h)
loop = model.make_loop("equator", 4096)

cases = {
    "jacobi 4096x(4x4)": lambda: kernels.jacobi_eigh_batch(h, 1e-14, 50),
    "ordered_product N=4096": lambda: kernels.ordered_product(steps),
    "cumulative_product N=4096": lambda: kernels.cumulative_product(steps),
    "simpson_kx n=2048": lambda: kernels.simpson_kx(0.0, 0.5, 2048),
    "holonomy equator N=4096": lambda: uhlmann.holonomy(loop, 0.5),
    "diagram 81x60": lambda: analysis.phase_diagram((-5, -1), 81, (0.02, 1.2), 60, threads=1),
}
out = {}
for name, fn in cases.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps({"backend": holophase.BACKEND, "timings": out}))
"""


def run_backend(backend, repeat):
    env = dict(os.environ, HOLOPHASE_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", action="store_true", help="print raw JSON instead of a table")
    args = parser.parse_args(argv)

    results = {b: run_backend(b, args.repeat) for b in ("numpy", "numba")}
    if results["numba"]["backend"] != "numba":
        print("note: numba not importable, both columns use numpy", file=sys.stderr)
    if args.json:
        print(json.dumps(results, indent=2))
        return 0
    names = list(results["numpy"]["timings"])
    width = max(map(len, names))
    print(f"{'case':<{width}}  {'numpy [ms]':>11}  {'numba [ms]':>11}  {'speed-up':>8}")
    for name in names:
        a = results["numpy"]["timings"][name] * 1e3
        b = results["numba"]["timings"][name] * 1e3
        print(f"{name:<{width}}  {a:11.3f}  {b:11.3f}  {a / b:8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
