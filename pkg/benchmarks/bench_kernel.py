"""Compare the compiled and pure-Python annealing kernels on identical sweeps.

    python benchmarks/bench_kernel.py [--resolution 64] [--sweeps 5]

Both backends consume the same random draws from the same state, so the
resulting label arrays must agree byte for byte; the script checks that and
prints proposals per second for each backend.
"""

import argparse
import copy
import math
import time

import numpy as np

from wetcluster.cluster import InstanceSpec
from wetcluster.lattice import kernel
from wetcluster.lattice.anneal import OracleConfig, _draws, _state, active_band, frozen_ring, initial_field, wet_cap


def make_state(resolution: int, delta: float = 0.01):
    trace = [{"angle": math.pi / 2 + k * 2 * math.pi / 3, "label": k + 1} for k in range(3)]
    spec = InstanceSpec.from_dict({"domain": "ball", "weights": [1, 1, 1, 1], "delta": delta, "trace": trace})
    cfg = OracleConfig(resolution=resolution)
    f = initial_field(spec, cfg)
    st = _state(f, frozen_ring(f, cfg.ring), spec.weights, cfg.stencil, wet_cap(delta, f.cell))
    st["mobile"] = active_band(st, cfg.band)
    return st


def run(backend: str, st: dict, draws: list, temp: float) -> tuple[float, int]:
    t = time.perf_counter()
    n = 0
    for d in draws:
        kernel.run_sweep(st, d, temp, 0.15, 0.0, 0.05, 0, backend)
        n += len(d["pick"])
    return time.perf_counter() - t, n


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=64)
    ap.add_argument("--sweeps", type=int, default=5)
    ap.add_argument("--temp", type=float, default=1.0)
    args = ap.parse_args()

    base = make_state(args.resolution)
    rng = np.random.default_rng(0)
    n = max(len(base["mobile"]), 1)
    draws = [_draws(rng, 4 * n, n) for _ in range(args.sweeps)]
    print(f"resolution {args.resolution}: {len(base['mobile'])} band cells, {args.sweeps} sweeps of {4 * n} proposals")
    results = {}
    for backend in kernel.available():
        st = copy.deepcopy(base)
        wall, moves = run(backend, st, draws, args.temp)
        results[backend] = (wall, st["lab"].copy())
        print(f"  {backend:7s} {wall:8.3f} s  {moves / wall:12.0f} proposals/s")
    if "cython" in results:
        same = np.array_equal(results["cython"][1], results["python"][1])
        print(f"  speedup {results['python'][0] / results['cython'][0]:.1f}x, identical labels: {same}")
    else:
        print("  compiled kernel not built; only the Python backend ran")


if __name__ == "__main__":
    main()
