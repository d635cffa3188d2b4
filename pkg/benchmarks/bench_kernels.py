"""Throughput comparison of the compiled kernels against the numpy
fallback: P1 residual assembly, Jacobian block assembly and the radial
RK4 march.

    python benchmarks/bench_kernels.py [--h 0.02] [--rk-steps 200000]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

try:
    import mcflow  # noqa: F401
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mcflow import meshing, problems, solver  # noqa: E402
from mcflow._kernels import _fallback  # noqa: E402
from mcflow.geometry import Ellipse  # noqa: E402

try:
    from mcflow._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--h", type=float, default=0.02)
    parser.add_argument("--rk-steps", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    mesh = meshing.triangulate(Ellipse(1.0, 1.0), args.h)
    fld = solver.newton_solve(mesh, problems.PowerMC(2.0))
    values = fld.values
    print(f"mesh: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles; "
          f"rk4 march: {args.rk_steps} steps")
    if _core is None:
        print("compiled kernels not built (pip install -e . with a C "
              "compiler); benchmarking the fallback only")

    cases = [
        ("residual", lambda impl: lambda: impl.residual_full(
            mesh.triangles, mesh.grad_hat, mesh.tri_areas, values, 0, 2.0)),
        ("jacobian", lambda impl: lambda: impl.jacobian_blocks(
            mesh.triangles, mesh.grad_hat, mesh.tri_areas, values, 0, 2.0)),
        ("rk4 slope", lambda impl: lambda: impl.rk4_slope(
            1, 1.0, 1e-4, 1.0, args.rk_steps, 1e-4, 1e8)),
    ]
    header = f"{'kernel':12} {'fallback':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, make in cases:
        t_py = timeit(make(_fallback), args.repeats)
        if _core is not None:
            t_c = timeit(make(_core), args.repeats)
            print(f"{name:12} {t_py * 1e3:10.2f}ms {t_c * 1e3:10.2f}ms "
                  f"{t_py / t_c:8.1f}x")
        else:
            print(f"{name:12} {t_py * 1e3:10.2f}ms {'n/a':>12} {'n/a':>9}")


if __name__ == "__main__":
    main()
