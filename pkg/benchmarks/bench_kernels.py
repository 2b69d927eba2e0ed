"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--h 0.1] [--points 60] [--repeat 3]

Prints wall time per backend and the largest disagreement between them.
"""

import argparse
import time

import numpy as np

from toposurf import kernels
from toposurf.builders import BuildSpec, build


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def march_args(mesh, source):
    vt_ptr, vt_idx = mesh.vertex_triangles()
    ve_ptr, ve_nbr, ve_len = mesh.vertex_edges()
    return (
        mesh.n_vertices,
        np.ascontiguousarray(mesh.triangles, dtype=np.int64),
        np.ascontiguousarray(mesh.tri_lengths, dtype=float),
        vt_ptr,
        vt_idx,
        ve_ptr,
        ve_nbr,
        np.ascontiguousarray(ve_len, dtype=float),
        np.array([source], dtype=np.int64),
        np.zeros(1),
    )


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.1, help="mesh size of the R=3 hyperbolic disk")
    ap.add_argument("--points", type=int, default=60, help="points for exact four-point enumeration")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    impls = kernels.backends()
    mesh = build(BuildSpec("hyperbolic_disk", radius=3, h=args.h))
    fm_args = march_args(mesh, int(mesh.labels["center"][0]))
    rng = np.random.default_rng(0)
    X = rng.random((args.points, 3))
    D = np.ascontiguousarray(np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1)))

    rows = {}
    for name, mod in impls.items():
        t_fm, dist = _best(lambda: mod.fast_march(*fm_args), args.repeat)
        t_fp, (gap, _) = _best(lambda: mod.four_point_range(D, 0, args.points - 3), args.repeat)
        rows[name] = (t_fm, np.asarray(dist), t_fp, gap)

    print(f"fast_march: {mesh.n_vertices} vertices; four_point_range: {args.points} points")
    print(f"{'backend':<8} {'fast_march [s]':>15} {'four_point [s]':>15}")
    for name, (t_fm, _, t_fp, _) in rows.items():
        print(f"{name:<8} {t_fm:15.4f} {t_fp:15.4f}")
    if {"python", "cython"} <= rows.keys():
        py, cy = rows["python"], rows["cython"]
        print(f"speedup  {py[0] / cy[0]:15.1f} {py[2] / cy[2]:15.1f}")
        print(f"max |distance difference| {np.max(np.abs(py[1] - cy[1])):.3e}; four-point gap difference {abs(py[3] - cy[3]):.3e}")
    else:
        print("compiled backend not available")


if __name__ == "__main__":
    main()
