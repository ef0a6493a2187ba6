"""Compare the numba and pure-numpy kernel backends.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``MAHLER3D_DISABLE_NUMBA``.  Usage::

    python benchmarks/bench_kernels.py [--sizes 50 500 2000] [--repeat 20]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

WORKER = r"""
import json, sys, timeit, warnings
import numpy as np
from mahler3d import BACKEND, random_polytope, santalo_point, shape
from mahler3d import _kernels
from mahler3d.speeds import SpeedAssignment

sizes, repeat = json.loads(sys.argv[1]), int(sys.argv[2])
out = {"backend": BACKEND, "rows": []}
for n in sizes:
    P = random_polytope(n, 0)
    z = santalo_point(P).point
    ptr, idx = P.facet_csr
    tris, dual = P.triangles, P.dual_triangles
    # first calls compile under numba; keep them out of the timings
    _kernels.fan_volume(P.points, tris, P.barycenter)
    _kernels.polar_moments(P.normals, P.offsets, z, dual)
    _kernels.facet_certificate(P.points, ptr, idx, P.plane_tol)
    cases = {
        "fan_volume": lambda: _kernels.fan_volume(P.points, tris, P.barycenter),
        "polar_moments": lambda: _kernels.polar_moments(P.normals, P.offsets, z, dual),
        "facet_certificate": lambda: _kernels.facet_certificate(P.points, ptr, idx, P.plane_tol),
        "santalo_point": lambda: santalo_point(P, probes=0, check=False),
    }
    for name, fn in cases.items():
        reps = repeat if name != "santalo_point" else max(1, repeat // 10)
        best = min(timeit.repeat(fn, number=1, repeat=reps))
        out["rows"].append({"V": P.V, "F": P.F, "kernel": name, "seconds": best})
print(json.dumps(out))
"""


def run(disable: bool, sizes, repeat):
    env = dict(os.environ)
    env["MAHLER3D_DISABLE_NUMBA"] = "1" if disable else "0"
    res = subprocess.run([sys.executable, "-c", WORKER, json.dumps(sizes), str(repeat)],
                         capture_output=True, text=True, env=env, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 500, 2000])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    numba = run(False, args.sizes, args.repeat)
    numpy = run(True, args.sizes, args.repeat)
    if numba["backend"] != "numba":
        print("numba is not importable; both columns use the numpy backend", file=sys.stderr)
    print(f"{'V':>6} {'F':>6} {'kernel':<18} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}")
    for a, b in zip(numba["rows"], numpy["rows"]):
        ta, tb = 1e3 * a["seconds"], 1e3 * b["seconds"]
        print(f"{a['V']:>6} {a['F']:>6} {a['kernel']:<18} {ta:>11.4f} {tb:>11.4f} {tb / ta:>8.2f}")


if __name__ == "__main__":
    main()
