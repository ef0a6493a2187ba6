"""Hot numeric kernels.

Each kernel has a vectorized numpy implementation and a loop implementation
compiled with numba. The loop versions are used when numba imports and the
environment variable ``MAHLER3D_DISABLE_NUMBA`` is unset (or ``0``); otherwise
the numpy versions are bound to the public names.

All kernels take plain arrays so that they can be jitted:

* ``tris`` is an ``(T, 3)`` int64 array of row indices, one triangle per row,
  oriented counterclockwise when seen from outside.
* ``ptr``/``idx`` is a CSR encoding of facet cycles (rows of ``points``).
"""

import os

import numpy as np

_DISABLED = os.environ.get("MAHLER3D_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by MAHLER3D_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations


def fan_volume_numpy(points, tris, apex):
    a = points[tris[:, 0]] - apex
    b = points[tris[:, 1]] - apex
    c = points[tris[:, 2]] - apex
    det = np.einsum("ij,ij->i", a, np.cross(b, c))
    return float(np.abs(det).sum() / 6.0)


def polar_moments_numpy(normals, offsets, z, tris):
    margins = offsets - normals @ z
    y = normals / margins[:, None]
    a = y[tris[:, 0]]
    b = y[tris[:, 1]]
    c = y[tris[:, 2]]
    vol = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0
    s = a + b + c
    total = vol.sum()
    m1 = (vol[:, None] * s).sum(axis=0) / 4.0
    # tetra with apex at the origin: int x x^T = |T|/20 (sum v v^T + s s^T)
    outer = (
        np.einsum("ti,tj->tij", a, a)
        + np.einsum("ti,tj->tij", b, b)
        + np.einsum("ti,tj->tij", c, c)
        + np.einsum("ti,tj->tij", s, s)
    )
    m2 = np.einsum("t,tij->ij", vol, outer) / 20.0
    return float(total), m1, m2


def facet_certificate_numpy(points, ptr, idx, tol):
    n_pts = points.shape[0]
    for k in range(ptr.shape[0] - 1):
        cyc = idx[ptr[k]:ptr[k + 1]]
        p = points[cyc]
        q = np.roll(p, -1, axis=0)
        normal = np.array([
            ((p[:, 1] - q[:, 1]) * (p[:, 2] + q[:, 2])).sum(),
            ((p[:, 2] - q[:, 2]) * (p[:, 0] + q[:, 0])).sum(),
            ((p[:, 0] - q[:, 0]) * (p[:, 1] + q[:, 1])).sum(),
        ])
        nn = np.linalg.norm(normal)
        if nn == 0.0:
            return False
        normal /= nn
        heights = p @ normal
        h = heights.mean()
        if np.abs(heights - h).max() > tol:
            return False
        mask = np.ones(n_pts, dtype=bool)
        mask[cyc] = False
        if mask.any() and (points[mask] @ normal).max() >= h - tol:
            return False
        r = np.roll(p, -2, axis=0)
        turns = np.cross(q - p, r - q) @ normal
        if (turns - tol * np.linalg.norm(r - p, axis=1)).min() <= 0.0:
            return False
    return True


# ---------------------------------------------------------------------------
# loop implementations (compiled when numba is available)


@njit(cache=True)
def fan_volume_loops(points, tris, apex):
    total = 0.0
    for t in range(tris.shape[0]):
        i, j, k = tris[t, 0], tris[t, 1], tris[t, 2]
        ax = points[i, 0] - apex[0]
        ay = points[i, 1] - apex[1]
        az = points[i, 2] - apex[2]
        bx = points[j, 0] - apex[0]
        by = points[j, 1] - apex[1]
        bz = points[j, 2] - apex[2]
        cx = points[k, 0] - apex[0]
        cy = points[k, 1] - apex[1]
        cz = points[k, 2] - apex[2]
        det = ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)
        total += abs(det)
    return total / 6.0


@njit(cache=True)
def polar_moments_loops(normals, offsets, z, tris):
    nf = normals.shape[0]
    y = np.empty((nf, 3))
    for k in range(nf):
        margin = offsets[k] - (normals[k, 0] * z[0] + normals[k, 1] * z[1] + normals[k, 2] * z[2])
        for d in range(3):
            y[k, d] = normals[k, d] / margin
    total = 0.0
    m1 = np.zeros(3)
    m2 = np.zeros((3, 3))
    s = np.empty(3)
    for t in range(tris.shape[0]):
        a = y[tris[t, 0]]
        b = y[tris[t, 1]]
        c = y[tris[t, 2]]
        det = (a[0] * (b[1] * c[2] - b[2] * c[1])
               - a[1] * (b[0] * c[2] - b[2] * c[0])
               + a[2] * (b[0] * c[1] - b[1] * c[0]))
        vol = abs(det) / 6.0
        total += vol
        for d in range(3):
            s[d] = a[d] + b[d] + c[d]
            m1[d] += vol * s[d] / 4.0
        for r in range(3):
            for q in range(3):
                m2[r, q] += vol * (a[r] * a[q] + b[r] * b[q] + c[r] * c[q] + s[r] * s[q]) / 20.0
    return total, m1, m2


@njit(cache=True)
def facet_certificate_loops(points, ptr, idx, tol):
    n_pts = points.shape[0]
    mark = np.zeros(n_pts, dtype=np.bool_)
    normal = np.empty(3)
    for k in range(ptr.shape[0] - 1):
        lo = ptr[k]
        m = ptr[k + 1] - lo
        normal[:] = 0.0
        for e in range(m):
            p = points[idx[lo + e]]
            q = points[idx[lo + (e + 1) % m]]
            normal[0] += (p[1] - q[1]) * (p[2] + q[2])
            normal[1] += (p[2] - q[2]) * (p[0] + q[0])
            normal[2] += (p[0] - q[0]) * (p[1] + q[1])
        nn = np.sqrt(normal[0] ** 2 + normal[1] ** 2 + normal[2] ** 2)
        if nn == 0.0:
            return False
        for d in range(3):
            normal[d] /= nn
        h = 0.0
        for e in range(m):
            p = points[idx[lo + e]]
            h += p[0] * normal[0] + p[1] * normal[1] + p[2] * normal[2]
        h /= m
        for e in range(m):
            p = points[idx[lo + e]]
            if abs(p[0] * normal[0] + p[1] * normal[1] + p[2] * normal[2] - h) > tol:
                return False
            mark[idx[lo + e]] = True
        ok = True
        for i in range(n_pts):
            if not mark[i]:
                p = points[i]
                if p[0] * normal[0] + p[1] * normal[1] + p[2] * normal[2] >= h - tol:
                    ok = False
        for e in range(m):
            mark[idx[lo + e]] = False
        if not ok:
            return False
        for e in range(m):
            p = points[idx[lo + e]]
            q = points[idx[lo + (e + 1) % m]]
            r = points[idx[lo + (e + 2) % m]]
            ux, uy, uz = q[0] - p[0], q[1] - p[1], q[2] - p[2]
            vx, vy, vz = r[0] - q[0], r[1] - q[1], r[2] - q[2]
            turn = ((uy * vz - uz * vy) * normal[0]
                    + (uz * vx - ux * vz) * normal[1]
                    + (ux * vy - uy * vx) * normal[2])
            span = np.sqrt((r[0] - p[0]) ** 2 + (r[1] - p[1]) ** 2 + (r[2] - p[2]) ** 2)
            if turn <= tol * span:
                return False
    return True


if HAVE_NUMBA:
    fan_volume = fan_volume_loops
    polar_moments = polar_moments_loops
    facet_certificate = facet_certificate_loops
else:
    fan_volume = fan_volume_numpy
    polar_moments = polar_moments_numpy
    facet_certificate = facet_certificate_numpy
