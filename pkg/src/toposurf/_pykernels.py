"""Pure-Python/numpy versions of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation so that both backends
return bit-identical results on the same inputs.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

INF = math.inf


def tri_update(ta, tb, a, b, c):
    """Distance at C from accepted values at A and B of triangle ABC.

    ``a = |BC|``, ``b = |AC|``, ``c = |AB|``.  The triangle is unfolded into
    the plane with A at the origin and B on the positive x-axis.  If the
    two distance circles around A and B meet, a virtual point source below
    AB is used; otherwise a planar front.  Returns ``inf`` when the
    characteristic through C does not cross the edge AB.
    """
    xc = (b * b + c * c - a * a) / (2.0 * c)
    yc2 = b * b - xc * xc
    if yc2 <= 0.0:
        return INF
    yc = math.sqrt(yc2)
    xs = (ta * ta + c * c - tb * tb) / (2.0 * c)
    ys2 = ta * ta - xs * xs
    if ys2 >= 0.0:
        ys = -math.sqrt(ys2)
        t = -ys / (yc - ys)
        xp = xs + (xc - xs) * t
        if 0.0 <= xp <= c:
            dx = xc - xs
            dy = yc - ys
            return math.sqrt(dx * dx + dy * dy)
        return INF
    dlt = tb - ta
    if dlt > c or dlt < -c:
        return INF
    nx = dlt / c
    ny2 = 1.0 - nx * nx
    if ny2 <= 0.0:
        return INF
    ny = math.sqrt(ny2)
    xp = xc - nx * yc / ny
    if 0.0 <= xp <= c:
        return ta + nx * xc + ny * yc
    return INF


def fast_march(n, tri, tri_len, vt_ptr, vt_idx, ve_ptr, ve_nbr, ve_len, sources, init):
    """Fast marching on an intrinsic triangle mesh plus extra graph edges.

    ``tri_len[f, i]`` is the length of the edge of triangle ``f`` opposite
    its ``i``-th vertex.  Vertices never reached keep ``inf``.
    """
    tri = tri.tolist()
    tri_len = tri_len.tolist()
    vt_ptr = vt_ptr.tolist()
    vt_idx = vt_idx.tolist()
    ve_ptr = ve_ptr.tolist()
    ve_nbr = ve_nbr.tolist()
    ve_len = ve_len.tolist()

    dist = [INF] * n
    done = [False] * n
    heap = []
    for s, d0 in zip(sources.tolist(), init.tolist()):
        if d0 < dist[s]:
            dist[s] = d0
            heapq.heappush(heap, (d0, s))

    while heap:
        d, v = heapq.heappop(heap)
        if done[v] or d > dist[v]:
            continue
        done[v] = True
        for e in range(ve_ptr[v], ve_ptr[v + 1]):
            w = ve_nbr[e]
            if done[w]:
                continue
            cand = d + ve_len[e]
            if cand < dist[w]:
                dist[w] = cand
                heapq.heappush(heap, (cand, w))
        for p in range(vt_ptr[v], vt_ptr[v + 1]):
            f = vt_idx[p]
            tv = tri[f]
            tl = tri_len[f]
            if tv[0] == v:
                ia = 0
            elif tv[1] == v:
                ia = 1
            else:
                ia = 2
            for off in (1, 2):
                ix = (ia + off) % 3
                iy = (ia + 3 - off) % 3
                x = tv[ix]
                y = tv[iy]
                if done[x] or not done[y]:
                    continue
                # A = v, B = y, C = x
                cand = tri_update(d, dist[y], tl[ia], tl[iy], tl[ix])
                if cand < dist[x]:
                    dist[x] = cand
                    heapq.heappush(heap, (cand, x))
    return np.asarray(dist, dtype=np.float64)


def four_point_range(D, i_start, i_end):
    """Largest ``L - M`` (twice the four-point delta) over quadruples with
    first index in ``[i_start, i_end)``; first lexicographic maximiser wins.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    n = D.shape[0]
    best = -1.0
    wit = (-1, -1, -1, -1)
    for i in range(i_start, min(i_end, n)):
        for j in range(i + 1, n - 2):
            kk, ll = np.triu_indices(n - j - 1, k=1)
            if kk.size == 0:
                continue
            kk = kk + j + 1
            ll = ll + j + 1
            s = np.stack([D[i, j] + D[kk, ll], D[i, kk] + D[j, ll], D[i, ll] + D[j, kk]])
            s.sort(axis=0)
            gap = s[2] - s[1]
            m = int(np.argmax(gap))
            if gap[m] > best:
                best = float(gap[m])
                wit = (i, j, int(kk[m]), int(ll[m]))
    return best, wit


def four_point_quads(D, quads):
    """Largest ``L - M`` over the rows of ``quads``; returns (value, row)."""
    D = np.ascontiguousarray(D, dtype=np.float64)
    q = np.asarray(quads, dtype=np.int64)
    if q.shape[0] == 0:
        return -1.0, -1
    i, j, k, l = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    s = np.stack([D[i, j] + D[k, l], D[i, k] + D[j, l], D[i, l] + D[j, k]])
    s.sort(axis=0)
    gap = s[2] - s[1]
    m = int(np.argmax(gap))
    return float(gap[m]), m
