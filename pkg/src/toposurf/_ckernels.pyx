# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled versions of the hot kernels (see ``_pykernels`` for the reference)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair

cnp.import_array()


cdef inline double _tri_update(double ta, double tb, double a, double b, double c) noexcept nogil:
    cdef double xc, yc2, yc, xs, ys2, ys, t, xp, dx, dy, dlt, nx, ny2, ny
    xc = (b * b + c * c - a * a) / (2.0 * c)
    yc2 = b * b - xc * xc
    if yc2 <= 0.0:
        return INFINITY
    yc = sqrt(yc2)
    xs = (ta * ta + c * c - tb * tb) / (2.0 * c)
    ys2 = ta * ta - xs * xs
    if ys2 >= 0.0:
        ys = -sqrt(ys2)
        t = -ys / (yc - ys)
        xp = xs + (xc - xs) * t
        if 0.0 <= xp and xp <= c:
            dx = xc - xs
            dy = yc - ys
            return sqrt(dx * dx + dy * dy)
        return INFINITY
    dlt = tb - ta
    if dlt > c or dlt < -c:
        return INFINITY
    nx = dlt / c
    ny2 = 1.0 - nx * nx
    if ny2 <= 0.0:
        return INFINITY
    ny = sqrt(ny2)
    xp = xc - nx * yc / ny
    if 0.0 <= xp and xp <= c:
        return ta + nx * xc + ny * yc
    return INFINITY


def tri_update(double ta, double tb, double a, double b, double c):
    return _tri_update(ta, tb, a, b, c)


def fast_march(Py_ssize_t n,
               const cnp.int64_t[:, ::1] tri,
               const double[:, ::1] tri_len,
               const cnp.int64_t[::1] vt_ptr,
               const cnp.int64_t[::1] vt_idx,
               const cnp.int64_t[::1] ve_ptr,
               const cnp.int64_t[::1] ve_nbr,
               const double[::1] ve_len,
               const cnp.int64_t[::1] sources,
               const double[::1] init):
    cdef cnp.ndarray[double, ndim=1] dist_arr = np.full(n, np.inf)
    cdef double[::1] dist = dist_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] done = done_arr
    # max-heap on (-d, -v): pops smallest d, then smallest v, like heapq
    cdef priority_queue[pair[double, Py_ssize_t]] heap
    cdef Py_ssize_t i, v, w, e, p, f, ia, ix, iy, x, y, off, s
    cdef double d, cand
    with nogil:
        for i in range(sources.shape[0]):
            s = sources[i]
            if init[i] < dist[s]:
                dist[s] = init[i]
                heap.push(pair[double, Py_ssize_t](-init[i], -s))
        while not heap.empty():
            d = -heap.top().first
            v = -heap.top().second
            heap.pop()
            if done[v] or d > dist[v]:
                continue
            done[v] = 1
            for e in range(ve_ptr[v], ve_ptr[v + 1]):
                w = ve_nbr[e]
                if done[w]:
                    continue
                cand = d + ve_len[e]
                if cand < dist[w]:
                    dist[w] = cand
                    heap.push(pair[double, Py_ssize_t](-cand, -w))
            for p in range(vt_ptr[v], vt_ptr[v + 1]):
                f = vt_idx[p]
                if tri[f, 0] == v:
                    ia = 0
                elif tri[f, 1] == v:
                    ia = 1
                else:
                    ia = 2
                for off in range(1, 3):
                    ix = (ia + off) % 3
                    iy = (ia + 3 - off) % 3
                    x = tri[f, ix]
                    y = tri[f, iy]
                    if done[x] or not done[y]:
                        continue
                    cand = _tri_update(d, dist[y], tri_len[f, ia], tri_len[f, iy], tri_len[f, ix])
                    if cand < dist[x]:
                        dist[x] = cand
                        heap.push(pair[double, Py_ssize_t](-cand, -x))
    return dist_arr


cdef inline double _gap(double s1, double s2, double s3) noexcept nogil:
    cdef double hi, mid, t
    # sort three values, return largest minus second largest
    if s1 < s2:
        t = s1; s1 = s2; s2 = t
    if s2 < s3:
        t = s2; s2 = s3; s3 = t
    if s1 < s2:
        t = s1; s1 = s2; s2 = t
    return s1 - s2


def four_point_range(const double[:, ::1] D, Py_ssize_t i_start, Py_ssize_t i_end):
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t i, j, k, l
    cdef Py_ssize_t bi = -1, bj = -1, bk = -1, bl = -1
    cdef double best = -1.0, g, dij
    if i_end > n:
        i_end = n
    with nogil:
        for i in range(i_start, i_end):
            for j in range(i + 1, n):
                dij = D[i, j]
                for k in range(j + 1, n):
                    for l in range(k + 1, n):
                        g = _gap(dij + D[k, l], D[i, k] + D[j, l], D[i, l] + D[j, k])
                        if g > best:
                            best = g
                            bi = i; bj = j; bk = k; bl = l
    return best, (bi, bj, bk, bl)


def four_point_quads(const double[:, ::1] D, const cnp.int64_t[:, ::1] quads):
    cdef Py_ssize_t m = quads.shape[0]
    cdef Py_ssize_t r, best_row = -1
    cdef Py_ssize_t i, j, k, l
    cdef double best = -1.0, g
    with nogil:
        for r in range(m):
            i = quads[r, 0]; j = quads[r, 1]; k = quads[r, 2]; l = quads[r, 3]
            g = _gap(D[i, j] + D[k, l], D[i, k] + D[j, l], D[i, l] + D[j, k])
            if g > best:
                best = g
                best_row = r
    return best, best_row
