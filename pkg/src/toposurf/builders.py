"""Meshes of model surfaces.

Rotationally symmetric surfaces (hyperbolic disk, funnel, cusp, flat
cylinder) are meshed as stacks of vertex rings in coordinates ``(t, theta)``
with metric ``dt^2 + w(t)^2 dtheta^2``; edge lengths are Simpson quadratures
of that metric along straight segments in ``(t, theta)``.  Pairs of pants
are two copies of a right-angled hexagon, glued along alternate sides, and
pants trees glue identical pants along their cuffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import Delaunay

from .comparison import ParameterError
from .mesh import MeshError, TriMesh

KINDS = ("hyperbolic_disk", "flat_cylinder", "funnel", "cusp", "ypiece", "pants_tree", "disk_minus_disks")


class BuildError(ValueError):
    pass


@dataclass
class BuildSpec:
    """What to build.  Only the fields relevant to ``kind`` are read.

    ``holes`` entries are ``(r, theta, radius)``: a hole centred at geodesic
    polar coordinates ``(r, theta)`` of the hyperbolic disk, of hyperbolic
    radius ``radius`` (0 for a puncture).
    """

    kind: str
    h: float = 0.1
    radius: float = 3.0
    circumference: float = 2.0
    height: float = 10.0
    L: float = 1.0
    ell0: float = 1.0
    t_max: float = 4.0
    lengths: tuple = (1.0, 1.0, 1.0)
    depth: int = 1
    l: float = 1.0
    holes: list = field(default_factory=list)
    edge_model: str = "geodesic"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BuildError(f"unknown surface kind {self.kind!r}")
        if not (self.h > 0):
            raise BuildError("resolution h must be > 0")
        for name in ("radius", "circumference", "height", "L", "ell0", "t_max", "l"):
            if not (getattr(self, name) > 0):
                raise BuildError(f"{name} must be > 0")
        if any(not (x > 0) for x in self.lengths):
            raise BuildError("Y-piece boundary lengths must be > 0")
        if self.depth < 0:
            raise BuildError("pants tree depth must be >= 0")
        if self.edge_model not in ("geodesic", "quadrature"):
            raise BuildError("edge_model must be 'geodesic' or 'quadrature'")

    @classmethod
    def from_mapping(cls, m: dict) -> "BuildSpec":
        """Parse string-valued ``key = value`` settings (as read from a config block)."""
        kw = {}
        for key, val in m.items():
            if key in ("kind", "edge_model"):
                kw[key] = str(val).strip()
            elif key in ("h", "radius", "circumference", "height", "L", "ell0", "t_max", "l"):
                kw[key] = float(val)
            elif key == "depth":
                kw[key] = int(val)
            elif key == "lengths":
                kw[key] = tuple(float(x) for x in str(val).replace(",", " ").split())
            elif key == "holes":
                holes = []
                for chunk in str(val).split(";"):
                    if chunk.strip():
                        r, th, rad = (float(x) for x in chunk.replace(",", " ").split())
                        holes.append((r, th, rad))
                kw[key] = holes
            else:
                raise BuildError(f"unknown build key {key!r}")
        if "kind" not in kw:
            raise BuildError("build block needs a 'kind'")
        return cls(**kw)


# ----------------------------------------------------------------------
# ring surfaces


def _simpson_lengths(ta, tb, dth, width, m=8):
    """Length of straight (t, theta) segments under dt^2 + width(t)^2 dtheta^2."""
    s = np.linspace(0.0, 1.0, m + 1)
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    dt = (tb - ta)[:, None]
    t = ta[:, None] + s[None, :] * dt
    speed = np.sqrt(dt * dt + (width(t) * dth[:, None]) ** 2)
    return (speed * w).sum(axis=1) / (3.0 * m)


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def _zip_rings(inner, outer, ang_in, ang_out):
    """Triangulate the band between two cyclic rings, CCW in (t, theta)."""
    n, m = len(inner), len(outer)
    a = np.asarray(ang_in)
    b = np.asarray(ang_out)
    k0 = int(np.argmin(np.abs(_wrap(b - a[0]))))
    # unwrapped angles relative to a[0]
    def A(i):
        return a[i % n] + 2 * math.pi * (i // n)

    base = b[k0] - 2 * math.pi * round((b[k0] - a[0]) / (2 * math.pi))

    def B(k):
        kk = k0 + k
        return b[kk % m] - b[k0] + base + 2 * math.pi * (kk // m - k0 // m)

    tris = []
    i = k = 0
    while i < n or k < m:
        if k < m and (i >= n or B(k + 1) <= A(i + 1)):
            tris.append((inner[i % n], outer[(k0 + k) % m], outer[(k0 + k + 1) % m]))
            k += 1
        else:
            tris.append((inner[i % n], outer[(k0 + k) % m], inner[(i + 1) % n]))
            i += 1
    return tris


def ring_surface(t_values, width, spacing, chord=None, center=False, min_count=3):
    """Mesh of ``{t in [t0, t1]} x S^1`` with metric ``dt^2 + width(t)^2 dtheta^2``.

    Edge lengths come from ``chord(t1, th1, t2, th2)`` (the exact distance
    when known) or, if ``chord`` is None, from Simpson quadrature of the
    metric along the straight segment in ``(t, theta)``.  With
    ``center=True`` the first ring degenerates to a single vertex (a disk
    around the origin of geodesic polar coordinates).
    Returns ``(mesh, rings)`` where ``rings`` lists the vertex ids per ring.
    """
    t_values = np.asarray(t_values, float)
    coords_t, coords_th, rings = [], [], []
    nv = 0
    for j, t in enumerate(t_values):
        if center and j == 0:
            rings.append([0])
            coords_t.append(t)
            coords_th.append(0.0)
            nv = 1
            continue
        cnt = max(min_count, int(math.ceil(2 * math.pi * float(width(np.array([t]))[0]) / spacing)))
        phase = 0.5 * (j % 2)
        th = 2 * math.pi * (np.arange(cnt) + phase) / cnt
        ids = list(range(nv, nv + cnt))
        nv += cnt
        rings.append(ids)
        coords_t.extend([t] * cnt)
        coords_th.extend(th.tolist())
    coords_t = np.array(coords_t)
    coords_th = np.array(coords_th)
    tris = []
    for j in range(len(rings) - 1):
        inner, outer = rings[j], rings[j + 1]
        if len(inner) == 1:
            m = len(outer)
            tris += [(inner[0], outer[i], outer[(i + 1) % m]) for i in range(m)]
        else:
            tris += _zip_rings(inner, outer, coords_th[inner], coords_th[outer])
    tris = np.array(tris, dtype=np.int64)

    centre_vertex = 0 if center else -1

    def length_of(a, b):
        ta, tb = coords_t[a], coords_t[b]
        tha, thb = coords_th[a].copy(), coords_th[b].copy()
        # the polar origin has no angle: use the other endpoint's
        tha = np.where(a == centre_vertex, thb, tha)
        thb = np.where(b == centre_vertex, tha, thb)
        if chord is not None:
            return chord(ta, tha, tb, thb)
        return _simpson_lengths(ta, tb, _wrap(thb - tha), width)

    xy = np.c_[coords_t * np.cos(coords_th), coords_t * np.sin(coords_th)]
    mesh = TriMesh.from_triangles(nv, tris, length_of, coords=np.c_[coords_t, coords_th, xy])
    return mesh, rings


def _ring_build(t0, t1, width, h, chord, center=False, min_count=3):
    """Ring mesh with every edge shorter than ``h`` (spacing shrunk until it is)."""
    spacing = h / 1.6
    for _ in range(20):
        nr = max(1, int(math.ceil((t1 - t0) / spacing)))
        t = np.linspace(t0, t1, nr + 1)
        mesh, rings = ring_surface(t, width, spacing, chord=chord, center=center, min_count=min_count)
        if mesh.lengths.max() <= h:
            return mesh, rings
        spacing *= 0.9
    raise BuildError("could not reach the requested resolution")


# Exact distances, written as 2 asinh(sqrt(q)) with q = sinh^2(d/2) to stay
# accurate for short edges.

def _disk_chord(r1, t1, r2, t2):
    q = np.sinh(0.5 * (r1 - r2)) ** 2 + np.sinh(r1) * np.sinh(r2) * np.sin(0.5 * (t1 - t2)) ** 2
    return 2.0 * np.arcsinh(np.sqrt(q))


def _funnel_chord(L):
    def chord(t1, a1, t2, a2):
        s = L / (2 * math.pi) * np.abs(_wrap(a2 - a1))
        q = np.sinh(0.5 * (t1 - t2)) ** 2 + np.cosh(t1) * np.cosh(t2) * np.sinh(0.5 * s) ** 2
        return 2.0 * np.arcsinh(np.sqrt(q))

    return chord


def _cusp_chord(ell0):
    def chord(t1, a1, t2, a2):
        # upper half-plane with y = e^t, x = ell0 theta / 2 pi
        dx = ell0 / (2 * math.pi) * np.abs(_wrap(a2 - a1))
        dy = np.exp(t2) - np.exp(t1)
        q = (dx * dx + dy * dy) / (4.0 * np.exp(t1 + t2))
        return 2.0 * np.arcsinh(np.sqrt(q))

    return chord


def _cylinder_chord(rad):
    def chord(t1, a1, t2, a2):
        return np.hypot(t2 - t1, rad * _wrap(a2 - a1))

    return chord


def hyperbolic_disk(radius, h, quadrature=False):
    # enough vertices per ring that small balls are not visibly polygonal
    mesh, rings = _ring_build(0.0, radius, np.sinh, h, None if quadrature else _disk_chord, center=True, min_count=max(24, math.ceil(2.4 / h)))
    mesh.labels["center"] = np.array([0])
    mesh.labels["outer"] = np.array(rings[-1])
    return mesh


def flat_cylinder(circumference, height, h, quadrature=False):
    rad = circumference / (2 * math.pi)
    chord = None if quadrature else _cylinder_chord(rad)
    mesh, rings = _ring_build(0.0, height, lambda t: np.full_like(t, rad), h, chord)
    mid = len(rings) // 2
    mesh.labels["bottom"] = np.array(rings[0])
    mesh.labels["top"] = np.array(rings[-1])
    mesh.labels["center"] = np.array([rings[mid][0]])
    return mesh


def funnel(L, t_max, h, quadrature=False):
    chord = None if quadrature else _funnel_chord(L)
    mesh, rings = _ring_build(0.0, t_max, lambda t: L / (2 * math.pi) * np.cosh(t), h, chord)
    mesh.labels["geodesic"] = np.array(rings[0])
    mesh.labels["outer"] = np.array(rings[-1])
    mesh.labels["center"] = np.array([rings[len(rings) // 2][0]])
    return mesh


def cusp(ell0, t_max, h, quadrature=False):
    chord = None if quadrature else _cusp_chord(ell0)
    mesh, rings = _ring_build(0.0, t_max, lambda t: ell0 / (2 * math.pi) * np.exp(-t), h, chord)
    mesh.labels["wide"] = np.array(rings[0])
    mesh.labels["narrow"] = np.array(rings[-1])
    mesh.labels["center"] = np.array([rings[len(rings) // 2][0]])
    return mesh


def flat_torus(a, b, h):
    """Flat torus ``[0, a) x [0, b)``: a grid square with opposite sides glued.

    Not a :class:`BuildSpec` kind; it is the genus-one host used to exercise
    handle-side quantities.  Label ``column{i}`` holds the vertices with
    first grid index ``i``.
    """
    n1 = max(3, int(math.ceil(a / (h / math.sqrt(2)))))
    n2 = max(3, int(math.ceil(b / (h / math.sqrt(2)))))
    dx, dy = a / n1, b / n2

    def vid(i, j):
        return (i % n1) * n2 + (j % n2)

    tris = []
    for i in range(n1):
        for j in range(n2):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    tris = np.array(tris, dtype=np.int64)
    gi = np.repeat(np.arange(n1), n2)
    gj = np.tile(np.arange(n2), n1)

    def length_of(p, q):
        di = np.abs(gi[p] - gi[q])
        dj = np.abs(gj[p] - gj[q])
        di = np.minimum(di, n1 - di)
        dj = np.minimum(dj, n2 - dj)
        return np.hypot(di * dx, dj * dy)

    mesh = TriMesh.from_triangles(n1 * n2, tris, length_of, coords=np.c_[gi * dx, gj * dy])
    for i in range(n1):
        mesh.labels[f"column{i}"] = np.arange(i * n2, (i + 1) * n2)
    return mesh


# ----------------------------------------------------------------------
# hyperbolic plane (hyperboloid model) helpers

_J = np.diag([1.0, 1.0, -1.0])


def _mink(u, v):
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def _boost_x(s):
    c, h = math.cosh(s), math.sinh(s)
    return np.array([[c, 0, h], [0, 1, 0], [h, 0, c]])


def _rot(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def _hdist(X, Y):
    # 2 asinh(|X - Y|/2) stays accurate for nearby points, unlike arccosh(-<X, Y>)
    D = X - Y
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(_mink(D, D), 0.0)))


def _to_poincare(X):
    return X[..., :2] / (1.0 + X[..., 2:3])


def _to_origin(C):
    """Lorentz transform sending the hyperboloid point ``C`` to (0, 0, 1)."""
    r = math.hypot(C[0], C[1])
    if r == 0:
        return np.eye(3)
    ang = math.atan2(C[1], C[0])
    d = math.asinh(r)
    return _boost_x(-d) @ _rot(-ang)


def hexagon_sides(a1, a2, a3):
    """Side lengths ``(a1, b3, a2, b1, a3, b2)`` of the right-angled hexagon with
    alternate sides ``a1, a2, a3``; ``b_i`` is the side opposite ``a_i``.
    """
    ch = math.cosh
    sh = math.sinh
    b1 = math.acosh((ch(a2) * ch(a3) + ch(a1)) / (sh(a2) * sh(a3)))
    b2 = math.acosh((ch(a1) * ch(a3) + ch(a2)) / (sh(a1) * sh(a3)))
    b3 = math.acosh((ch(a1) * ch(a2) + ch(a3)) / (sh(a1) * sh(a2)))
    return (a1, b3, a2, b1, a3, b2)


def hexagon_vertices(sides):
    """Hyperboloid coordinates of the six corners, walking CCW with right turns to the left."""
    F = np.eye(3)
    o = np.array([0.0, 0.0, 1.0])
    pts = [F @ o]
    for s in sides:
        F = F @ _boost_x(s) @ _rot(math.pi / 2)
        pts.append(F @ o)
    closure = float(_hdist(pts[-1], pts[0]))
    return np.array(pts[:6]), closure


def _geodesic_points(P, Q, count):
    """``count + 1`` equally spaced points on the geodesic segment P -> Q."""
    d = float(_hdist(P, Q))
    t = np.linspace(0.0, d, count + 1)
    return (np.sinh(d - t)[:, None] * P + np.sinh(t)[:, None] * Q) / math.sinh(d)


def right_angled_hexagon(lengths, h):
    """Mesh of the right-angled hexagon with alternate sides ``l_i / 2``.

    Returns ``(mesh, side_vertices)`` where ``side_vertices[i]`` lists the
    vertex ids along side ``i`` (order ``a1, b3, a2, b1, a3, b2``) from its
    start corner to its end corner.
    """
    a = [0.5 * x for x in lengths]
    sides = hexagon_sides(*a)
    V, closure = hexagon_vertices(sides)
    if closure > 1e-8:
        raise BuildError(f"hexagon does not close (gap {closure:.3g})")
    C = V.sum(axis=0)
    C = C / math.sqrt(-_mink(C, C))
    T = _to_origin(C)
    V = V @ T.T
    spacing = h / 1.6
    for _ in range(20):
        mesh, side_ids = _hexagon_mesh(V, sides, spacing)
        if mesh.lengths.max() <= h:
            return mesh, side_ids
        spacing *= 0.9
    raise BuildError("could not reach the requested resolution")


def _hexagon_mesh(V, sides, spacing):
    pts = []
    side_ids = []
    on_side = []  # set of side indices per point
    corner_id = {}
    for i in range(6):
        P, Q = V[i], V[(i + 1) % 6]
        cnt = max(1, int(math.ceil(sides[i] / spacing)))
        g = _geodesic_points(P, Q, cnt)
        ids = []
        for j, X in enumerate(g):
            if j == 0 and i in corner_id:
                ids.append(corner_id[i])
                on_side[corner_id[i]].add(i)
                continue
            if j == cnt and (i + 1) % 6 in corner_id:
                ids.append(corner_id[(i + 1) % 6])
                on_side[corner_id[(i + 1) % 6]].add(i)
                continue
            pid = len(pts)
            pts.append(X)
            on_side.append({i})
            ids.append(pid)
            if j == 0:
                corner_id[i] = pid
            if j == cnt:
                corner_id[(i + 1) % 6] = pid
        side_ids.append(ids)
    nb = len(pts)
    # unit spacelike normals of the side lines, positive towards the inside
    normals = []
    o = np.array([0.0, 0.0, 1.0])
    for i in range(6):
        P, Q = V[i], V[(i + 1) % 6]
        n = np.cross(P, Q) @ _J  # Lorentz cross product
        n = n / math.sqrt(_mink(n, n))
        if _mink(n, o) < 0:
            n = -n
        normals.append(n)
    normals = np.array(normals)
    rmax = float(_hdist(V, o).max())
    interior = [o]
    nr = int(math.ceil(rmax / spacing))
    for j in range(1, nr + 1):
        rho = j * spacing
        cnt = max(6, int(round(2 * math.pi * math.sinh(rho) / spacing)))
        phi = 2 * math.pi * (np.arange(cnt) + 0.5 * (j % 2)) / cnt
        ring = np.c_[math.sinh(rho) * np.cos(phi), math.sinh(rho) * np.sin(phi), np.full(cnt, math.cosh(rho))]
        interior.append(ring)
    interior = np.vstack([np.atleast_2d(x) for x in interior])
    sd = np.arcsinh(interior @ (normals @ _J).T)  # signed distances to side lines
    interior = interior[(sd >= 0.55 * spacing).all(axis=1)]
    X = np.vstack([np.array(pts), interior])
    xy = _to_poincare(X)
    tri = Delaunay(xy).simplices.astype(np.int64)
    keep = []
    for t in tri.tolist():
        if all(v < nb for v in t):
            common = on_side[t[0]] & on_side[t[1]] & on_side[t[2]]
            if common:
                continue
        keep.append(t)
    tri = np.array(keep, dtype=np.int64)
    # orient CCW in the (conformal) Poincare chart
    p = xy[tri]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    tri[cross < 0] = tri[cross < 0][:, [0, 2, 1]]

    def length_of(a, b):
        return _hdist(X[a], X[b])

    mesh = TriMesh.from_triangles(len(X), tri, length_of, coords=xy)
    loops = mesh.boundary_loops()
    if len(loops) != 1 or len(loops[0]) != nb:
        raise BuildError("hexagon triangulation does not have the hexagon as boundary")
    mesh.labels["center"] = np.array([nb])
    return mesh, side_ids


def ypiece(lengths, h):
    """Pair of pants with cuff lengths ``lengths``: two hexagons glued along the seams."""
    H, sides = right_angled_hexagon(lengths, h)
    n = H.n_vertices
    seam = set()
    for i in (1, 3, 5):
        seam.update(sides[i])
    # second copy: new ids for non-seam vertices
    new = np.arange(n, 2 * n)
    for v in seam:
        new[v] = v
    remap = np.r_[np.arange(n), new]
    used = np.unique(remap)
    comp = -np.ones(2 * n, dtype=np.int64)
    comp[used] = np.arange(used.size)
    tri2 = new[H.triangles][:, [0, 2, 1]]
    tri = comp[np.vstack([H.triangles, tri2])]
    e1 = H.edges
    e2 = new[H.edges]
    edges = comp[np.vstack([e1, e2])]
    lens = np.r_[H.lengths, H.lengths]
    edges, lens = _dedup_edges(edges, lens, used.size)
    mesh = TriMesh(int(used.size), tri, edges, lens)
    cuffs = []
    for i in (0, 2, 4):
        first = [comp[v] for v in sides[i]]
        second = [comp[new[v]] for v in sides[i]]
        ring = first + second[-2:0:-1]
        cuffs.append(ring)
    loops = mesh.boundary_loops()
    named = {}
    for loop in loops:
        s = set(loop)
        for ci, ring in enumerate(cuffs):
            if s == set(ring):
                named[f"cuff{ci + 1}"] = np.array(_rotate_to(loop, ring[0]))
    if len(named) != 3:
        raise BuildError("could not identify the three cuffs")
    mesh.labels.update(named)
    mesh.labels["center"] = np.array([comp[int(H.labels["center"][0])]])
    mesh.labels["seams"] = np.array(sorted(comp[list(seam)].tolist()))
    return mesh


def _rotate_to(loop, start):
    i = loop.index(start)
    return loop[i:] + loop[:i]


def _dedup_edges(edges, lens, n):
    edges = np.sort(edges, axis=1)
    keys = edges[:, 0] * n + edges[:, 1]
    uk, inv = np.unique(keys, return_inverse=True)
    out_len = np.zeros(uk.size)
    cnt = np.zeros(uk.size)
    np.add.at(out_len, inv, lens)
    np.add.at(cnt, inv, 1)
    return np.c_[uk // n, uk % n], out_len / cnt


def pants_tree(depth, l, h):
    """Identical Y-pieces glued along a complete binary tree of the given depth.

    Node 0 is the root; node ``i`` has children ``2i+1`` and ``2i+2``.  The
    root keeps ``cuff1`` free and glues ``cuff2``/``cuff3`` to its children;
    every other node glues ``cuff1`` to its parent.
    """
    Y = ypiece((l, l, l), h)
    nodes = 2 ** (depth + 1) - 1
    nY = Y.n_vertices
    parent = np.arange(nodes * nY)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    glue_rings = {}
    for child in range(1, nodes):
        par = (child - 1) // 2
        pc = Y.labels["cuff2" if child % 2 == 1 else "cuff3"]
        cc = Y.labels["cuff1"]
        m = len(pc)
        if len(cc) != m:
            raise BuildError("cuff rings do not match")
        A = par * nY + pc
        B = child * nY + cc
        # reverse induced orientations so the glued surface stays oriented
        for i in range(m):
            a = find(int(A[i]))
            b = find(int(B[(-i) % m]))
            if a != b:
                parent[max(a, b)] = min(a, b)
        glue_rings[child] = A
    roots = np.array([find(x) for x in range(nodes * nY)])
    uniq, comp = np.unique(roots, return_inverse=True)
    tri = np.vstack([comp[i * nY + Y.triangles] for i in range(nodes)])
    edges = np.vstack([comp[i * nY + Y.edges] for i in range(nodes)])
    lens = np.tile(Y.lengths, nodes)
    edges, lens = _dedup_edges(edges, lens, uniq.size)
    labels = {"center": comp[np.array([int(Y.labels["center"][0])])]}
    for i in range(nodes):
        labels[f"piece{i}"] = np.unique(comp[i * nY + np.arange(nY)])
    for child, A in glue_rings.items():
        labels[f"glue{child}"] = comp[A]
    mesh = TriMesh(int(uniq.size), tri, edges, lens, labels)
    for k, loop in enumerate(mesh.boundary_loops()):
        mesh.labels[f"free{k}"] = np.array(loop)
    return mesh


# ----------------------------------------------------------------------
# holes


def _polar_distance(r1, t1, r2, t2):
    """Hyperbolic distance between geodesic polar points (r, theta)."""
    c = np.cosh(r1) * np.cosh(r2) - np.sinh(r1) * np.sinh(r2) * np.cos(t1 - t2)
    return np.arccosh(np.maximum(c, 1.0))


def _check_holes(holes, radius):
    for i, (r, th, rad) in enumerate(holes):
        if rad < 0:
            raise BuildError("hole radius must be >= 0")
        if r + rad >= radius:
            raise BuildError(f"hole {i} is not inside the disk")
        for j in range(i):
            r2, th2, rad2 = holes[j]
            if float(_polar_distance(r, th, r2, th2)) <= rad + rad2:
                raise BuildError(f"holes {j} and {i} are not disjoint")


def disk_with_holes(radius, holes, h):
    """Hyperbolic disk S with the removed sets marked as labels ``E0, E1, ...``."""
    _check_holes(holes, radius)
    S = hyperbolic_disk(radius, h)
    r = S.coords[:, 0]
    th = S.coords[:, 1]
    for i, (hr, hth, rad) in enumerate(holes):
        d = _polar_distance(r, th, hr, hth)
        if rad == 0:
            E = np.array([int(np.argmin(d))])
        else:
            E = np.flatnonzero(d < rad)
            if E.size == 0:
                E = np.array([int(np.argmin(d))])
        S.labels[f"E{i}"] = E
    return S


def delete_marked(S, prefix="E"):
    """``S`` minus every labelled removed set; hole boundary loops become ``hole{i}``."""
    names = sorted(k for k in S.labels if k.startswith(prefix) and k[len(prefix):].isdigit())
    drop = np.unique(np.concatenate([S.labels[k] for k in names])) if names else np.array([], dtype=np.int64)
    Sstar, new = S.remove_vertices(drop)
    loops = Sstar.boundary_loops()
    adj = S.graph()
    for k in names:
        i = k[len(prefix):]
        E = S.labels[k]
        link = np.unique(adj[E].indices)
        link = new[link]
        link = set(link[link >= 0].tolist())
        for loop in loops:
            if link & set(loop):
                Sstar.labels[f"hole{i}"] = np.array(loop)
                break
        Sstar.labels.pop(k, None)
    return Sstar


def build(spec: BuildSpec) -> TriMesh:
    k = spec.kind
    quad = spec.edge_model == "quadrature"
    if k == "hyperbolic_disk":
        m = hyperbolic_disk(spec.radius, spec.h, quad)
    elif k == "flat_cylinder":
        m = flat_cylinder(spec.circumference, spec.height, spec.h, quad)
    elif k == "funnel":
        m = funnel(spec.L, spec.t_max, spec.h, quad)
    elif k == "cusp":
        m = cusp(spec.ell0, spec.t_max, spec.h, quad)
    elif k == "ypiece":
        m = ypiece(spec.lengths, spec.h)
    elif k == "pants_tree":
        m = pants_tree(spec.depth, spec.l, spec.h)
    else:
        m = delete_marked(disk_with_holes(spec.radius, spec.holes, spec.h))
    return m.validate()


def build_pair(spec: BuildSpec):
    """``(S, S_star)`` for a ``disk_minus_disks`` spec: the disk with marked sets and the deleted surface."""
    if spec.kind != "disk_minus_disks":
        raise BuildError("build_pair needs kind = disk_minus_disks")
    S = disk_with_holes(spec.radius, spec.holes, spec.h).validate()
    return S, delete_marked(S).validate()


# ----------------------------------------------------------------------
# surrounding curves


def _as_deleted(mesh, label):
    """Return (mesh in deleted form, old->new map or None, hole loop in new ids)."""
    ids = mesh.labels[label]
    bmask = mesh.boundary_vertex_mask()
    loops = mesh.boundary_loops()
    sid = set(ids.tolist())
    for loop in loops:
        if sid <= set(loop) and bmask[ids].all():
            return mesh, None, loop
    sub, new = mesh.remove_vertices(ids)
    adj = mesh.graph()
    link = new[np.unique(adj[ids].indices)]
    link = set(link[link >= 0].tolist())
    for loop in sub.boundary_loops():
        if link & set(loop):
            return sub, new, loop
    raise MeshError(f"label {label!r} does not bound a hole")


def _shortest_odd_cycle(mesh, region, hole_loop):
    """Shortest cycle in ``region`` crossing a dual arc from the hole an odd number of times."""
    rmask = np.zeros(mesh.n_vertices, dtype=bool)
    rmask[region] = True
    tmask = rmask[mesh.triangles].all(axis=1)
    tids = np.flatnonzero(tmask)
    te = mesh.tri_edges[tids]
    emask = rmask[mesh.edges].all(axis=1)
    # edge -> triangles inside the region
    cnt = np.bincount(te.ravel(), minlength=len(mesh.edges))
    hole_edges = set(mesh.edge_index(hole_loop, np.roll(hole_loop, -1)).tolist())
    owners = {}
    for t, row in zip(tids.tolist(), te.tolist()):
        for e in row:
            owners.setdefault(e, []).append(t)
    start = [t for t, row in zip(tids.tolist(), te.tolist()) if any(e in hole_edges for e in row)]
    goal = set(t for t, row in zip(tids.tolist(), te.tolist()) if any(cnt[e] == 1 and e not in hole_edges for e in row))
    if not start or not goal:
        return None
    # BFS on the dual graph
    prev = {t: None for t in start}
    queue = list(start)
    hit = None
    qi = 0
    tri_edges = {t: row for t, row in zip(tids.tolist(), te.tolist())}
    while qi < len(queue):
        t = queue[qi]
        qi += 1
        if t in goal:
            hit = t
            break
        for e in tri_edges[t]:
            for u in owners.get(e, ()):
                if u not in prev:
                    prev[u] = (t, e)
                    queue.append(u)
    if hit is None:
        return None
    # the arc also crosses one boundary edge at each end
    cut = {next(e for e in tri_edges[hit] if cnt[e] == 1 and e not in hole_edges)}
    t = hit
    while prev[t] is not None:
        t, e = prev[t]
        cut.add(e)
    cut.add(next(e for e in tri_edges[t] if e in hole_edges))
    # double cover graph
    n = mesh.n_vertices
    eidx = np.flatnonzero(emask)
    a = mesh.edges[eidx, 0]
    b = mesh.edges[eidx, 1]
    w = mesh.lengths[eidx]
    flip = np.array([e in cut for e in eidx.tolist()], dtype=bool)
    pa = np.r_[a, a + n]
    pb = np.r_[np.where(flip, b + n, b), np.where(flip, b, b + n)]
    ww = np.r_[w, w]
    G = sp.coo_matrix((np.r_[ww, ww], (np.r_[pa, pb], np.r_[pb, pa])), shape=(2 * n, 2 * n)).tocsr()
    cand = np.unique(mesh.edges[np.array(sorted(cut), dtype=np.int64)].ravel())
    D, P = dijkstra(G, directed=False, indices=cand, return_predecessors=True)
    vals = D[np.arange(cand.size), cand + n]
    best = int(np.argmin(vals))
    if not np.isfinite(vals[best]):
        return None
    x = int(cand[best])
    path = []
    v = x + n
    while v != x and v >= 0:
        path.append(v % n)
        v = int(P[best, v])
    cycle = path[::-1]
    return cycle, float(vals[best])


def mark_surrounding_curve(mesh: TriMesh, hole_label: str, width=None) -> dict:
    """Shortest vertex cycle around the hole ``hole_label`` that winds once around it.

    ``hole_label`` may name a boundary loop of ``mesh`` or a set of marked
    vertices to be treated as removed.  The search runs in the band of
    vertices within graph distance ``width`` of the hole boundary.
    """
    if hole_label not in mesh.labels:
        raise MeshError(f"label {hole_label!r} not found")
    work, new, hole = _as_deleted(mesh, hole_label)
    hole = list(hole)
    Lh = work.loop_length(hole)
    if width is None:
        width = max(0.5 * Lh, 4.0 * float(np.median(work.lengths)))
    G = work.graph()
    res = None
    for _ in range(6):
        d = dijkstra(G, directed=False, indices=hole, min_only=True, limit=width * 1.000001)
        region = np.flatnonzero(np.isfinite(d))
        out = _shortest_odd_cycle(work, region, hole)
        if out is not None:
            cycle, length = out
            sep = _separates(work, cycle, hole, mesh, new, hole_label)
            res = {"cycle": cycle, "length": length, "separates": sep, "hole_length": Lh}
            if sep:
                break
        width *= 0.7
    if res is None:
        raise MeshError("no surrounding cycle found")
    if new is not None:
        back = -np.ones(work.n_vertices, dtype=np.int64)
        back[new[new >= 0]] = np.flatnonzero(new >= 0)
        res["cycle"] = [int(back[v]) for v in res["cycle"]]
    return res


def _separates(work, cycle, hole, mesh, new, hole_label):
    """Does removing ``cycle`` put the hole in a component of its own (w.r.t. other holes and boundaries)?"""
    keep = np.ones(work.n_vertices, dtype=bool)
    keep[cycle] = False
    g = work.graph()
    idx = np.flatnonzero(keep)
    sub = g[idx][:, idx]
    _, lab = connected_components(sub, directed=False)
    comp = -np.ones(work.n_vertices, dtype=np.int64)
    comp[idx] = lab
    hole_comps = set(comp[hole][comp[hole] >= 0].tolist())
    if not hole_comps:
        # the cycle is the hole boundary itself
        hole_side = set()
    else:
        hole_side = hole_comps
    others = []
    for loop in work.boundary_loops():
        if set(loop) == set(hole):
            continue
        others.append(loop)
    for name, ids in mesh.labels.items():
        if name == hole_label or not (name.startswith("E") or name.startswith("hole")):
            continue
        ids = ids if new is None else new[ids]
        ids = ids[ids >= 0]
        if ids.size:
            others.append(ids.tolist())
    for loop in others:
        c = set(comp[np.asarray(loop)][comp[np.asarray(loop)] >= 0].tolist())
        if c & hole_side:
            return False
    return True
