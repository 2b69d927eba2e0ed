"""Metric-ball profiles, the ball topology bound scan and discrete Gauss-Bonnet.

Sublevel sets ``{d <= r}`` are cut out of each triangle with ``d``
interpolated linearly (marching triangles), so ``l(r)`` and ``a(r)`` vary
continuously with ``r`` and the clipped cell complex gives ``chi(r)`` by
counting cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .comparison import ComparisonParams, ParameterError, crude_topology_bound, topology_bound
from .geodesic import DistanceField
from .mesh import MeshError, TriMesh
from .odecomp import ScalarProfile, check_fundamental_inequality, jump_mask, second_difference

TIE_EPS = 1e-9
HOLE_FLOOR = 0.25  # in units of the longest edge


@dataclass
class BallProfile:
    radii: np.ndarray
    boundary_length: np.ndarray
    area: np.ndarray
    euler_char: np.ndarray
    n_gen: np.ndarray
    component_count: np.ndarray
    resolution: float = 0.0  # longest mesh edge; radii below 2x this are unresolved

    def resolved(self) -> "BallProfile":
        """The part of the profile at radii of at least two edge lengths."""
        keep = self.radii >= 2.0 * self.resolution
        return BallProfile(
            self.radii[keep],
            self.boundary_length[keep],
            self.area[keep],
            self.euler_char[keep],
            self.n_gen[keep],
            self.component_count[keep],
            self.resolution,
        )

    def profile(self, name) -> ScalarProfile:
        tag = {"area": "area", "boundary_length": "boundary_length", "euler_char": "euler_char"}.get(name, "generic")
        return ScalarProfile(self.radii, getattr(self, name).astype(float), tag)

    def to_csv(self) -> str:
        rows = ["r,ell,area,chi,n,components"]
        for r, l, a, c, n, k in zip(
            self.radii.tolist(),
            self.boundary_length.tolist(),
            self.area.tolist(),
            self.euler_char.tolist(),
            self.n_gen.tolist(),
            self.component_count.tolist(),
        ):
            rows.append(f"{r!r},{l!r},{a!r},{c},{n},{k}")
        return "\n".join(rows) + "\n"


class _Clipper:
    """Per-mesh data reused across radii."""

    def __init__(self, mesh: TriMesh, dist: np.ndarray, hole_floor=0.0):
        self.mesh = mesh
        self.hole_floor = float(hole_floor)
        self.dist = np.asarray(dist, float)
        self.tri = mesh.triangles
        self.D = self.dist[self.tri]
        self.A = mesh.triangle_areas()
        L = mesh.tri_lengths  # L[f, i] is opposite vertex i
        self.L2 = L * L
        self.edges = mesh.edges
        self.tri_edges = mesh.tri_edges
        self.bnd_edge = mesh.boundary_edge_mask()
        self.h_min = float(mesh.lengths.min())
        self.sorted_d = np.sort(self.dist[np.isfinite(self.dist)])
        self.bnd_v = mesh.boundary_vertex_mask()

    def fill_shallow_holes(self, inside_v, r):
        """Add complement components that never rise ``hole_floor`` above ``r``.

        Such holes come from distance noise along the cut locus; components
        reaching the mesh boundary are kept.
        """
        if self.hole_floor <= 0:
            return inside_v
        n = self.mesh.n_vertices
        out = ~inside_v
        oe = self.edges[out[self.edges].all(axis=1)]
        g = coo_matrix((np.ones(len(oe)), (oe[:, 0], oe[:, 1])), shape=(n, n))
        _, lab = connected_components(g, directed=False)
        ov = np.flatnonzero(out)
        peak = np.full(n, -np.inf)
        np.maximum.at(peak, lab[ov], self.dist[ov])
        open_ = np.zeros(n, dtype=bool)
        open_[lab[ov[self.bnd_v[ov]]]] = True
        shallow = (peak < r + self.hole_floor) & ~open_
        return inside_v | (out & shallow[lab])

    def perturb(self, r):
        i = np.searchsorted(self.sorted_d, r)
        if i < self.sorted_d.size and self.sorted_d[i] == r:
            return r + TIE_EPS * self.h_min
        return r

    def _segment(self, f, apex, t1, t2):
        """Length of the segment cutting the two edges at ``apex`` at fractions t1, t2."""
        j = (apex + 1) % 3
        k = (apex + 2) % 3
        rows = np.arange(f.size)
        L2 = self.L2[f]
        a2 = L2[rows, k]  # |apex - j| is opposite k
        b2 = L2[rows, j]  # |apex - k| is opposite j
        c2 = L2[rows, apex]  # |j - k|
        dot = 0.5 * (a2 + b2 - c2)
        s = t1 * t1 * a2 + t2 * t2 * b2 - 2 * t1 * t2 * dot
        return np.sqrt(np.maximum(s, 0.0))

    def at(self, r, source):
        r = self.perturb(r)
        inside_v = self.dist < r
        ins = inside_v[self.tri]
        k = ins.sum(axis=1)
        D = self.D
        area = float(self.A[k == 3].sum())
        ell = 0.0
        for cnt in (1, 2):
            f = np.flatnonzero(k == cnt)
            if f.size == 0:
                continue
            # apex: the lone inside (cnt = 1) or lone outside (cnt = 2) corner
            apex = np.argmax(ins[f] if cnt == 1 else ~ins[f], axis=1)
            da = D[f, apex]
            dj = D[f, (apex + 1) % 3]
            dk = D[f, (apex + 2) % 3]
            if cnt == 1:
                t1 = (r - da) / (dj - da)
                t2 = (r - da) / (dk - da)
                area += float((t1 * t2 * self.A[f]).sum())
            else:
                t1 = (da - r) / (da - dj)
                t2 = (da - r) / (da - dk)
                area += float(((1.0 - t1 * t2) * self.A[f]).sum())
            ell += float(self._segment(f, apex, t1, t2).sum())
        # cell counts, per component
        inside_v = self.fill_shallow_holes(inside_v, r)
        ins = inside_v[self.tri]
        k = ins.sum(axis=1)
        n = self.mesh.n_vertices
        e_in = inside_v[self.edges]
        full_e = e_in.all(axis=1)
        fe = self.edges[full_e]
        g = coo_matrix((np.ones(len(fe)), (fe[:, 0], fe[:, 1])), shape=(n, n))
        _, lab = connected_components(g, directed=False)
        iv = np.flatnonzero(inside_v)
        used = np.unique(lab[iv])
        remap = -np.ones(n, dtype=np.int64)
        remap[used] = np.arange(used.size)
        comp_v = remap[lab]
        ncomp = used.size
        # components of vertices, full edges, crossing points/fragments, faces, level segments
        chi = np.zeros(ncomp, dtype=np.int64)
        np.add.at(chi, comp_v[iv], 1)
        np.add.at(chi, comp_v[fe[:, 0]], -1)
        # each crossing edge adds a point (+1) and an edge fragment (-1)
        tf = np.flatnonzero(k >= 1)
        anyv = self.tri[tf, np.argmax(ins[tf], axis=1)]
        np.add.at(chi, comp_v[anyv], 1)
        tseg = np.flatnonzero((k == 1) | (k == 2))
        segv = self.tri[tseg, np.argmax(ins[tseg], axis=1)]
        np.add.at(chi, comp_v[segv], -1)
        src = np.atleast_1d(source)
        sc = comp_v[src[inside_v[src]]]
        if sc.size == 0:
            return ell, area, 0, 0, ncomp
        c = int(sc[0])
        chi_c = int(chi[c])
        has_bnd = np.any(comp_v[segv] == c)
        if not has_bnd:
            bnd_e = self.edges[self.bnd_edge]
            touch = inside_v[bnd_e].any(axis=1)
            be = bnd_e[touch]
            bv = np.where(inside_v[be[:, 0]], be[:, 0], be[:, 1])
            has_bnd = np.any(comp_v[bv] == c)
        n_gen = (1 if has_bnd else 2) - chi_c
        return ell, area, chi_c, n_gen, ncomp


def ball_profile(mesh: TriMesh, field: DistanceField, radii, hole_floor=None) -> BallProfile:
    """Boundary length, area, Euler characteristic and generator count of balls.

    ``euler_char`` and ``n_gen`` refer to the component of the sublevel set
    containing the source; ``component_count`` counts all components.
    Holes whose distances stay within ``hole_floor`` (default: a quarter of
    the longest edge) of the radius are below mesh resolution and are
    filled before counting.
    """
    radii = np.asarray(radii, float)
    if radii.ndim != 1 or radii.size == 0:
        raise ParameterError("radii must be a non-empty 1-d array")
    if np.any(np.diff(radii) <= 0):
        raise ParameterError("radii must be strictly increasing")
    dmax = float(np.max(field.dist[np.isfinite(field.dist)]))
    if radii[0] <= 0 or radii[-1] > dmax:
        raise ParameterError(f"radii must lie in (0, {dmax!r}]")
    if hole_floor is None:
        hole_floor = HOLE_FLOOR * float(mesh.lengths.max())
    clip = _Clipper(mesh, field.dist, hole_floor)
    out = np.array([clip.at(r, field.source) for r in radii.tolist()], dtype=object)
    return BallProfile(
        radii.copy(),
        out[:, 0].astype(float),
        # nested sublevel sets: only rounding can make the area decrease
        np.maximum.accumulate(out[:, 1].astype(float)),
        out[:, 2].astype(np.int64),
        out[:, 3].astype(np.int64),
        out[:, 4].astype(np.int64),
        float(mesh.lengths.max()),
    )


def boundary_clearance(mesh: TriMesh, field: DistanceField) -> float:
    """Distance from the source to the mesh boundary (inf for closed meshes)."""
    b = mesh.boundary_vertex_mask()
    return float(field.dist[b].min()) if b.any() else math.inf


def default_radii(mesh: TriMesh, field: DistanceField, count=60, r_max=None) -> np.ndarray:
    if r_max is None:
        r_max = min(boundary_clearance(mesh, field), float(field.dist.max()))
    return np.linspace(r_max / count, r_max, count)


def mesh_error_estimate(profile: BallProfile) -> float:
    """Disagreement between ``a''`` and ``l'`` (equal in the continuum) away from chi jumps."""
    r = profile.radii
    a2 = second_difference(r, profile.area)
    l1 = (profile.boundary_length[2:] - profile.boundary_length[:-2]) / (r[2:] - r[:-2])
    keep = jump_mask(profile.euler_char)[1:-1]
    if not keep.any():
        return 0.0
    # median: kinks of l(r) at critical radii are not discretisation error
    return float(np.median(np.abs(a2 - l1)[keep]))


def check_profile_inequality(profile: BallProfile, k=1.0, factor=5.0) -> dict:
    """Fundamental inequality on a mesh profile with ``tol = factor * mesh error``.

    Only radii resolved by the mesh (at least two edge lengths) take part.
    """
    profile = profile.resolved()
    tol = factor * mesh_error_estimate(profile)
    return check_fundamental_inequality(profile.profile("area"), profile.profile("euler_char"), k, tol)


def scan_topology_bound(mesh: TriMesh, field: DistanceField, params: ComparisonParams, samples=21, slack=1.0) -> dict:
    """Look for ``r'`` strictly inside ``(r0, r0 + c/k)`` with ``n(r') <= bound + slack``."""
    r_out = params.r_outer
    dmax = float(np.max(field.dist[np.isfinite(field.dist)]))
    if r_out > dmax:
        raise ParameterError(f"r0 + c/k = {r_out!r} exceeds the distance range {dmax!r}")
    grid = np.linspace(params.r0, r_out, samples + 2)
    prof = ball_profile(mesh, field, grid)
    ell_outer = float(prof.boundary_length[-1])
    bound = topology_bound(params, ell_outer)
    n_in = prof.n_gen[1:-1]
    i = int(np.argmin(n_in))
    return {
        "r0": params.r0,
        "r_outer": r_out,
        "ell_outer": ell_outer,
        "bound": bound,
        "crude_bound": crude_topology_bound(params),
        "r_prime": float(grid[1:-1][i]),
        "n_prime": int(n_in[i]),
        "slack": float(slack),
        "passed": bool(n_in[i] <= bound + slack),
    }


def discrete_gauss_bonnet(mesh: TriMesh, region=None) -> dict:
    """Angle-defect form of Gauss-Bonnet on a triangle region.

    ``region`` is a boolean triangle mask or an index array (default: all).
    Returns curvature and turning sums, ``2 pi chi`` and their difference.
    """
    if region is None:
        mask = np.ones(mesh.n_triangles, dtype=bool)
    else:
        region = np.asarray(region)
        if region.dtype == bool:
            mask = region
        else:
            mask = np.zeros(mesh.n_triangles, dtype=bool)
            mask[region] = True
    if not mask.any():
        raise MeshError("empty region")
    sub, _ = mesh.triangle_region(mask)
    if np.any(sub.edge_triangle_counts() > 2):
        raise MeshError("region is not a manifold")
    sub.boundary_loops()  # raises on pinched boundary vertices
    ang = sub.triangle_angles()
    tot = np.bincount(sub.triangles.ravel(), weights=ang.ravel(), minlength=sub.n_vertices)
    used = np.zeros(sub.n_vertices, dtype=bool)
    used[sub.triangles.ravel()] = True
    bnd = sub.boundary_vertex_mask()
    curv = float((2 * math.pi - tot)[used & ~bnd].sum())
    turn = float((math.pi - tot)[used & bnd].sum())
    chi = sub.euler_characteristic()
    total = curv + turn
    return {
        "curvature": curv,
        "turning": turn,
        "total": total,
        "chi": chi,
        "two_pi_chi": 2 * math.pi * chi,
        "residual": total - 2 * math.pi * chi,
    }
