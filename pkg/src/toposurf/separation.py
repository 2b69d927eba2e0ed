"""Uniformly separated families of removed sets and the handle distance D*.

A :class:`SeparationSpec` lists removed vertex sets ``E_n`` with disjoint
neighbourhoods ``V_n`` on a host mesh.  Boundaries of ``V_n`` are the
boundary loops of the triangles whose corners all lie in ``V_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .comparison import ParameterError
from .geodesic import geodesic_distances, subsurface_set_distances
from .mesh import TriMesh


@dataclass
class SeparationSpec:
    host: TriMesh
    E_sets: list
    V_sets: list
    r: float = 0.0
    s: float = math.inf
    N: int = 1

    def __post_init__(self):
        self.E_sets = [np.unique(np.asarray(e, dtype=np.int64)) for e in self.E_sets]
        self.V_sets = [np.unique(np.asarray(v, dtype=np.int64)) for v in self.V_sets]
        if len(self.E_sets) != len(self.V_sets):
            raise ParameterError("need one neighbourhood per removed set")
        for i, (E, V) in enumerate(zip(self.E_sets, self.V_sets)):
            if not np.all(np.isin(E, V)):
                raise ParameterError(f"E_{i} is not contained in V_{i}")
        seen = np.zeros(self.host.n_vertices, dtype=bool)
        for i, V in enumerate(self.V_sets):
            if seen[V].any():
                raise ParameterError(f"V_{i} overlaps an earlier neighbourhood")
            seen[V] = True
        if self.r < 0 or self.s < 0 or self.N < 0:
            raise ParameterError("r, s and N must be non-negative")

    def with_thresholds(self, r=None, s=None, N=None) -> "SeparationSpec":
        return SeparationSpec(
            self.host, self.E_sets, self.V_sets,
            self.r if r is None else r, self.s if s is None else s, self.N if N is None else N,
        )


def neighbourhood_loops(mesh: TriMesh, V) -> list:
    """Boundary loops (original vertex ids) of the triangles spanned by ``V``."""
    mask = np.zeros(mesh.n_vertices, dtype=bool)
    mask[V] = True
    tri = mask[mesh.triangles].all(axis=1)
    if not tri.any():
        return []
    sub, new = mesh.triangle_region(tri)
    back = -np.ones(sub.n_vertices, dtype=np.int64)
    ok = new >= 0
    back[new[ok]] = np.flatnonzero(ok)
    return [back[np.asarray(loop)].tolist() for loop in sub.boundary_loops()]


def _loop_length(mesh, loop):
    return mesh.loop_length(loop)


def validate_uniform_separation(spec: SeparationSpec) -> dict:
    """Measure the separation conditions and compare them with ``(r, s, N)``."""
    m = spec.host
    per = []
    min_clear = math.inf
    max_len = 0.0
    max_loops = 0
    all_conn = True
    for E, V in zip(spec.E_sets, spec.V_sets):
        loops = neighbourhood_loops(m, V)
        bverts = np.unique(np.concatenate(loops)) if loops else np.array([], dtype=np.int64)
        dE = geodesic_distances(m, E)
        clear = float(dE[bverts].min()) if bverts.size else math.inf
        length = float(sum(_loop_length(m, lp) for lp in loops))
        rest = np.setdiff1d(V, E)
        if rest.size:
            sub, _ = m.submesh(rest)
            conn = connected_components(sub.graph(), directed=False)[0] == 1
        else:
            conn = False
        per.append({"clearance": clear, "boundary_length": length, "loops": len(loops), "complement_connected": bool(conn)})
        min_clear = min(min_clear, clear)
        max_len = max(max_len, length)
        max_loops = max(max_loops, len(loops))
        all_conn = all_conn and conn
    gap = math.inf
    for i, Vi in enumerate(spec.V_sets):
        if i + 1 < len(spec.V_sets):
            d = geodesic_distances(m, Vi)
            for Vj in spec.V_sets[i + 1 :]:
                gap = min(gap, float(d[Vj].min()))
    checks = {
        "clearance": {"value": min_clear, "threshold": spec.r, "passed": bool(min_clear >= spec.r)},
        "boundary_length": {"value": max_len, "threshold": spec.s, "passed": bool(max_len <= spec.s)},
        "loop_count": {"value": max_loops, "threshold": spec.N, "passed": bool(max_loops <= spec.N)},
        "complement_connected": {"value": bool(all_conn), "passed": bool(all_conn)},
        "neighbourhood_gap": {"value": gap, "threshold": spec.r, "passed": bool(gap >= spec.r)},
    }
    return {
        "passed": all(c["passed"] for c in checks.values()),
        "checks": checks,
        "per_set": per,
        "r_measured": min(min_clear, gap),
        "s_measured": max_len,
        "N_measured": max_loops,
    }


def estimate_D_star(spec: SeparationSpec) -> dict:
    """Largest distance inside ``V_n - E_n`` between boundary loops of ``V_n``
    that lie in one component of the complement of ``int V_n``.

    Returns ``{"D_star": value, "infinite": flag, "pairs": [...]}``; the value
    is 0 when no pair qualifies.
    """
    m = spec.host
    best = 0.0
    infinite = False
    pairs = []
    for n, (E, V) in enumerate(zip(spec.E_sets, spec.V_sets)):
        loops = neighbourhood_loops(m, V)
        if len(loops) < 2:
            continue
        mask = np.zeros(m.n_vertices, dtype=bool)
        mask[V] = True
        outside = ~mask[m.triangles].all(axis=1)
        comp_of = np.full(m.n_vertices, -1, dtype=np.int64)
        if outside.any():
            sub, new = m.triangle_region(outside)
            _, lab = connected_components(sub.graph(), directed=False)
            ok = new >= 0
            comp_of[ok] = lab[new[ok]]
        comps = [set(comp_of[np.asarray(lp)].tolist()) - {-1} for lp in loops]
        allowed = np.setdiff1d(V, E)
        for i in range(len(loops)):
            for j in range(i + 1, len(loops)):
                if not (comps[i] & comps[j]):
                    continue
                src = np.intersect1d(loops[i], allowed)
                dst = np.intersect1d(loops[j], allowed)
                if src.size == 0 or dst.size == 0:
                    d = math.inf
                else:
                    dist = subsurface_set_distances(m, allowed, src)
                    d = float(dist[dst].min())
                pairs.append({"set": n, "loops": [i, j], "distance": d})
                if math.isinf(d):
                    infinite = True
                else:
                    best = max(best, d)
    return {"D_star": math.inf if infinite else best, "infinite": infinite, "pairs": pairs}


def annular_neighbourhood(mesh: TriMesh, E, width) -> np.ndarray:
    """Vertices within distance ``width`` of ``E`` (including ``E``)."""
    d = geodesic_distances(mesh, E)
    return np.flatnonzero(d <= width)
