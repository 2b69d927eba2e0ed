"""Distance fields on intrinsic triangle meshes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from . import kernels
from .comparison import ParameterError
from .mesh import MeshError, TriMesh


class UnreachableError(MeshError):
    """Some vertices cannot be reached from the source."""


@dataclass
class DistanceField:
    source: object
    dist: np.ndarray

    def edge_lipschitz_gap(self, mesh: TriMesh) -> float:
        """max over edges of ``|d(u) - d(v)| - len(u, v)`` (<= 0 when consistent)."""
        d = self.dist[mesh.edges]
        return float(np.max(np.abs(d[:, 0] - d[:, 1]) - mesh.lengths))


def _march(mesh: TriMesh, sources, init):
    vt_ptr, vt_idx = mesh.vertex_triangles()
    ve_ptr, ve_nbr, ve_len = mesh.vertex_edges()
    return kernels.fast_march(
        mesh.n_vertices,
        np.ascontiguousarray(mesh.triangles, dtype=np.int64),
        np.ascontiguousarray(mesh.tri_lengths, dtype=float),
        vt_ptr,
        vt_idx,
        ve_ptr,
        ve_nbr,
        np.ascontiguousarray(ve_len, dtype=float),
        np.ascontiguousarray(sources, dtype=np.int64),
        np.ascontiguousarray(init, dtype=float),
    )


def geodesic_distances(mesh: TriMesh, sources, init=None, method="fmm") -> np.ndarray:
    """Distances from a vertex set; ``inf`` where unreachable.

    ``method="fmm"`` runs fast marching with triangle unfolding updates;
    ``method="graph"`` runs Dijkstra on the edge graph.
    """
    sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if sources.size == 0:
        raise ParameterError("at least one source vertex is required")
    if sources.min() < 0 or sources.max() >= mesh.n_vertices:
        raise ParameterError("source vertex out of range")
    if init is None:
        init = np.zeros(sources.size)
    if method == "fmm":
        return _march(mesh, sources, init)
    if method == "graph":
        d = dijkstra(mesh.graph(), directed=False, indices=sources)
        d = np.atleast_2d(d) + np.asarray(init)[:, None]
        return d.min(axis=0)
    raise ParameterError(f"unknown distance method {method!r}")


def distance_field(mesh: TriMesh, source, method="fmm") -> DistanceField:
    """Distance from ``source`` (a vertex or a list of vertices) to every vertex.

    Raises :class:`UnreachableError` if the mesh is disconnected from the
    source.
    """
    d = geodesic_distances(mesh, source, method=method)
    bad = ~np.isfinite(d)
    if bad.any():
        ncomp, comp = mesh.components()
        lost = sorted(set(comp[bad].tolist()))
        raise UnreachableError(
            f"{int(bad.sum())} vertices unreachable from source {source}; unreachable components {lost} of {ncomp}"
        )
    return DistanceField(source, d)


def subsurface_distance(mesh: TriMesh, allowed, u, v, method="fmm") -> float:
    """Intrinsic distance between ``u`` and ``v`` using only ``allowed`` vertices.

    Paths use triangles whose three corners are allowed, plus edges whose
    two ends are allowed.  Returns ``inf`` if ``v`` cannot be reached.
    """
    allowed = np.unique(np.asarray(allowed, dtype=np.int64))
    mask = np.zeros(mesh.n_vertices, dtype=bool)
    mask[allowed] = True
    if not (mask[u] and mask[v]):
        raise ParameterError("u and v must both be allowed vertices")
    sub, new = mesh.submesh(allowed)
    d = geodesic_distances(sub, [new[u]], method=method)
    return float(d[new[v]])


def subsurface_set_distances(mesh: TriMesh, allowed, sources, method="fmm") -> np.ndarray:
    """Distances (indexed by original vertex) from a source set within ``allowed``.

    Vertices outside ``allowed`` get ``inf``.
    """
    allowed = np.unique(np.asarray(allowed, dtype=np.int64))
    sub, new = mesh.submesh(allowed)
    src = new[np.asarray(sources, dtype=np.int64)]
    if np.any(src < 0):
        raise ParameterError("sources must be allowed vertices")
    d = geodesic_distances(sub, src, method=method)
    out = np.full(mesh.n_vertices, np.inf)
    out[allowed] = d[new[allowed]]
    return out
