"""Intrinsic triangle meshes: connectivity, edge lengths and file I/O.

A :class:`TriMesh` carries no embedding.  Its geometry is the set of edge
lengths; every triangle is read as a flat Euclidean triangle with those
side lengths.  Curvature appears only as the angle defect at vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class MeshError(ValueError):
    """Invalid mesh connectivity or geometry."""


def _edge_keys(a, b, n):
    lo = np.minimum(a, b).astype(np.int64)
    hi = np.maximum(a, b).astype(np.int64)
    return lo * n + hi


@dataclass
class TriMesh:
    n_vertices: int
    triangles: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    labels: dict = field(default_factory=dict)
    coords: np.ndarray | None = None

    def __post_init__(self):
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.lengths = np.asarray(self.lengths, dtype=float)
        self.labels = {k: np.asarray(v, dtype=np.int64) for k, v in self.labels.items()}
        self._cache = {}
        n = self.n_vertices
        keys = _edge_keys(self.edges[:, 0], self.edges[:, 1], n)
        order = np.argsort(keys, kind="stable")
        self.edges = np.sort(self.edges[order], axis=1)
        self.lengths = self.lengths[order]
        self._keys = keys[order]
        if self._keys.size and np.any(np.diff(self._keys) == 0):
            raise MeshError("duplicate edges")
        if self.triangles.size:
            tk = self._tri_keys()
            idx = np.searchsorted(self._keys, tk)
            idx = np.clip(idx, 0, max(len(self._keys) - 1, 0))
            if len(self._keys) == 0 or np.any(self._keys[idx] != tk):
                raise MeshError("triangle edge missing from the edge list")
            self.tri_edges = idx.reshape(-1, 3)
        else:
            self.tri_edges = np.zeros((0, 3), dtype=np.int64)

    # ------------------------------------------------------------------
    # construction
    @classmethod
    def from_triangles(cls, n_vertices, triangles, length_of, extra_edges=None, labels=None, coords=None):
        """Build a mesh from triangles and a length function.

        ``length_of(a, b)`` receives two index arrays (one entry per unique
        edge) and returns their lengths.
        """
        tri = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        pairs = np.concatenate([tri[:, [1, 2]], tri[:, [2, 0]], tri[:, [0, 1]]])
        if extra_edges is not None and len(extra_edges):
            pairs = np.concatenate([pairs, np.asarray(extra_edges, dtype=np.int64).reshape(-1, 2)])
        pairs = np.sort(pairs, axis=1)
        pairs = np.unique(pairs, axis=0)
        lengths = np.asarray(length_of(pairs[:, 0], pairs[:, 1]), dtype=float)
        return cls(int(n_vertices), tri, pairs, lengths, labels or {}, coords)

    def _tri_keys(self):
        t = self.triangles
        n = self.n_vertices
        # edge opposite vertex i is (i+1, i+2)
        return np.stack(
            [_edge_keys(t[:, 1], t[:, 2], n), _edge_keys(t[:, 2], t[:, 0], n), _edge_keys(t[:, 0], t[:, 1], n)],
            axis=1,
        ).ravel()

    def edge_index(self, a, b):
        """Edge indices for vertex pairs; -1 where no edge exists."""
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(b, dtype=np.int64))
        k = _edge_keys(a, b, self.n_vertices)
        idx = np.searchsorted(self._keys, k)
        idx = np.clip(idx, 0, len(self._keys) - 1)
        return np.where(self._keys[idx] == k, idx, -1)

    def edge_length(self, a, b) -> float:
        i = int(self.edge_index(a, b)[0])
        if i < 0:
            raise MeshError(f"no edge between {a} and {b}")
        return float(self.lengths[i])

    # ------------------------------------------------------------------
    # derived geometry
    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def tri_lengths(self) -> np.ndarray:
        """(F, 3) side lengths, column i opposite vertex i."""
        return self.lengths[self.tri_edges]

    def triangle_areas(self) -> np.ndarray:
        a, b, c = np.sort(self.tri_lengths, axis=1)[:, ::-1].T
        # Kahan's stable Heron formula with a >= b >= c
        p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
        return 0.25 * np.sqrt(np.maximum(p, 0.0))

    def triangle_angles(self) -> np.ndarray:
        """(F, 3) interior angles, column i at vertex i."""
        L = self.tri_lengths
        out = np.empty_like(L)
        for i in range(3):
            a = L[:, i]
            b = L[:, (i + 1) % 3]
            c = L[:, (i + 2) % 3]
            cosv = (b * b + c * c - a * a) / (2 * b * c)
            out[:, i] = np.arccos(np.clip(cosv, -1.0, 1.0))
        return out

    def edge_triangle_counts(self) -> np.ndarray:
        return np.bincount(self.tri_edges.ravel(), minlength=len(self.edges))

    def boundary_edge_mask(self) -> np.ndarray:
        return self.edge_triangle_counts() == 1

    def boundary_vertex_mask(self) -> np.ndarray:
        m = np.zeros(self.n_vertices, dtype=bool)
        m[self.edges[self.boundary_edge_mask()].ravel()] = True
        return m

    def angle_defects(self) -> np.ndarray:
        """``2 pi - angle sum`` at interior vertices, ``pi - angle sum`` on the boundary."""
        s = np.bincount(self.triangles.ravel(), weights=self.triangle_angles().ravel(), minlength=self.n_vertices)
        base = np.where(self.boundary_vertex_mask(), math.pi, 2 * math.pi)
        return base - s

    def dual_areas(self) -> np.ndarray:
        """Barycentric dual cell areas (one third of each incident triangle)."""
        A = self.triangle_areas()
        return np.bincount(self.triangles.ravel(), weights=np.repeat(A / 3.0, 3), minlength=self.n_vertices)

    def euler_characteristic(self) -> int:
        used = np.unique(self.triangles)
        iso_edges = self.edge_triangle_counts() == 0
        return int(len(used) - (len(self.edges) - iso_edges.sum()) + self.n_triangles)

    # ------------------------------------------------------------------
    # adjacency
    def graph(self) -> sp.csr_matrix:
        n = self.n_vertices
        e = self.edges
        g = sp.coo_matrix((np.r_[self.lengths, self.lengths], (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n))
        return g.tocsr()

    def vertex_triangles(self):
        """CSR (ptr, idx) of incident triangles per vertex."""
        if "vt" not in self._cache:
            t = self.triangles.ravel()
            order = np.argsort(t, kind="stable")
            ptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
            np.cumsum(np.bincount(t, minlength=self.n_vertices), out=ptr[1:])
            self._cache["vt"] = (ptr, (order // 3).astype(np.int64))
        return self._cache["vt"]

    def vertex_edges(self):
        """CSR (ptr, neighbour, length) of the edge graph."""
        if "ve" not in self._cache:
            g = self.graph()
            g.sort_indices()
            self._cache["ve"] = (g.indptr.astype(np.int64), g.indices.astype(np.int64), g.data.astype(float))
        return self._cache["ve"]

    def components(self):
        """(count, labels) of connected components of the edge graph."""
        return connected_components(self.graph(), directed=False)

    # ------------------------------------------------------------------
    # validation
    def validate(self, require_connected=True):
        """Raise :class:`MeshError` unless the mesh is a valid oriented surface."""
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= self.n_vertices):
            raise MeshError("triangle index out of range")
        t = self.triangles
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("degenerate triangle (repeated vertex)")
        if np.any(~np.isfinite(self.lengths)) or np.any(self.lengths <= 0):
            raise MeshError("edge lengths must be finite and positive")
        cnt = self.edge_triangle_counts()
        if np.any(cnt > 2):
            raise MeshError(f"{int((cnt > 2).sum())} edges border more than two triangles")
        # orientation: each interior edge must be traversed once in each direction
        n = self.n_vertices
        d = np.concatenate([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]])
        dk = d[:, 0] * n + d[:, 1]
        if np.unique(dk).size != dk.size:
            raise MeshError("inconsistent triangle orientation")
        L = np.sort(self.tri_lengths, axis=1)
        if np.any(L[:, 0] + L[:, 1] <= L[:, 2]):
            bad = int(np.sum(L[:, 0] + L[:, 1] <= L[:, 2]))
            raise MeshError(f"{bad} triangles violate the strict triangle inequality")
        if require_connected:
            k, _ = self.components()
            if k != 1:
                raise MeshError(f"mesh has {k} connected components")
        return self

    # ------------------------------------------------------------------
    # boundary loops
    def boundary_loops(self):
        """Boundary cycles as vertex lists, in the orientation induced by the triangles."""
        t = self.triangles
        d = np.concatenate([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]])
        cnt = self.edge_triangle_counts()
        eid = np.concatenate([self.tri_edges[:, 0], self.tri_edges[:, 1], self.tri_edges[:, 2]])
        bd = d[cnt[eid] == 1]
        nxt = {}
        for u, v in bd.tolist():
            if u in nxt:
                raise MeshError(f"non-manifold boundary at vertex {u}")
            nxt[u] = v
        loops = []
        seen = set()
        for start in sorted(nxt):
            if start in seen:
                continue
            loop = [start]
            seen.add(start)
            v = nxt[start]
            while v != start:
                loop.append(v)
                seen.add(v)
                v = nxt[v]
            loops.append(loop)
        return loops

    def loop_length(self, loop) -> float:
        loop = list(loop)
        a = np.asarray(loop)
        b = np.roll(a, -1)
        idx = self.edge_index(a, b)
        if np.any(idx < 0):
            raise MeshError("loop uses a non-edge")
        return float(self.lengths[idx].sum())

    # ------------------------------------------------------------------
    # sub-meshes
    def submesh(self, keep_vertices):
        """Mesh induced on a vertex subset (triangles with all corners kept).

        Returns ``(mesh, old_to_new)`` where ``old_to_new`` is -1 for dropped
        vertices.  Edges with both ends kept are retained even if no kept
        triangle contains them.
        """
        keep = np.zeros(self.n_vertices, dtype=bool)
        keep[np.asarray(keep_vertices, dtype=np.int64)] = True
        new = -np.ones(self.n_vertices, dtype=np.int64)
        new[keep] = np.arange(keep.sum())
        tmask = keep[self.triangles].all(axis=1)
        emask = keep[self.edges].all(axis=1)
        labels = {}
        for k, v in self.labels.items():
            nv = new[v]
            labels[k] = nv[nv >= 0]
        coords = self.coords[keep] if self.coords is not None else None
        m = TriMesh(int(keep.sum()), new[self.triangles[tmask]], new[self.edges[emask]], self.lengths[emask], labels, coords)
        return m, new

    def remove_vertices(self, drop):
        """Delete vertices and every triangle/edge touching them."""
        keep = np.ones(self.n_vertices, dtype=bool)
        keep[np.asarray(drop, dtype=np.int64)] = False
        return self.submesh(np.flatnonzero(keep))

    def triangle_region(self, tri_mask):
        """Mesh consisting of the selected triangles only (vertices renumbered)."""
        tri_mask = np.asarray(tri_mask, dtype=bool)
        used = np.unique(self.triangles[tri_mask])
        new = -np.ones(self.n_vertices, dtype=np.int64)
        new[used] = np.arange(used.size)
        eidx = np.unique(self.tri_edges[tri_mask])
        m = TriMesh(int(used.size), new[self.triangles[tri_mask]], new[self.edges[eidx]], self.lengths[eidx])
        return m, new

    # ------------------------------------------------------------------
    # I/O
    def to_text(self) -> str:
        out = ["trimesh v1", f"v {self.n_vertices}"]
        out += [f"t {a} {b} {c}" for a, b, c in self.triangles.tolist()]
        out += [f"e {a} {b} {x!r}" for (a, b), x in zip(self.edges.tolist(), self.lengths.tolist())]
        for name in sorted(self.labels):
            ids = " ".join(str(i) for i in self.labels[name].tolist())
            out.append(f"l {name} {ids}".rstrip())
        return "\n".join(out) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "TriMesh":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0] != "trimesh v1":
            raise MeshError("missing 'trimesh v1' header")
        n = None
        tris, edges, lens, labels = [], [], [], {}
        for ln in lines[1:]:
            parts = ln.split()
            tag = parts[0]
            if tag == "v":
                n = int(parts[1])
            elif tag == "t":
                tris.append([int(x) for x in parts[1:4]])
            elif tag == "e":
                edges.append([int(parts[1]), int(parts[2])])
                lens.append(float(parts[3]))
            elif tag == "l":
                labels[parts[1]] = [int(x) for x in parts[2:]]
            else:
                raise MeshError(f"unknown record {tag!r}")
        if n is None:
            raise MeshError("missing vertex count line")
        return cls(n, np.array(tris, dtype=np.int64).reshape(-1, 3), np.array(edges, dtype=np.int64).reshape(-1, 2), lens, labels)

    @classmethod
    def read(cls, path) -> "TriMesh":
        with open(path) as fh:
            return cls.from_text(fh.read())
