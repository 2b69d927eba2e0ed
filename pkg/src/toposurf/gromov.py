"""Gromov hyperbolicity of finite metric spaces.

The four-point constant of a quadruple is half the gap between the largest
and the second largest of its three pair sums; exact mode enumerates all
quadruples in index ranges handed to a thread pool (the compiled kernel
releases the GIL), sampled mode evaluates random quadruples.
"""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from . import kernels
from .comparison import ParameterError

EXACT_CUTOFF = 300
DEFAULT_BUDGET = 10**7


class MetricError(ValueError):
    pass


@dataclass
class FiniteMetric:
    """Dense symmetric distance matrix, validated on construction."""

    d: np.ndarray
    validate: bool = True
    seed: int = 0

    def __post_init__(self):
        self.d = np.ascontiguousarray(self.d, dtype=np.float64)
        if self.validate:
            self._check()

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def _check(self):
        d = self.d
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise MetricError("distance matrix must be square")
        if not np.all(np.isfinite(d)):
            raise MetricError("distances must be finite")
        if np.any(d < 0):
            raise MetricError("distances must be non-negative")
        if np.any(np.diag(d) != 0):
            raise MetricError("diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise MetricError("distance matrix must be symmetric")
        n = d.shape[0]
        tol = 1e-12 * (float(d.max()) if n else 0.0)
        if n <= 500:
            for k in range(n):
                viol = d - (d[:, k : k + 1] + d[k : k + 1, :])
                if viol.max() > tol:
                    i, j = np.unravel_index(int(np.argmax(viol)), viol.shape)
                    raise MetricError(f"triangle inequality fails for ({i}, {k}, {j})")
        else:
            rng = np.random.default_rng(self.seed)
            t = rng.integers(0, n, size=(10**6, 3))
            x, y, z = t[:, 0], t[:, 1], t[:, 2]
            viol = d[x, z] - d[x, y] - d[y, z]
            if viol.max() > tol:
                m = int(np.argmax(viol))
                raise MetricError(f"triangle inequality fails for ({x[m]}, {y[m]}, {z[m]})")

    def diameter(self) -> float:
        return float(self.d.max()) if self.n else 0.0

    @classmethod
    def from_graph(cls, n, edges, weights=None) -> "FiniteMetric":
        """Shortest-path metric of a connected weighted graph."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(edges)) if weights is None else np.asarray(weights, float)
        g = sp.coo_matrix((w, (edges[:, 0], edges[:, 1])), shape=(n, n)).tocsr()
        d = dijkstra(g, directed=False)
        if not np.all(np.isfinite(d)):
            raise MetricError("graph is disconnected")
        return cls(np.minimum(d, d.T))

    @classmethod
    def from_samples(cls, d) -> "FiniteMetric":
        """Metric from noisy pairwise estimates: symmetrise, then take the shortest-path closure."""
        d = np.asarray(d, float)
        d = 0.5 * (d + d.T)
        np.fill_diagonal(d, 0.0)
        d = dijkstra(d, directed=False)
        return cls(np.minimum(d, d.T))

    def to_csv(self) -> str:
        """Lower-triangular CSV, row i holds d[i, 0..i] (diagonal included)."""
        out = io.StringIO()
        for i in range(self.n):
            out.write(",".join(repr(float(x)) for x in self.d[i, : i + 1]) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FiniteMetric":
        rows = [r for r in text.strip().splitlines() if r.strip()]
        n = len(rows)
        d = np.zeros((n, n))
        for i, row in enumerate(rows):
            vals = [float(x) for x in row.split(",")]
            if len(vals) == i:
                vals.append(0.0)
            if len(vals) != i + 1:
                raise MetricError(f"row {i} has {len(vals)} entries, expected {i + 1}")
            d[i, : i + 1] = vals
        d = d + np.tril(d, -1).T
        return cls(d)

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv())

    @classmethod
    def read(cls, path) -> "FiniteMetric":
        with open(path) as fh:
            return cls.from_csv(fh.read())


def gromov_product(M: FiniteMetric, x, y, w) -> float:
    """``(x|y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2``."""
    n = M.n
    for v in (x, y, w):
        if not (0 <= v < n):
            raise ParameterError(f"index {v} out of range")
    d = M.d
    return 0.5 * (d[x, w] + d[y, w] - d[x, y])


def quad_delta(M: FiniteMetric, quad) -> float:
    """Four-point constant of one quadruple (same arithmetic as the kernels)."""
    i, j, k, l = (int(q) for q in quad)
    d = M.d
    s = sorted((d[i, j] + d[k, l], d[i, k] + d[j, l], d[i, l] + d[j, k]))
    return float((s[2] - s[1]) / 2.0)


@dataclass
class DeltaReport:
    delta: float
    witness: list
    mode: str
    samples: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {"delta": self.delta, "witness": [int(x) for x in self.witness], "mode": self.mode, "samples": int(self.samples)}
        )


def _thread_count(threads):
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise ParameterError("threads must be >= 1")
    return int(threads)


def _partition(n, parts):
    """Split first indices [0, n-3) into ranges of similar C(n-i-1, 3) work."""
    i = np.arange(max(n - 3, 0))
    m = n - i - 1
    work = m * (m - 1) * (m - 2) / 6.0
    if work.size == 0:
        return []
    cum = np.cumsum(work)
    bounds = [0]
    for p in range(1, parts):
        b = int(np.searchsorted(cum, cum[-1] * p / parts)) + 1
        if bounds[-1] < b < i.size:
            bounds.append(b)
    bounds.append(int(i.size))
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _exact(M: FiniteMetric, threads):
    D = M.d
    chunks = _partition(M.n, 4 * _thread_count(threads))
    with ThreadPoolExecutor(max_workers=_thread_count(threads)) as ex:
        results = list(ex.map(lambda c: kernels.four_point_range(D, c[0], c[1]), chunks))
    best, wit = -1.0, (0, 1, 2, 3)
    # chunks are in index order, so ">" keeps the first lexicographic maximiser
    for g, w in results:
        if g > best:
            best, wit = g, w
    return best / 2.0, list(wit)


def _sampled(M: FiniteMetric, budget, seed, threads, batch=10**6):
    n = M.n
    rng = np.random.default_rng(seed)
    batches = []
    left = budget
    while left > 0:
        q = rng.integers(0, n, size=(min(batch, left) + 64, 4))
        ok = (
            (q[:, 0] != q[:, 1]) & (q[:, 0] != q[:, 2]) & (q[:, 0] != q[:, 3])
            & (q[:, 1] != q[:, 2]) & (q[:, 1] != q[:, 3]) & (q[:, 2] != q[:, 3])
        )
        q = np.ascontiguousarray(q[ok][:left])
        batches.append(q)
        left -= len(q)
    D = M.d
    with ThreadPoolExecutor(max_workers=_thread_count(threads)) as ex:
        results = list(ex.map(lambda q: kernels.four_point_quads(D, q), batches))
    best, wit = -1.0, None
    for q, (g, row) in zip(batches, results):
        if g > best:
            best, wit = g, q[row]
    wit = sorted(int(x) for x in wit)
    return quad_delta(M, wit), wit


def delta_four_point(M: FiniteMetric, mode="auto", budget=DEFAULT_BUDGET, seed=0, threads=None) -> DeltaReport:
    """Four-point delta.

    ``mode`` is ``"exact"``, ``"sampled"`` or ``"auto"`` (exact up to
    ``EXACT_CUTOFF`` points, sampled above).  Sampled results are lower
    bounds.
    """
    if mode not in ("auto", "exact", "sampled"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "exact" if M.n <= EXACT_CUTOFF else "sampled"
    if mode == "sampled" and budget <= 0:
        raise ParameterError("sampled mode needs a positive budget")
    if M.n < 4:
        return DeltaReport(0.0, [], mode, 0)
    if mode == "exact":
        delta, wit = _exact(M, threads)
        return DeltaReport(delta, wit, "exact", 0)
    delta, wit = _sampled(M, int(budget), seed, threads)
    return DeltaReport(delta, wit, "sampled", int(budget))


# ----------------------------------------------------------------------
# thin triangles


def _adjacency(n, edges, weights):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    w = np.ones(len(edges)) if weights is None else np.asarray(weights, float)
    g = sp.coo_matrix((np.r_[w, w], (np.r_[edges[:, 0], edges[:, 1]], np.r_[edges[:, 1], edges[:, 0]])), shape=(n, n))
    return g.tocsr()


def canonical_path(g: sp.csr_matrix, D: np.ndarray, u: int, v: int, tol=1e-12) -> list:
    """Lexicographically smallest shortest path from u to v."""
    path = [u]
    x = u
    while x != v:
        lo, hi = g.indptr[x], g.indptr[x + 1]
        nbr = g.indices[lo:hi]
        w = g.data[lo:hi]
        ok = np.abs(D[nbr, v] + w - D[x, v]) <= tol * max(1.0, D[x, v])
        x = int(nbr[ok].min())
        path.append(x)
    return path


def delta_thin(n, edges, weights=None) -> float:
    """Thinness of geodesic triangles on vertex triples (a lower bound).

    Each pair gets one canonical geodesic, stored from the smaller to the
    larger index; sides are measured at their vertices.
    """
    g = _adjacency(n, edges, weights)
    ncomp, _ = connected_components(g, directed=False)
    if ncomp > 1:
        raise MetricError("graph is disconnected")
    D = dijkstra(g, directed=False)
    paths = {}
    for u in range(n):
        for v in range(u + 1, n):
            paths[(u, v)] = np.array(canonical_path(g, D, u, v))
    best = 0.0
    for x in range(n):
        for y in range(x + 1, n):
            for z in range(y + 1, n):
                sides = (paths[(x, y)], paths[(y, z)], paths[(x, z)])
                for s in range(3):
                    others = np.unique(np.concatenate([sides[(s + 1) % 3], sides[(s + 2) % 3]]))
                    val = float(D[np.ix_(sides[s], others)].min(axis=1).max())
                    best = max(best, val)
    return best


def check_rips(delta_hyp: float, delta_thin_lower: float) -> bool:
    """The checkable direction: a measured thinness must not exceed ``4 delta``."""
    if delta_hyp < 0 or delta_thin_lower < 0:
        raise ParameterError("delta values must be >= 0")
    return bool(delta_thin_lower <= 4.0 * delta_hyp * (1 + 1e-12))


# ----------------------------------------------------------------------
# tree decompositions


@dataclass
class DecompositionSpec:
    pieces: list
    k_claimed: float
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.pieces = [np.unique(np.asarray(p, dtype=np.int64)) for p in self.pieces]
        if not self.pieces:
            raise ParameterError("a decomposition needs at least one piece")


def _graph_of(host):
    return host.graph() if hasattr(host, "graph") else sp.csr_matrix(host)


def _induced(g, ids):
    return g[ids][:, ids]


def _sample_delta(g, ids, max_points, budget, seed):
    rng = np.random.default_rng(seed)
    pick = ids if ids.size <= max_points else np.sort(rng.choice(ids, size=max_points, replace=False))
    sub = _induced(g, ids)
    pos = np.searchsorted(ids, pick)
    d = dijkstra(sub, directed=False, indices=pos)[:, pos]
    M = FiniteMetric(np.minimum(d, d.T), validate=False)
    if M.n < 4:
        return 0.0
    return delta_four_point(M, "sampled", budget=budget, seed=seed, threads=1).delta


def validate_tree_decomposition(spec: DecompositionSpec, host, max_points=120, budget=20000, seed=0) -> dict:
    """Check a tree decomposition of a graph (adjacency matrix or TriMesh).

    Intersections must separate the host, and ``k_measured`` sums the
    intrinsic diameters of the intersections seen from each piece.
    """
    g = _graph_of(host)
    n = g.shape[0]
    reasons = []
    cover = np.zeros(n, dtype=bool)
    for p in spec.pieces:
        cover[p] = True
    if not cover.all():
        reasons.append(f"{int((~cover).sum())} host vertices are not covered")
    for i, p in enumerate(spec.pieces):
        if connected_components(_induced(g, p), directed=False)[0] != 1:
            reasons.append(f"piece {i} is not connected")
    sums = np.zeros(len(spec.pieces))
    inter = []
    for a in range(len(spec.pieces)):
        for b in range(a + 1, len(spec.pieces)):
            eta = np.intersect1d(spec.pieces[a], spec.pieces[b])
            if eta.size == 0:
                continue
            inter.append((a, b, int(eta.size)))
            keep = np.ones(n, dtype=bool)
            keep[eta] = False
            idx = np.flatnonzero(keep)
            _, lab = connected_components(_induced(g, idx), directed=False)
            comp = -np.ones(n, dtype=np.int64)
            comp[idx] = lab
            ca = set(comp[np.setdiff1d(spec.pieces[a], eta)].tolist())
            cb = set(comp[np.setdiff1d(spec.pieces[b], eta)].tolist())
            if not ca or not cb or (ca & cb):
                reasons.append(f"intersection of pieces {a} and {b} does not separate them")
            for me in (a, b):
                P = spec.pieces[me]
                pos = np.searchsorted(P, eta)
                d = dijkstra(_induced(g, P), directed=False, indices=pos)[:, pos]
                sums[me] += float(d.max()) if np.all(np.isfinite(d)) else math.inf
    k_measured = float(sums.max()) if sums.size else 0.0
    delta_pieces = [_sample_delta(g, p, max_points, budget, seed) for p in spec.pieces]
    delta_host = _sample_delta(g, np.arange(n), max_points, budget, seed)
    valid = not reasons and k_measured <= spec.k_claimed
    if k_measured > spec.k_claimed:
        reasons.append(f"k_measured {k_measured!r} exceeds k_claimed {spec.k_claimed!r}")
    return {
        "valid": bool(valid),
        "k_measured": k_measured,
        "delta_pieces": delta_pieces,
        "delta_host": delta_host,
        "intersections": inter,
        "reasons": reasons,
    }
