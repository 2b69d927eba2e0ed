"""Plane domains: boundary distance, quasihyperbolic lengths and distances,
separating round annuli and closed-form Poincare densities of model domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .comparison import ParameterError


class DomainError(ParameterError):
    """A point or curve is not inside the domain."""


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass
class PlaneDomain:
    """``{|z| < outer_radius}`` (or the plane if None) minus closed round disks.

    ``holes`` holds ``(center, radius)`` pairs; radius 0 removes a single
    point.  ``grid`` is the cell count per side for grid distances.
    """

    outer_radius: float | None = 1.0
    holes: list = field(default_factory=list)
    grid: int = 256
    min_radius: float = 1e-6

    def __post_init__(self):
        self.holes = [(complex(c), float(r)) for c, r in self.holes]
        R = self.outer_radius
        if R is not None and not (R > 0):
            raise ParameterError("outer radius must be > 0")
        for i, (c, r) in enumerate(self.holes):
            if r < 0:
                raise ParameterError("hole radius must be >= 0")
            if R is not None and abs(c) + r >= R:
                raise ParameterError(f"hole {i} is not strictly inside the outer circle")
            for j in range(i):
                c2, r2 = self.holes[j]
                if abs(c - c2) <= r + r2:
                    raise ParameterError(f"holes {j} and {i} are not disjoint")
        if self.grid < 2:
            raise ParameterError("grid must have at least 2 cells")

    @property
    def centers(self) -> np.ndarray:
        return np.array([c for c, _ in self.holes], dtype=complex)

    @property
    def radii(self) -> np.ndarray:
        return np.array([r for _, r in self.holes], dtype=float)

    def delta(self, z) -> np.ndarray:
        """Boundary distance, vectorised; values <= 0 mean outside the domain."""
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, np.inf)
        if self.outer_radius is not None:
            out = self.outer_radius - np.abs(z)
        for c, r in self.holes:
            out = np.minimum(out, np.abs(z - c) - r)
        return out

    def segment_inside(self, a: complex, b: complex) -> bool:
        """Whether the closed segment [a, b] lies in the domain."""
        if self.delta(a) <= 0 or self.delta(b) <= 0:
            return False
        d = b - a
        L2 = abs(d) ** 2
        for c, r in self.holes:
            t = 0.0 if L2 == 0 else min(1.0, max(0.0, ((c - a) * d.conjugate()).real / L2))
            if abs(a + t * d - c) <= r:
                return False
        return True  # the outer disk is convex


def boundary_distance(domain: PlaneDomain, z) -> float:
    d = float(domain.delta(complex(z)))
    if not d > 0:
        raise DomainError(f"point {complex(z)!r} is not in the domain")
    return d


def _segment_qh(domain, a, b, rtol=1e-6, max_level=24):
    L = abs(b - a)
    if L == 0:
        return 0.0
    n = 1
    old = None
    for _ in range(max_level):
        t = (np.arange(n) + 0.5) / n
        val = float(np.sum(1.0 / domain.delta(a + t * (b - a)))) * L / n
        if old is not None and abs(val - old) <= rtol * abs(val):
            return val
        old = val
        n *= 2
    return val


def _as_points(polyline):
    pts = np.asarray(polyline)
    if pts.ndim == 2 and pts.shape[1] == 2:
        pts = pts[:, 0] + 1j * pts[:, 1]
    return np.asarray(pts, dtype=complex).ravel()


def quasihyperbolic_length(domain: PlaneDomain, polyline, rtol=1e-6) -> float:
    """``int |dz| / delta(z)`` along a polyline (complex points or (x, y) rows)."""
    pts = _as_points(polyline)
    if pts.size == 0:
        raise ParameterError("empty polyline")
    if domain.delta(pts[0]) <= 0:
        raise DomainError("polyline starts outside the domain")
    total = 0.0
    for i in range(pts.size - 1):
        a, b = complex(pts[i]), complex(pts[i + 1])
        if not domain.segment_inside(a, b):
            raise DomainError(f"segment {i} ({a!r} -> {b!r}) leaves the domain")
        total += _segment_qh(domain, a, b, rtol)
    return total


def check_minlen_bound(domain: PlaneDomain, polyline) -> dict:
    """``k(gamma) >= log(1 + s / delta(x))`` with s the Euclidean length, x the start."""
    pts = _as_points(polyline)
    k = quasihyperbolic_length(domain, pts)
    s = float(np.sum(np.abs(np.diff(pts))))
    bound = math.log1p(s / boundary_distance(domain, pts[0]))
    return {"qh_length": k, "euclidean_length": s, "bound": bound, "passed": bool(k >= bound - 1e-9)}


def _gl_weight(domain, a, b):
    """Quasihyperbolic length of segments a -> b by 8-point Gauss-Legendre."""
    d = b - a
    t = 0.5 * (_GL_X + 1.0)
    z = a[:, None] + t[None, :] * d[:, None]
    return np.abs(d) * 0.5 * (_GL_W[None, :] / domain.delta(z)).sum(axis=1)


def quasihyperbolic_distance(domain: PlaneDomain, z, w, grid=None, link_radius=None) -> float:
    """Grid-graph upper bound for the quasihyperbolic distance.

    Nodes sit on a square lattice with ``grid`` cells per side; edges join
    8-neighbours.  ``z`` and ``w`` are joined to every node within
    ``link_radius`` (default: four cells of a 256 grid), so a coarse grid's
    paths survive in any refinement by an integer factor.
    Returns ``inf`` if ``w`` is not reachable.
    """
    z, w = complex(z), complex(w)
    boundary_distance(domain, z)
    boundary_distance(domain, w)
    if z == w:
        return 0.0
    n = int(grid or domain.grid)
    if domain.outer_radius is not None:
        half = domain.outer_radius
    else:
        ext = [abs(z), abs(w)] + [abs(c) + r for c, r in domain.holes]
        half = 1.5 * max(ext)
    h = 2 * half / n
    if link_radius is None:
        link_radius = max(4 * 2 * half / 256, 1.5 * h)
    xs = -half + h * np.arange(n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    P = (X + 1j * Y).ravel()
    inside = domain.delta(P) > 0
    idx = np.arange(P.size).reshape(n + 1, n + 1)
    rows, cols = [], []
    for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
        a = idx[max(0, -di) : n + 1 - max(0, di), max(0, -dj) : n + 1 - max(0, dj)]
        b = idx[max(0, di) : n + 1 + min(0, di), max(0, dj) : n + 1 + min(0, dj)]
        a, b = a.ravel(), b.ravel()
        ok = inside[a] & inside[b]
        rows.append(a[ok])
        cols.append(b[ok])
    a = np.concatenate(rows)
    b = np.concatenate(cols)
    # drop lattice edges that cross a hole between two inside nodes
    ok = _segments_clear(domain, P[a], P[b])
    a, b = a[ok], b[ok]
    wts = _gl_weight(domain, P[a], P[b])
    # endpoints as two extra nodes
    ez, ew = P.size, P.size + 1
    ea, eb, ewt = [a], [b], [wts]
    for node, pt in ((ez, z), (ew, w)):
        near = np.flatnonzero(inside & (np.abs(P - pt) <= link_radius))
        near = near[_segments_clear(domain, np.full(near.size, pt), P[near])]
        ea.append(np.full(near.size, node))
        eb.append(near)
        ewt.append(_gl_weight(domain, np.full(near.size, pt), P[near]))
    if abs(z - w) <= link_radius and domain.segment_inside(z, w):
        ea.append(np.array([ez]))
        eb.append(np.array([ew]))
        ewt.append(_gl_weight(domain, np.array([z]), np.array([w])))
    a = np.concatenate(ea)
    b = np.concatenate(eb)
    wts = np.concatenate(ewt)
    G = sp.coo_matrix((wts, (a, b)), shape=(P.size + 2, P.size + 2)).tocsr()
    d = dijkstra(G, directed=False, indices=ez)
    return float(d[ew])


def _segments_clear(domain, A, B):
    """Vectorised: segments A->B avoid every hole (endpoints assumed inside)."""
    ok = np.ones(A.shape, dtype=bool)
    D = B - A
    L2 = np.abs(D) ** 2
    for c, r in domain.holes:
        t = np.where(L2 > 0, ((c - A) * np.conj(D)).real / np.where(L2 > 0, L2, 1.0), 0.0)
        t = np.clip(t, 0.0, 1.0)
        ok &= np.abs(A + t * D - c) > r
    return ok


# ----------------------------------------------------------------------
# separating round annuli


def _radial_gaps(domain: PlaneDomain, a: complex):
    """Round annuli centred at ``a`` inside the domain that separate its boundary.

    Returns a list of ``(rho1, rho2, punctured)``.
    """
    iv = []
    punct = []
    for c, r in domain.holes:
        dist = abs(c - a)
        lo = max(0.0, dist - r)
        iv.append((lo, dist + r))
        punct.append(r == 0 and dist == 0)
    if domain.outer_radius is not None:
        iv.append((domain.outer_radius - abs(a), math.inf))
        punct.append(False)
    order = sorted(range(len(iv)), key=lambda i: iv[i])
    gaps = []
    reach = None
    reach_p = False
    for i in order:
        lo, hi = iv[i]
        if reach is not None and lo > reach:
            rho1 = reach
            flag = reach_p
            if rho1 == 0:
                rho1, flag = domain.min_radius, True
            if lo > rho1:
                gaps.append((rho1, lo, flag))
        if reach is None or hi > reach:
            reach, reach_p = hi, punct[i]
    return gaps


def uniformly_perfect_constant(domain: PlaneDomain) -> dict:
    """Largest modulus of a separating round annulus centred at a candidate point.

    Candidates: hole centres, midpoints of pairs of hole centres, and the
    origin.  The result is a lower bound for the supremum over all
    separating annuli.  ``unbounded`` flags annuli around punctures, whose
    inner radius was clipped at ``min_radius``.
    """
    ncomp = len(domain.holes) + (domain.outer_radius is not None)
    if ncomp < 2:
        raise ParameterError("domain has fewer than two boundary components")
    cands = [0j] + [c for c, _ in domain.holes]
    for i in range(len(domain.holes)):
        for j in range(i + 1, len(domain.holes)):
            cands.append(0.5 * (domain.holes[i][0] + domain.holes[j][0]))
    best = None
    for a in cands:
        for rho1, rho2, flag in _radial_gaps(domain, a):
            mod = math.log(rho2 / rho1) / (2 * math.pi)
            if best is None or mod > best["c1_lower"]:
                best = {
                    "c1_lower": mod,
                    "center": [a.real, a.imag],
                    "rho1": rho1,
                    "rho2": rho2,
                    "unbounded": bool(flag),
                }
    if best is None:
        best = {"c1_lower": 0.0, "center": None, "rho1": None, "rho2": None, "unbounded": False}
    return best


# ----------------------------------------------------------------------
# model densities


def model_poincare_density(model: str, z, R=None) -> float:
    """Curvature -1 densities: ``disk``, ``punctured_disk`` or ``annulus`` {1 < |z| < R}."""
    z = complex(z)
    r = abs(z)
    if model == "disk":
        if r >= 1:
            raise DomainError("z must lie in the unit disk")
        return 2.0 / ((1 - r) * (1 + r))
    if model == "punctured_disk":
        if not (0 < r < 1):
            raise DomainError("z must lie in the punctured unit disk")
        return 1.0 / (r * -math.log(r))
    if model == "annulus":
        if R is None or not (R > 1):
            raise ParameterError("annulus needs R > 1")
        if not (1 < r < R):
            raise DomainError("z must lie in the annulus")
        lr = math.log(R)
        return (math.pi / lr) / (r * math.sin(math.pi * math.log(r) / lr))
    raise ParameterError(f"unknown model {model!r}")


def model_boundary_distance(model: str, z, R=None) -> float:
    r = abs(complex(z))
    if model == "disk":
        return 1.0 - r
    if model == "punctured_disk":
        return min(r, 1.0 - r)
    if model == "annulus":
        return min(r - 1.0, R - r)
    raise ParameterError(f"unknown model {model!r}")


def check_length_ratio_punctured(rho: float) -> dict:
    """Circle ``|z| = rho``: ratio of its punctured-disk and disk lengths vs ``(1, coth(eps/2))``."""
    rho = float(rho)
    if not (0 < rho < 1):
        raise ParameterError("rho must lie in (0, 1)")
    L_S = 2 * math.pi * rho * 2.0 / ((1 - rho) * (1 + rho))
    L_star = 2 * math.pi / -math.log(rho)
    ratio = (1 - rho) * (1 + rho) / (2 * rho * -math.log(rho))
    eps = 2 * math.atanh(rho)
    upper = 1.0 / math.tanh(0.5 * eps)
    return {
        "rho": rho,
        "L_S": L_S,
        "L_S_star": L_star,
        "ratio": ratio,
        "eps": eps,
        "upper": upper,
        "passed": bool(1.0 < ratio < upper),
    }
