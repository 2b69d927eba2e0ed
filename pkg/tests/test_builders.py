import math

import networkx as nx
import numpy as np
import pytest
from scipy.integrate import quad

from toposurf.balls import discrete_gauss_bonnet
from toposurf.builders import (
    BuildError,
    BuildSpec,
    _simpson_lengths,
    build,
    build_pair,
    hexagon_sides,
    hexagon_vertices,
    mark_surrounding_curve,
    pants_tree,
    right_angled_hexagon,
    ypiece,
)
from toposurf.mesh import MeshError

MINK = np.diag([1.0, 1.0, -1.0])


def hyp_dist(p, q):
    return math.acosh(max(1.0, -(p @ MINK @ q)))


def interior_curvature(m, skip_labels=()):
    """Angle defect over dual area at interior vertices away from the boundary."""
    bad = m.boundary_vertex_mask().copy()
    for name in skip_labels:
        bad[m.labels[name]] = True
    adj = m.graph()
    ring = np.flatnonzero(bad)
    bad[np.unique(adj[ring].indices)] = True
    k = m.angle_defects() / m.dual_areas()
    return k[~bad]


@pytest.fixture(scope="module")
def fine_disk():
    return build(BuildSpec("hyperbolic_disk", radius=3, h=0.05))


def test_disk_curvature(fine_disk):
    k = interior_curvature(fine_disk, ["center"])
    assert np.all(fine_disk.angle_defects()[~fine_disk.boundary_vertex_mask()] < 0)
    assert np.all(np.abs(k + 1) <= 0.15)


def test_disk_region_gauss_bonnet(fine_disk):
    r = fine_disk.coords[:, 0]
    mask = (r[fine_disk.triangles] <= 2.0 + 1e-9).all(axis=1)
    gb = discrete_gauss_bonnet(fine_disk, mask)
    target = -2 * math.pi * (math.cosh(2) - 1)
    assert gb["curvature"] == pytest.approx(target, rel=0.05)
    assert abs(gb["residual"]) < 1e-9


def test_flat_cylinder():
    m = build(BuildSpec("flat_cylinder", circumference=2, height=10, h=0.1))
    interior = ~m.boundary_vertex_mask()
    assert np.max(np.abs(m.angle_defects()[interior])) < 1e-9
    assert m.euler_characteristic() == 0
    assert m.lengths.max() <= 0.1 + 1e-12
    for name in ("bottom", "top"):
        assert m.loop_length(m.labels[name]) == pytest.approx(2, rel=0.01)


@pytest.mark.parametrize(
    "spec",
    [
        BuildSpec("funnel", L=1.0, t_max=3.0, h=0.05),
        BuildSpec("cusp", ell0=1.0, t_max=3.0, h=0.05),
    ],
    ids=["funnel", "cusp"],
)
def test_hyperbolic_ends_curvature(spec):
    m = build(spec)
    assert m.lengths.max() <= spec.h + 1e-12
    k = interior_curvature(m)
    assert np.all(np.abs(k + 1) <= 0.15)


def test_funnel_and_cusp_loops():
    f = build(BuildSpec("funnel", L=1.5, t_max=2, h=0.1))
    assert f.loop_length(f.labels["geodesic"]) == pytest.approx(1.5, rel=1e-3)
    assert f.loop_length(f.labels["outer"]) == pytest.approx(1.5 * math.cosh(2), rel=1e-2)
    c = build(BuildSpec("cusp", ell0=1.0, t_max=2, h=0.1))
    assert c.loop_length(c.labels["narrow"]) == pytest.approx(math.exp(-2), rel=1e-2)


def test_simpson_lengths_vs_quad():
    def width(t):
        return np.sinh(t)

    ta = np.array([0.5, 1.0, 2.0])
    tb = np.array([0.6, 1.05, 2.02])
    dth = np.array([0.1, 0.05, 0.03])
    got = _simpson_lengths(ta, tb, dth, width)
    for i in range(3):
        ref, _ = quad(lambda s: math.hypot(tb[i] - ta[i], math.sinh(ta[i] + s * (tb[i] - ta[i])) * dth[i]), 0, 1, epsabs=1e-14)
        assert got[i] == pytest.approx(ref, rel=1e-8)


def test_quadrature_edge_model_builds():
    m = build(BuildSpec("hyperbolic_disk", radius=1.5, h=0.1, edge_model="quadrature"))
    g = build(BuildSpec("hyperbolic_disk", radius=1.5, h=0.1))
    assert m.n_vertices == g.n_vertices
    # straight parameter segments are never shorter than geodesic chords
    assert np.all(m.lengths >= g.lengths - 1e-12)


def test_hexagon_law():
    for a in [(0.5, 0.5, 0.5), (0.3, 1.0, 2.0)]:
        s = hexagon_sides(*a)
        pts, gap = hexagon_vertices(s)
        assert gap < 1e-9
        for i in range(6):
            assert hyp_dist(pts[i], pts[(i + 1) % 6]) == pytest.approx(s[i], rel=1e-9)


def test_hexagon_area():
    # a right-angled hexagon has area (6 - 2) pi - 6 pi / 2 = pi
    H, sides = right_angled_hexagon((1, 1, 1), 0.05)
    assert H.triangle_areas().sum() == pytest.approx(math.pi, rel=0.01)
    assert len(sides) == 6


def test_ypiece():
    Y = ypiece((1.0, 1.5, 2.0), 0.1).validate()
    assert Y.euler_characteristic() == -1
    assert len(Y.boundary_loops()) == 3
    for name, L in zip(("cuff1", "cuff2", "cuff3"), (1.0, 1.5, 2.0)):
        assert Y.loop_length(Y.labels[name]) == pytest.approx(L, rel=0.01)
    # pants area 2 pi by Gauss-Bonnet for K = -1
    assert Y.triangle_areas().sum() == pytest.approx(2 * math.pi, rel=0.02)
    gb = discrete_gauss_bonnet(Y)
    assert abs(gb["residual"]) < 1e-9


def test_infeasible_specs():
    with pytest.raises(BuildError):
        BuildSpec("ypiece", lengths=(1, 0, 1))
    with pytest.raises(BuildError):
        BuildSpec("teapot")
    with pytest.raises(BuildError):
        BuildSpec("hyperbolic_disk", h=0)
    with pytest.raises(BuildError):
        build(BuildSpec("disk_minus_disks", radius=3, holes=[(1, 0, 0.5), (1.2, 0, 0.5)]))
    with pytest.raises(BuildError):
        BuildSpec.from_mapping({"kind": "funnel", "colour": "red"})


@pytest.mark.parametrize("depth", [0, 1, 2, 3])
def test_pants_tree_counts(depth):
    m = pants_tree(depth, 1.0, 0.25).validate()
    pieces = [k for k in m.labels if k.startswith("piece")]
    assert len(pieces) == 2 ** (depth + 1) - 1
    chi = m.euler_characteristic()
    loops = len(m.boundary_loops())
    assert chi == -(2 ** (depth + 1) - 1)
    # genus 0: chi = 2 - loops
    assert loops == 2 - chi
    assert 1 - chi == 2 ** (depth + 1)


def test_pants_tree_glue_lengths():
    m = pants_tree(1, 1.0, 0.1)
    glues = [k for k in m.labels if k.startswith("glue")]
    assert len(glues) == 2
    for g in glues:
        assert m.loop_length(m.labels[g]) == pytest.approx(1.0, rel=0.01)


def test_build_pair_labels():
    S, T = build_pair(BuildSpec("disk_minus_disks", radius=2.5, h=0.15, holes=[(1, 0, 0.3), (1.5, 3, 0.4)]))
    assert {"E0", "E1"} <= set(S.labels)
    assert {"hole0", "hole1"} <= set(T.labels)
    assert T.n_vertices == S.n_vertices - len(S.labels["E0"]) - len(S.labels["E1"])
    assert len(T.boundary_loops()) == 3
    with pytest.raises(BuildError):
        build_pair(BuildSpec("funnel"))


def _cover_oracle(T, hole_label, center, width):
    """Shortest closed walk winding once around ``center``, in a Z-cover built with networkx."""
    hole = T.labels[hole_label]
    z = T.coords[:, 2] + 1j * T.coords[:, 3]
    phi = np.angle(z - center)
    G = nx.Graph()
    for (a, b), L in zip(T.edges.tolist(), T.lengths.tolist()):
        G.add_edge(a, b, weight=L)
    band = set(nx.multi_source_dijkstra_path_length(G, set(hole.tolist()), cutoff=width))
    H = nx.Graph()
    for a, b, d in G.edges(data=True):
        if a in band and b in band:
            step = (phi[b] - phi[a] + math.pi) % (2 * math.pi) - math.pi
            end = phi[a] + step
            s = 1 if end > math.pi else (-1 if end < -math.pi else 0)
            for k in range(-1, 3):
                H.add_edge((a, k), (b, k + s), weight=d["weight"])
    best = math.inf
    for v in band:
        try:
            best = min(best, nx.dijkstra_path_length(H, (v, 0), (v, 1)))
        except (nx.NetworkXNoPath, nx.NodeNotFound):
            pass
    return best


@pytest.mark.parametrize("hole", [(1.0, 0.3, 0.5), (0.9, 1.0, 0.4), (1.1, 2.0, 0.45)])
def test_surrounding_curve_vs_cover_oracle(hole):
    r, th, rad = hole
    _, T = build_pair(BuildSpec("disk_minus_disks", radius=1.8, h=0.3, holes=[hole]))
    res = mark_surrounding_curve(T, "hole0", width=2.0)
    ref = _cover_oracle(T, "hole0", complex(r * math.cos(th), r * math.sin(th)), 2.0)
    assert res["length"] == pytest.approx(ref, rel=1e-12)
    assert res["separates"]
    # the hole loop itself is a candidate, so the result never exceeds it
    assert res["length"] <= res["hole_length"] + 1e-12
    assert res["length"] >= 0.8 * res["hole_length"]
    cyc = res["cycle"]
    assert len(set(cyc)) == len(cyc)
    assert T.loop_length(cyc) == pytest.approx(res["length"], rel=1e-12)


def test_surrounding_curve_two_holes():
    _, T = build_pair(BuildSpec("disk_minus_disks", radius=3, h=0.15, holes=[(1.2, 0, 0.3), (1.5, 3.1, 0.3)]))
    res = mark_surrounding_curve(T, "hole0")
    assert res["separates"]
    keep = np.setdiff1d(np.arange(T.n_vertices), res["cycle"])
    sub, new = T.submesh(keep)
    _, lab = sub.components()
    h1 = new[T.labels["hole1"]]
    assert len(set(lab[h1[h1 >= 0]].tolist())) == 1
    h0 = new[T.labels["hole0"]]
    h0 = h0[h0 >= 0]
    assert not set(lab[h0].tolist()) & set(lab[h1].tolist())


def test_surrounding_curve_puncture():
    S, T = build_pair(BuildSpec("disk_minus_disks", radius=2, h=0.2, holes=[(1.0, 0.5, 0.0)]))
    v = int(S.labels["E0"][0])
    ring = set(S.graph()[v].indices.tolist())
    res = mark_surrounding_curve(S, "E0")
    assert set(res["cycle"]) == ring
    assert res["separates"]


def test_surrounding_curve_missing_label():
    _, T = build_pair(BuildSpec("disk_minus_disks", radius=2, h=0.3, holes=[(1.0, 0.5, 0.3)]))
    with pytest.raises(MeshError):
        mark_surrounding_curve(T, "hole7")
