import math

import numpy as np
import pytest

from toposurf.balls import (
    TIE_EPS,
    ball_profile,
    boundary_clearance,
    check_profile_inequality,
    default_radii,
    mesh_error_estimate,
    scan_topology_bound,
)
from toposurf.builders import BuildSpec, build
from toposurf.comparison import ComparisonParams, ParameterError, comparison_area, comparison_boundary_length
from toposurf.geodesic import distance_field


def sublevel_chi(mesh, dist, r):
    """V - E + F of the clipped cell complex, built explicitly polygon by polygon."""
    V, E, F = set(), set(), 0
    for f, tri in enumerate(mesh.triangles.tolist()):
        nodes = []
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            if dist[a] < r:
                nodes.append(("v", a))
            if (dist[a] < r) != (dist[b] < r):
                nodes.append(("e", min(a, b), max(a, b)))
        if not nodes:
            continue
        F += 1
        V.update(nodes)
        for i in range(len(nodes)):
            E.add(frozenset((nodes[i], nodes[(i + 1) % len(nodes)])))
    return len(V) - len(E) + F


@pytest.fixture(scope="module")
def coarse_cylinder():
    m = build(BuildSpec("flat_cylinder", circumference=2, height=10, h=0.25))
    return m, distance_field(m, int(m.labels["center"][0]))


def test_cylinder_topology_vs_bruteforce(coarse_cylinder):
    m, f = coarse_cylinder
    radii = np.array([0.3, 0.6, 0.9, 1.3, 2.0, 3.0, 4.5])
    p = ball_profile(m, f, radii)
    for r, chi, n, comps in zip(radii, p.euler_char, p.n_gen, p.component_count):
        assert comps == 1
        assert chi == sublevel_chi(m, f.dist, r)
        if r < 1:
            assert (chi, n) == (1, 0)
        else:
            assert (chi, n) == (0, 1)


def test_tiny_ball(disk_mesh, disk_field):
    r = 0.5 * disk_mesh.lengths.min()
    p = ball_profile(disk_mesh, disk_field, [r])
    assert (p.euler_char[0], p.n_gen[0]) == (1, 0)
    assert p.boundary_length[0] / (2 * math.pi * r) == pytest.approx(1, abs=0.05)


def test_disk_profile_close_to_closed_forms(disk_mesh, disk_field):
    radii = np.linspace(0.1, 2.9, 40)
    p = ball_profile(disk_mesh, disk_field, radii)
    ell = np.array([comparison_boundary_length(1, r) for r in radii])
    area = np.array([comparison_area(1, r) for r in radii])
    assert np.max(np.abs(p.boundary_length / ell - 1)) < 0.05
    assert np.max(np.abs(p.area / area - 1)) < 0.05
    assert np.all(p.n_gen == 1 - p.euler_char)
    assert np.all(np.diff(p.area) >= 0)
    # a'(r) = l(r) on smooth stretches
    da = np.gradient(p.area, radii)
    assert np.all(np.abs(da[2:-2] / p.boundary_length[2:-2] - 1) < 0.1)


SURFACES = {
    "disk": BuildSpec("hyperbolic_disk", radius=3, h=0.1),
    "cylinder": BuildSpec("flat_cylinder", circumference=2, height=10, h=0.1),
    "funnel": BuildSpec("funnel", L=1, t_max=3, h=0.1),
    "cusp": BuildSpec("cusp", ell0=1, t_max=3, h=0.1),
    "pants2": BuildSpec("pants_tree", depth=2, l=1, h=0.1),
}


def _profile(name, count=60):
    m = build(SURFACES[name])
    f = distance_field(m, int(m.labels["center"][0]))
    r_max = min(boundary_clearance(m, f), float(f.dist.max()))
    if name == "disk":
        r_max = 2.5
    elif name in ("funnel", "cusp"):
        r_max = min(r_max, SURFACES[name].t_max - 1)
    return m, f, ball_profile(m, f, default_radii(m, f, count, r_max))


@pytest.fixture(scope="module", params=list(SURFACES))
def surface_profile(request):
    return request.param, _profile(request.param)


def test_comparison_inequalities(surface_profile):
    name, (m, f, p) = surface_profile
    ell = np.array([comparison_boundary_length(1, r) for r in p.radii])
    area = np.array([comparison_area(1, r) for r in p.radii])
    assert np.all(p.boundary_length <= ell * 1.05)
    assert np.all(p.area <= area * 1.05)


def test_fundamental_on_surfaces(surface_profile):
    name, (m, f, p) = surface_profile
    rep = check_profile_inequality(p, 1.0)
    assert rep["passed"], (name, rep["max_violation"], rep["tol"])
    assert mesh_error_estimate(p) >= 0


def test_identity_for_bounded_components(surface_profile):
    name, (m, f, p) = surface_profile
    # balls on these surfaces always have boundary
    assert np.all(p.n_gen == 1 - p.euler_char)


def test_scan_disk_equality_case(disk_mesh, disk_field):
    rep = scan_topology_bound(disk_mesh, disk_field, ComparisonParams(1, 1, 1))
    assert rep["n_prime"] == 0
    assert abs(rep["bound"]) < 0.2
    assert rep["passed"]
    assert 1 < rep["r_prime"] < 2
    assert rep["crude_bound"] == pytest.approx(math.sinh(2) / math.sinh(1))


def test_scan_range_error(disk_mesh, disk_field):
    with pytest.raises(ParameterError):
        scan_topology_bound(disk_mesh, disk_field, ComparisonParams(1, 1, 2.5))


def test_radii_validation(disk_mesh, disk_field):
    with pytest.raises(ParameterError):
        ball_profile(disk_mesh, disk_field, [0.5, 0.4])
    with pytest.raises(ParameterError):
        ball_profile(disk_mesh, disk_field, [0.0, 0.4])
    with pytest.raises(ParameterError):
        ball_profile(disk_mesh, disk_field, [1.0, 99.0])
    with pytest.raises(ParameterError):
        ball_profile(disk_mesh, disk_field, [])


def test_tie_perturbation(disk_mesh, disk_field):
    d = np.sort(disk_field.dist)
    r = float(d[200])
    at = ball_profile(disk_mesh, disk_field, [r])
    nudged = ball_profile(disk_mesh, disk_field, [r + TIE_EPS * disk_mesh.lengths.min()])
    assert at.area[0] == nudged.area[0]
    assert at.euler_char[0] == nudged.euler_char[0]


def test_csv(disk_mesh, disk_field):
    p = ball_profile(disk_mesh, disk_field, [0.5, 1.0])
    lines = p.to_csv().splitlines()
    assert lines[0] == "r,ell,area,chi,n,components"
    assert lines[1].startswith("0.5,") and lines[1].endswith(",1,0,1")
    assert float(lines[2].split(",")[1]) == p.boundary_length[1]


def test_shallow_holes_are_filled():
    from types import SimpleNamespace

    from meshes import grid_patch

    m = grid_patch(8, 8, 0.25)
    xy = m.coords[:, :2]
    # radial distance from a corner with two interior bumps: one 0.01 deep, one 0.5 deep, both inside the ball
    d = np.hypot(*xy.T)
    shallow = np.flatnonzero(np.all(np.isclose(xy, [0.5, 0.5]), axis=1))[0]
    deep = np.flatnonzero(np.all(np.isclose(xy, [0.25, 0.75]), axis=1))[0]
    r = 1.2
    d[shallow] = r + 0.01
    d[deep] = r + 0.5
    f = SimpleNamespace(dist=d, source=np.array([0]))
    kept = ball_profile(m, f, [r], hole_floor=0.0)
    filled = ball_profile(m, f, [r])
    assert kept.euler_char[0] == sublevel_chi(m, d, r) == -1
    assert filled.euler_char[0] == 0  # only the deep hole survives
    assert filled.area[0] == kept.area[0]
