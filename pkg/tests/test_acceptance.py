"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed in
the terminal summary (see conftest.py) and when this file is run as a
script.
"""

import math
import time

import numpy as np
import pytest

from toposurf import cli
from toposurf.balls import ball_profile, boundary_clearance, check_profile_inequality, default_radii, scan_topology_bound
from toposurf.builders import BuildSpec, build, build_pair, pants_tree
from toposurf.comparison import (
    ComparisonParams,
    collar_width,
    comparison_area,
    comparison_boundary_length,
    eps0,
    eps0_target,
    f_c,
)
from toposurf.domains import (
    PlaneDomain,
    check_length_ratio_punctured,
    check_minlen_bound,
    model_boundary_distance,
    model_poincare_density,
    quasihyperbolic_length,
    uniformly_perfect_constant,
)
from toposurf.geodesic import distance_field, geodesic_distances
from toposurf.gromov import FiniteMetric, check_rips, delta_four_point, delta_thin
from toposurf.odecomp import ScalarProfile, check_fundamental_inequality, rk4_reference, solve_linear_ode
from toposurf.separation import SeparationSpec, annular_neighbourhood, estimate_D_star

RESULTS = {}


def record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {title} ({detail})"
    RESULTS[num] = line
    print(line)
    return ok


def _center(m):
    return int(m.labels["center"][0])


# 1 ---------------------------------------------------------------------
def test_c01_tree_delta():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    sizes = []
    for _ in range(50):
        n = int(rng.integers(100, 201))
        sizes.append(n)
        parent = [int(rng.integers(0, i)) for i in range(1, n)]
        # lengths in [0.1, 10] on a 2^-20 lattice so path sums are exact
        w = np.round(rng.uniform(0.1, 10, n - 1) * 2**20) / 2**20
        M = FiniteMetric.from_graph(n, np.c_[np.arange(1, n), parent], w)
        worst = max(worst, delta_four_point(M, "exact").delta)
    elapsed = time.perf_counter() - t0
    ok = worst == 0.0 and elapsed <= 60
    assert record(1, "tree metrics are 0-hyperbolic", ok, f"max delta {worst!r} over 50 trees of {min(sizes)}-{max(sizes)} nodes, {elapsed:.1f}s")


# 2 ---------------------------------------------------------------------
def test_c02_four_cycle():
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    hyp = delta_four_point(FiniteMetric.from_graph(4, edges), "exact").delta
    thin = delta_thin(4, edges)
    ok = hyp == 1.0 and thin == 1.0 and check_rips(hyp, thin)
    assert record(2, "unit 4-cycle", ok, f"four-point {hyp!r}, thin {thin!r}, rips {check_rips(hyp, thin)}")


# 3 ---------------------------------------------------------------------
def _disk_errors(h):
    m = build(BuildSpec("hyperbolic_disk", radius=3, h=h))
    f = distance_field(m, _center(m))
    radii = np.linspace(2.5 / 50, 2.5, 50)
    p = ball_profile(m, f, radii)
    ell = np.array([comparison_boundary_length(1, r) for r in radii])
    area = np.array([comparison_area(1, r) for r in radii])
    below = bool(np.all(p.boundary_length <= 1.05 * ell) and np.all(p.area <= 1.05 * area))
    err = max(np.max(np.abs(p.boundary_length / ell - 1)), np.max(np.abs(p.area / area - 1)))
    return below, float(err)


def test_c03_comparison_inequalities():
    t0 = time.perf_counter()
    below, e1 = _disk_errors(0.05)
    _, e2 = _disk_errors(0.025)
    elapsed = time.perf_counter() - t0
    ok = below and e1 <= 0.05 and e1 / e2 >= 1.5 and elapsed <= 120
    assert record(3, "ball length and area comparison on the disk", ok, f"max rel err {e1:.4f} at h=0.05, {e2:.4f} at h=0.025, ratio {e1 / e2:.2f}, {elapsed:.1f}s")


# 4 ---------------------------------------------------------------------
def _mesh_profile(spec, r_cap=None):
    m = build(spec)
    f = distance_field(m, _center(m))
    r_max = min(boundary_clearance(m, f), float(f.dist.max()))
    if r_cap is not None:
        r_max = min(r_max, r_cap)
    return ball_profile(m, f, default_radii(m, f, 60, r_max))


def test_c04_fundamental_inequality():
    cases = {
        "disk": (BuildSpec("hyperbolic_disk", radius=3, h=0.05), 2.5),
        "cylinder": (BuildSpec("flat_cylinder", circumference=2, height=10, h=0.1), None),
        "funnel": (BuildSpec("funnel", L=1, t_max=4, h=0.1), 3.0),
        "pants2": (BuildSpec("pants_tree", depth=2, l=1, h=0.1), None),
    }
    parts, ok = [], True
    for name, (spec, cap) in cases.items():
        rep = check_profile_inequality(_mesh_profile(spec, cap), 1.0)
        ok &= rep["passed"]
        parts.append(f"{name} {rep['max_violation']:.3f}<={rep['tol']:.3f}")
    r = np.linspace(0.05, 3, 300)
    exact = check_fundamental_inequality(
        ScalarProfile(r, 2 * math.pi * (np.cosh(r) - 1), "area"), ScalarProfile(r, np.ones_like(r), "euler_char"), 1, 1e-9
    )
    ok &= exact["passed"]
    parts.append(f"closed form {exact['max_violation']:.1e}")
    assert record(4, "area inequality on mesh profiles", ok, ", ".join(parts))


# 5 ---------------------------------------------------------------------
def test_c05_ball_topology_bound():
    m = pants_tree(4, 1.0, 0.1).validate()
    f = distance_field(m, _center(m))
    fails = []
    for r0 in np.arange(1.0, 4.01, 0.5):
        rep = scan_topology_bound(m, f, ComparisonParams(1, 1, float(r0)))
        if not rep["passed"]:
            fails.append(float(r0))
    radii = np.linspace(0.1, 5.0, 50)
    p = ball_profile(m, f, radii)
    growth_ok = bool(np.all(p.n_gen <= np.sinh(radii + 1) / math.sinh(1)))
    sel = radii >= 2
    slope = float(np.polyfit(radii[sel], np.log(np.maximum(p.n_gen[sel], 1)), 1)[0])
    ok = not fails and growth_ok and slope > 0
    assert record(5, "ball topology bound on pants_tree(4)", ok, f"failing r0 {fails}, n(r)<=sinh(r+1)/sinh1 {growth_ok}, log-slope {slope:.3f}, n(5)={p.n_gen[-1]}")


# 6 ---------------------------------------------------------------------
def test_c06_ode_comparison():
    rng = np.random.default_rng(6)
    worst = -math.inf
    for _ in range(100):
        k = rng.uniform(0.3, 2)
        r = np.linspace(0, rng.uniform(0.5, 3), 300)
        fb = rng.normal(size=3) @ np.array([np.ones_like(r), r, np.cos(3 * r)])
        f = fb - rng.uniform(0, 3, r.size)
        u0, u1 = rng.normal(size=2)
        u = solve_linear_ode(k, 0, u0, u1, ScalarProfile(r, f))
        ub = solve_linear_ode(k, 0, u0, u1, ScalarProfile(r, fb))
        worst = max(worst, float(np.max(u.values - ub.values)))
        worst = max(worst, float(np.max((u.derivative - k * u.values) - (ub.derivative - k * ub.values))))
    grid, ur, _ = rk4_reference(1.0, 0, 1, 0, lambda t: math.sin(2 * t) + t, 2, 1e-3)
    u = solve_linear_ode(1.0, 0, 1, 0, ScalarProfile(grid, np.sin(2 * grid) + grid))
    rk_err = float(np.max(np.abs(u.values - ur)))
    ok = worst <= 1e-9 and rk_err <= 1e-6
    assert record(6, "ODE comparison", ok, f"max violation {worst:.2e} over 100 pairs, RK4 gap {rk_err:.2e}")


# 7 ---------------------------------------------------------------------
def test_c07_collar_disjointness():
    m = pants_tree(1, 1.0, 0.1)
    w = collar_width(1.0) - 0.1
    glues = sorted(k for k in m.labels if k.startswith("glue"))
    tubes = [np.flatnonzero(geodesic_distances(m, m.labels[g]) <= w) for g in glues]
    gap = float(geodesic_distances(m, m.labels[glues[0]])[m.labels[glues[1]]].min())
    common = np.intersect1d(*tubes).size
    ok = len(glues) == 2 and common == 0
    assert record(7, "collars around glue geodesics are disjoint", ok, f"radius {w:.4f}, shared vertices {common}, glue distance {gap:.3f}")


# 8 ---------------------------------------------------------------------
def _ball_specs(m, rng, count):
    """Valid specs: E a small ball, V a larger ball, disjoint across sets."""
    specs = []
    for _ in range(count):
        taken = np.zeros(m.n_vertices, dtype=bool)
        E_sets, V_sets = [], []
        for _ in range(int(rng.integers(1, 4))):
            v = int(rng.integers(m.n_vertices))
            d = geodesic_distances(m, [v])
            V = np.flatnonzero(d <= rng.uniform(0.3, 0.8))
            if taken[V].any():
                continue
            E = np.flatnonzero(d <= rng.uniform(0.0, 0.25))
            taken[V] = True
            E_sets.append(E)
            V_sets.append(V)
        specs.append(SeparationSpec(m, E_sets, V_sets))
    return specs


def test_c08_genus_zero_dstar():
    rng = np.random.default_rng(8)
    surfaces = {
        "disk": build(BuildSpec("hyperbolic_disk", radius=2, h=0.15)),
        "cylinder": build(BuildSpec("flat_cylinder", circumference=2, height=4, h=0.15)),
        "funnel": build(BuildSpec("funnel", L=1, t_max=2, h=0.15)),
        "cusp": build(BuildSpec("cusp", ell0=1, t_max=2, h=0.15)),
        "ypiece": build(BuildSpec("ypiece", lengths=(1, 1.5, 2), h=0.15)),
        "pants": build(BuildSpec("pants_tree", depth=2, l=1, h=0.15)),
    }
    S, T = build_pair(BuildSpec("disk_minus_disks", radius=2.5, h=0.15, holes=[(1, 0, 0.3), (1.5, 3, 0.4)]))
    surfaces["disk_minus_disks"] = T
    values = []
    for name, m in surfaces.items():
        specs = _ball_specs(m, rng, 3)
        # collars around cuffs or glue circles have two boundary loops
        for key in [k for k in m.labels if k.startswith(("glue", "cuff", "hole"))][:2]:
            E = m.labels[key]
            specs.append(SeparationSpec(m, [E], [annular_neighbourhood(m, E, 0.3)]))
        for spec in specs:
            values.append(estimate_D_star(spec)["D_star"])
    E = [S.labels["E0"], S.labels["E1"]]
    values.append(estimate_D_star(SeparationSpec(S, E, [annular_neighbourhood(S, e, 0.5) for e in E]))["D_star"])
    ok = all(v == 0.0 for v in values)
    assert record(8, "handle distance vanishes in genus 0", ok, f"{len(values)} specs on {len(surfaces) + 1} surfaces, max {max(values)!r}")


# 9 ---------------------------------------------------------------------
def test_c09_quasihyperbolic_bound():
    rng = np.random.default_rng(9)
    holes = []
    while len(holes) < 3:
        c = complex(*rng.uniform(-0.7, 0.7, 2))
        r = rng.uniform(0.05, 0.15)
        if abs(c) + r < 0.95 and all(abs(c - c2) > r + r2 for c2, r2 in holes):
            holes.append((c, r))
    dom = PlaneDomain(1.0, holes)
    passed = 0
    margin = math.inf
    while passed < 1000:
        pts = cli._random_polyline(dom, rng)
        rep = check_minlen_bound(dom, pts)
        if not rep["passed"]:
            break
        margin = min(margin, rep["qh_length"] - rep["bound"])
        passed += 1
    radial = quasihyperbolic_length(PlaneDomain(), [0, 1 - math.exp(-1)])
    ok = passed == 1000 and abs(radial - 1) <= 1e-6
    assert record(9, "quasihyperbolic length lower bound", ok, f"{passed}/1000 polylines, min margin {margin:.3e}, radial k {radial:.9f}")


# 10 --------------------------------------------------------------------
def test_c10_density_bounds():
    rng = np.random.default_rng(10)
    z = rng.uniform(-1, 1, (30000, 2)) @ np.array([1, 1j])
    z = z[np.abs(z) < 1][:10000]
    prod = np.array([model_poincare_density("disk", w) * model_boundary_distance("disk", w) for w in z])
    disk_ok = z.size == 10000 and bool(np.all((prod >= 1 - 1e-12) & (prod <= 2 + 1e-12)))
    r = math.exp(-6)
    punct = model_poincare_density("punctured_disk", r) * model_boundary_distance("punctured_disk", r)
    up = uniformly_perfect_constant(PlaneDomain(1.0, [(0, 0.0)]))
    ok = disk_ok and punct <= 0.2 and up["c1_lower"] >= 0.9
    assert record(10, "density bounds and the puncture signature", ok, f"disk range [{prod.min():.6f}, {prod.max():.6f}], punctured {punct:.4f}, annulus modulus {up['c1_lower']:.3f}")


# 11 --------------------------------------------------------------------
def test_c11_length_ratio():
    rng = np.random.default_rng(11)
    rhos = np.r_[[0.1, 0.5, 0.99], rng.uniform(0.01, 0.99, 97)]
    reps = [check_length_ratio_punctured(float(r)) for r in rhos]
    mid = reps[1]["ratio"]
    closed = 0.75 / math.log(2)
    ok = all(r["passed"] for r in reps) and abs(mid - closed) <= 1e-4 and abs(mid - 1.0820) <= 1e-4
    assert record(11, "punctured-disk length ratio", ok, f"{sum(r['passed'] for r in reps)}/100 pass, ratio(0.5) {mid:.6f}")


# 12 --------------------------------------------------------------------
def test_c12_eps0_round_trip():
    rng = np.random.default_rng(12)
    worst = 0.0
    for c, l, c1 in rng.uniform(0.1, 5, (1000, 3)):
        worst = max(worst, abs(f_c(c, eps0(c, l, c1)) - eps0_target(c, l, c1)))
    ok = worst <= 1e-10
    assert record(12, "eps0 round trip", ok, f"max residual {worst:.2e}")


# 13 --------------------------------------------------------------------
def test_c13_determinism(tmp_path):
    def run(tag):
        out = tmp_path / tag
        codes = [cli.main(["verify-all", "--out", str(out / "all"), "--seed", "13"])]
        cfg = tmp_path / "delta.ini"
        cfg.write_text("[experiment]\npoints = 40\nmode = sampled\nbudget = 20000\n")
        codes.append(cli.main(["delta", "--config", str(cfg), "--out", str(out / "delta"), "--seed", "13", "--threads", "2"]))
        return out, codes

    a, ca = run("a")
    b, cb = run("b")
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    same = all((a / f).read_bytes() == (b / f).read_bytes() for f in files)
    ok = same and ca == cb and len(files) > 0
    assert record(13, "CLI determinism", ok, f"{len(files)} artifacts compared, identical {same}, exit codes {ca}")


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
