import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from toposurf.comparison import ParameterError
from toposurf.domains import (
    DomainError,
    PlaneDomain,
    boundary_distance,
    check_length_ratio_punctured,
    check_minlen_bound,
    model_boundary_distance,
    model_poincare_density,
    quasihyperbolic_distance,
    quasihyperbolic_length,
    uniformly_perfect_constant,
)

DISK = PlaneDomain()


def random_domain(rng, holes=3):
    while True:
        hs = []
        for _ in range(200):
            c = complex(*rng.uniform(-0.7, 0.7, 2))
            r = rng.uniform(0.03, 0.15)
            if abs(c) + r < 0.95 and all(abs(c - c2) > r + r2 + 0.02 for c2, r2 in hs):
                hs.append((c, r))
            if len(hs) == holes:
                return PlaneDomain(1.0, hs)


def random_polyline(dom, rng, nseg=5):
    while True:
        pts = [complex(*rng.uniform(-0.9, 0.9, 2))]
        if dom.delta(pts[0]) <= 0:
            continue
        for _ in range(nseg):
            q = pts[-1] + complex(*rng.normal(0, 0.15, 2))
            if not dom.segment_inside(pts[-1], q):
                break
            pts.append(q)
        else:
            return np.array(pts)


def test_boundary_distance():
    assert boundary_distance(DISK, 0) == 1
    dom = PlaneDomain(1.0, [(0.5, 0.1)])
    assert boundary_distance(dom, 0) == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(DomainError):
        boundary_distance(dom, 0.6)
    with pytest.raises(DomainError):
        boundary_distance(DISK, 1.5)
    plane = PlaneDomain(None, [(0, 1.0)])
    assert boundary_distance(plane, 3) == pytest.approx(2)


def test_domain_validation():
    with pytest.raises(ParameterError):
        PlaneDomain(1.0, [(0.9, 0.2)])
    with pytest.raises(ParameterError):
        PlaneDomain(1.0, [(0.1, 0.2), (0.3, 0.2)])
    with pytest.raises(ParameterError):
        PlaneDomain(1.0, [], grid=1)


def test_radial_length_closed_form():
    k = quasihyperbolic_length(DISK, [0, 1 - math.exp(-1)])
    assert k == pytest.approx(1.0, abs=1e-6)
    assert quasihyperbolic_length(DISK, [0.3, 0.3]) == 0


def test_length_vs_quad_oracle(rng):
    dom = random_domain(rng)
    for _ in range(5):
        pts = random_polyline(dom, rng, 2)
        ref = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            val, _ = quad(lambda t: abs(b - a) / dom.delta(a + t * (b - a)), 0, 1, epsabs=1e-12, limit=200)
            ref += val
        assert quasihyperbolic_length(dom, pts, rtol=1e-9) == pytest.approx(ref, rel=1e-6)


def test_length_additivity(rng):
    dom = random_domain(rng)
    for _ in range(10):
        pts = random_polyline(dom, rng, 4)
        whole = quasihyperbolic_length(dom, pts, rtol=1e-12)
        parts = quasihyperbolic_length(dom, pts[:3], rtol=1e-12) + quasihyperbolic_length(dom, pts[2:], rtol=1e-12)
        assert abs(whole - parts) <= 1e-9


def test_length_leaving_domain():
    dom = PlaneDomain(1.0, [(0.0, 0.2)])
    with pytest.raises(DomainError, match="segment 0"):
        quasihyperbolic_length(dom, [-0.5, 0.5])


def test_minlen_examples(rng):
    rep = check_minlen_bound(DISK, [0, 1 - math.exp(-1)])
    assert rep["passed"]
    assert rep["bound"] == pytest.approx(math.log(2 - math.exp(-1)), rel=1e-12)
    assert rep["bound"] == pytest.approx(float(mpmath.log(1 + (1 - mpmath.exp(-1)))), rel=1e-14)
    zero = check_minlen_bound(DISK, [0.2, 0.2])
    assert zero["passed"] and zero["qh_length"] == 0 and zero["bound"] == 0
    dom = random_domain(rng)
    for _ in range(100):
        assert check_minlen_bound(dom, random_polyline(dom, rng))["passed"]


def test_qh_distance():
    assert quasihyperbolic_distance(DISK, 0.2, 0.2, grid=64) == 0
    target = 1 - math.exp(-1)
    d256 = quasihyperbolic_distance(DISK, 0, target, grid=256)
    assert 1 - 1e-6 <= d256 <= 1.02


@pytest.mark.slow
def test_qh_distance_refinement():
    target = 0.3 + 0.4j
    d256 = quasihyperbolic_distance(DISK, -0.2j, target, grid=256)
    d1024 = quasihyperbolic_distance(DISK, -0.2j, target, grid=1024)
    assert d1024 <= d256 + 1e-6
    assert quasihyperbolic_distance(DISK, 0, 1 - math.exp(-1), grid=1024) <= 1.02


def test_qh_distance_unreachable():
    ring = PlaneDomain(None, [(0, 1.0)])
    # the plane minus a disk is connected, but the point inside is not in it
    with pytest.raises(DomainError):
        quasihyperbolic_distance(ring, 2, 0.1, grid=32)


def test_uniformly_perfect_examples():
    ann = PlaneDomain(math.exp(2 * math.pi), [(0, 1.0)])
    assert uniformly_perfect_constant(ann)["c1_lower"] == pytest.approx(1, rel=1e-12)
    half = uniformly_perfect_constant(PlaneDomain(1.0, [(0, 0.5)]))
    assert half["c1_lower"] == pytest.approx(math.log(2) / (2 * math.pi), rel=1e-12)
    assert half["rho1"] == pytest.approx(0.5) and half["rho2"] == pytest.approx(1)
    punct = uniformly_perfect_constant(PlaneDomain(1.0, [(0, 0.0)]))
    assert punct["unbounded"] and punct["c1_lower"] >= 2
    with pytest.raises(ParameterError):
        uniformly_perfect_constant(DISK)


def test_uniformly_perfect_monotone_under_shrinking(rng):
    for _ in range(5):
        dom = random_domain(rng)
        base = uniformly_perfect_constant(dom)["c1_lower"]
        holes = list(dom.holes)
        i = int(rng.integers(len(holes)))
        holes[i] = (holes[i][0], 0.5 * holes[i][1])
        assert uniformly_perfect_constant(PlaneDomain(1.0, holes))["c1_lower"] >= base - 1e-12


def test_model_densities(rng):
    assert model_poincare_density("disk", 0) == 2
    z = rng.uniform(-1, 1, (20000, 2)) @ np.array([1, 1j])
    z = z[np.abs(z) < 1][:10000]
    for w in z:
        v = model_poincare_density("disk", w) * model_boundary_distance("disk", w)
        assert 1 - 1e-12 <= v <= 2 + 1e-12
        assert v == pytest.approx(2 / (1 + abs(w)), rel=1e-12)
    r = math.exp(-6)
    assert model_poincare_density("punctured_disk", r) * model_boundary_distance("punctured_disk", r) <= 0.2
    # annulus density is symmetric under z -> R / z-bar
    R = 5.0
    assert model_poincare_density("annulus", 1.5, R) == pytest.approx(
        model_poincare_density("annulus", R / 1.5, R) * (R / 1.5) ** 2 / R, rel=1e-12
    )
    with pytest.raises(DomainError):
        model_poincare_density("disk", 1.0)
    with pytest.raises(ParameterError):
        model_poincare_density("sphere", 0.5)


def test_length_ratio(rng):
    mid = check_length_ratio_punctured(0.5)
    assert mid["ratio"] == pytest.approx(0.75 / math.log(2), abs=1e-12)
    assert mid["ratio"] == pytest.approx(1.0820, abs=1e-4)
    assert mid["eps"] == pytest.approx(math.log(3), rel=1e-12)
    assert mid["upper"] == pytest.approx(float(mpmath.coth(mpmath.atanh(0.5))), rel=1e-14)
    assert mid["passed"]
    near = check_length_ratio_punctured(0.99)
    assert near["passed"] and 1 < near["ratio"] < 1.001
    assert check_length_ratio_punctured(0.1)["passed"]
    for rho in rng.uniform(0.01, 0.99, 100):
        assert check_length_ratio_punctured(rho)["passed"]
    with pytest.raises(ParameterError):
        check_length_ratio_punctured(1.0)


def test_circle_length_punctured():
    dom = PlaneDomain(1.0, [(0, 0.0)])
    for rho in (0.2, 0.5, 0.7):
        t = np.linspace(0, 2 * math.pi, 257)
        pts = rho * np.exp(1j * t)
        k = quasihyperbolic_length(dom, pts, rtol=1e-10)
        # the inscribed polygon is slightly shorter than the circle
        assert k == pytest.approx(2 * math.pi * rho / min(rho, 1 - rho), rel=1e-3)
