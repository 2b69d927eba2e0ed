"""Second-order comparison for ``u'' - k^2 u = f`` and the area inequality.

The solver follows the ansatz ``u = e^{kr} c(r)`` so that
``(e^{2kr} c')' = e^{kr} f``.  Both integrals are evaluated exactly for the
piecewise-linear interpolant of the sampled ``f``; the method is exact when
``f`` is linear between samples and second order otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .comparison import ParameterError

TAGS = ("area", "boundary_length", "euler_char", "generic")


@dataclass
class ScalarProfile:
    grid: np.ndarray
    values: np.ndarray
    tag: str = "generic"
    derivative: np.ndarray | None = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.size == 0:
            raise ParameterError("profile grid must be a non-empty 1-d array")
        if self.values.shape != self.grid.shape:
            raise ParameterError("grid and values must have the same length")
        if np.any(np.diff(self.grid) <= 0):
            raise ParameterError("profile grid must be strictly increasing")
        if self.tag not in TAGS:
            raise ParameterError(f"unknown profile tag {self.tag!r}")
        if self.tag == "area":
            if np.any(self.values < 0) or np.any(np.diff(self.values) < 0):
                raise ParameterError("area profile must be non-negative and non-decreasing")

    def to_csv(self) -> str:
        lines = ["r,value"]
        lines += [f"{r!r},{v!r}" for r, v in zip(self.grid.tolist(), self.values.tolist())]
        return "\n".join(lines) + "\n"


def solve_linear_ode(k, r_start, u0, u0_prime, f: ScalarProfile) -> ScalarProfile:
    """Solve ``u'' - k^2 u = f`` with ``u(r_start) = u0``, ``u'(r_start) = u0_prime``.

    ``f.grid[0]`` must equal ``r_start``.  The returned profile carries the
    exact derivative of the computed solution in ``derivative``.
    """
    if not (k > 0):
        raise ParameterError("k must be > 0")
    r = f.grid
    if abs(r[0] - r_start) > 1e-12 * max(1.0, abs(r_start)):
        raise ParameterError("f must be sampled starting at r_start")
    fv = f.values
    # work in shifted variable s = r - r_start to keep exponentials small
    s = r - r[0]
    n = s.size
    c = np.empty(n)
    cp = np.empty(n)
    c[0] = u0
    cp[0] = u0_prime - k * u0
    # A = e^{2k s0} c'(s0) + I(s), I(s) = int_0^s e^{kt} f(t) dt
    acc = cp[0]
    for i in range(n - 1):
        a, b = s[i], s[i + 1]
        h = b - a
        q = (fv[i + 1] - fv[i]) / h
        p = fv[i] - q * a

        def F(t):
            return math.exp(k * t) * ((p + q * t) / k - q / (k * k))

        # c'(t) = e^{-2kt}(acc - F(a)) + e^{-kt}((p + q t)/k - q/k^2) on [a, b]
        K = acc - F(a)
        # int_a^b e^{-2kt} dt
        e2 = math.exp(-2 * k * a) * (-math.expm1(-2 * k * h)) / (2 * k)
        alpha = p / k - q / (k * k)
        beta = q / k

        def G(t):
            return -math.exp(-k * t) * ((alpha + beta * t) / k + beta / (k * k))

        c[i + 1] = c[i] + K * e2 + (G(b) - G(a))
        acc = acc + F(b) - F(a)
        cp[i + 1] = math.exp(-2 * k * b) * acc
    ek = np.exp(k * s)
    u = ek * c
    up = ek * (cp + k * c)
    return ScalarProfile(r.copy(), u, "generic", derivative=up)


def closed_form_area_comparison(k, r0, a0, ell0, chi0, r):
    """Comparison area ``(a0 + 2 pi chi0/k^2) cosh(k(r-r0)) + (ell0/k) sinh(k(r-r0)) - 2 pi chi0/k^2``."""
    r = np.asarray(r, dtype=float)
    t = k * (r - r0)
    m = 2 * math.pi * chi0 / (k * k)
    return (a0 + m) * np.cosh(t) + ell0 / k * np.sinh(t) - m


def rk4_reference(k, r_start, u0, u0_prime, f, r_end, h):
    """Classical fourth-order Runge-Kutta for ``u'' = k^2 u + f(r)``.

    ``f`` is a callable.  Returns (grid, u, u').  Kept independent of
    :func:`solve_linear_ode` so it can serve as its oracle.
    """
    n = int(round((r_end - r_start) / h))
    grid = r_start + h * np.arange(n + 1)
    y = np.array([u0, u0_prime], dtype=float)
    out = np.empty((n + 1, 2))
    out[0] = y

    def rhs(t, y):
        return np.array([y[1], k * k * y[0] + f(t)])

    for i in range(n):
        t = grid[i]
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return grid, out[:, 0], out[:, 1]


def _check_shared(a: ScalarProfile, b: ScalarProfile):
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid, rtol=0, atol=1e-12):
        raise ParameterError("profiles must share the same grid")


def check_comparison(u: ScalarProfile, u_bar: ScalarProfile, k, tol=1e-9) -> dict:
    """Margins of the two comparison conclusions at each grid point.

    ``value_margin = u_bar - u`` and ``slope_margin = (u_bar' - k u_bar) -
    (u' - k u)`` with derivatives by central differences.  Endpoints are
    reported but do not affect ``passed``.
    """
    _check_shared(u, u_bar)
    r = u.grid
    vm = u_bar.values - u.values
    if r.size >= 3:
        dm = np.gradient(vm, r, edge_order=2)
    else:
        dm = np.gradient(vm, r) if r.size == 2 else np.zeros_like(vm)
    sm = dm - k * vm
    bad_v = np.flatnonzero(vm < -tol)
    interior = np.zeros(r.size, dtype=bool)
    interior[1:-1] = True
    bad_s = np.flatnonzero((sm < -tol) & interior)
    return {
        "value_margin": vm,
        "slope_margin": sm,
        "min_value_margin": float(vm.min()),
        "min_slope_margin": float(sm[interior].min()) if interior.any() else 0.0,
        "violations": sorted(set(bad_v.tolist()) | set(bad_s.tolist())),
        "passed": bad_v.size == 0 and bad_s.size == 0,
    }


def second_difference(r, y):
    """Second derivative on a possibly non-uniform grid (interior points)."""
    r = np.asarray(r, float)
    y = np.asarray(y, float)
    h0 = r[1:-1] - r[:-2]
    h1 = r[2:] - r[1:-1]
    return 2 * (h0 * y[2:] - (h0 + h1) * y[1:-1] + h1 * y[:-2]) / (h0 * h1 * (h0 + h1))


def fitted_operator(r, y, k):
    """Three-point approximation of ``y'' - k^2 y`` at interior points.

    The weights reproduce the operator exactly on ``1``, ``cosh(k r)`` and
    ``sinh(k r)``, so every solution of ``y'' - k^2 y = const`` gives the
    constant up to rounding; for other smooth ``y`` the error is O(h^2).
    """
    r = np.asarray(r, float)
    y = np.asarray(y, float)
    h0 = k * (r[1:-1] - r[:-2])
    h1 = k * (r[2:] - r[1:-1])
    k2 = k * k
    g = k2 / (np.sinh(h1) * np.tanh(0.5 * h0) + 2.0 * np.sinh(0.5 * h1) ** 2)
    a = g * np.sinh(h1) / np.sinh(h0)
    b = -k2 - a - g
    return a * y[:-2] + b * y[1:-1] + g * y[2:]


def jump_mask(chi, margin=2):
    """True at grid points at least ``margin`` samples away from any jump of ``chi``."""
    chi = np.asarray(chi)
    keep = np.ones(chi.size, dtype=bool)
    jumps = np.flatnonzero(np.diff(chi) != 0)
    for j in jumps:
        # jump lies between j and j + 1
        lo = max(0, j - margin + 1)
        hi = min(chi.size, j + margin + 1)
        keep[lo:hi] = False
    return keep


def check_fundamental_inequality(a: ScalarProfile, chi: ScalarProfile, k, tol) -> dict:
    """Check ``a'' - k^2 a <= 2 pi chi`` away from the jumps of chi."""
    _check_shared(a, chi)
    r = a.grid
    if r.size < 3:
        raise ParameterError("need at least 3 grid points")
    resid = fitted_operator(r, a.values, k) - 2 * math.pi * chi.values[1:-1]
    keep = jump_mask(chi.values)[1:-1]
    if keep.any():
        worst = float(resid[keep].max())
        at = float(r[1:-1][keep][int(np.argmax(resid[keep]))])
    else:
        worst, at = -math.inf, math.nan
    return {
        "residual": resid,
        "retained": int(keep.sum()),
        "max_violation": worst,
        "at_radius": at,
        "tol": float(tol),
        "passed": bool(worst <= tol),
    }
