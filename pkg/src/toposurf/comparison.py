"""Constant-curvature comparison quantities and explicit bounds.

Everything here is a closed form in a handful of real parameters: boundary
length and area of balls in the model plane of curvature ``-k**2``, the
topology bound for metric balls, collar widths, Poincare-disk distances,
round-annulus moduli, the ``eps0`` inversion used for the surrounding-curve
criterion, and the membership predicates for the surface classes
``F(a, l)`` and ``S(a, l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ParameterError(ValueError):
    """Raised when a closed form is evaluated outside its domain."""


def _positive(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise ParameterError(f"{name} must be finite and > 0, got {x!r}")
    return x


def _nonneg(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ParameterError(f"{name} must be finite and >= 0, got {x!r}")
    return x


@dataclass(frozen=True)
class ComparisonParams:
    """Curvature scale ``k``, slack ``c`` and base radius ``r0``."""

    k: float = 1.0
    c: float = 1.0
    r0: float = 1.0

    def __post_init__(self):
        _positive("k", self.k)
        _positive("c", self.c)
        _positive("r0", self.r0)

    @property
    def r_outer(self) -> float:
        """The far end ``r0 + c/k`` of the search window."""
        return self.r0 + self.c / self.k


def comparison_boundary_length(k: float, r: float) -> float:
    """Length ``(2 pi / k) sinh(k r)`` of a circle of radius r in curvature -k^2."""
    k = _positive("k", k)
    r = _nonneg("r", r)
    return 2.0 * math.pi / k * math.sinh(k * r)


def comparison_area(k: float, r: float) -> float:
    """Area ``(2 pi / k^2)(cosh(k r) - 1)`` of a disk of radius r in curvature -k^2."""
    k = _positive("k", k)
    r = _nonneg("r", r)
    # cosh(x) - 1 = 2 sinh(x/2)^2 keeps precision near r = 0
    return 2.0 * math.pi / (k * k) * 2.0 * math.sinh(0.5 * k * r) ** 2


def topology_bound(params: ComparisonParams, ell_outer: float) -> float:
    """Upper bound for the number of generators n(r') of some ball B(p, r').

    ``ell_outer`` is the boundary length measured at ``r0 + c/k``.  The raw
    real value is returned; a negative value means the measured length
    exceeds the model length, i.e. the curvature hypothesis is contradicted
    at mesh tolerance.
    """
    ell_outer = _nonneg("ell_outer", ell_outer)
    k, c, r0 = params.k, params.c, params.r0
    return (math.sinh(k * r0 + c) - k * ell_outer / (2.0 * math.pi)) / math.sinh(c)


def crude_topology_bound(params: ComparisonParams) -> float:
    """``sinh(k r0 + c) / sinh(c)``, the bound with the length term dropped."""
    return topology_bound(params, 0.0)


def collar_width(L: float) -> float:
    """Width ``d0`` of the standard collar, ``cosh d0 = coth(L/2)``."""
    if not (L > 0):
        raise ParameterError(f"geodesic length must be > 0, got {L!r}")
    if math.isinf(L):
        return 0.0
    x = 0.5 * L
    # arccosh(coth x) with coth x - 1 = 2 / expm1(2x) to avoid cancellation
    u = 2.0 / math.expm1(2.0 * x)
    return math.log1p(u + math.sqrt(u * (u + 2.0)))


def disk_distance(z: complex, w: complex) -> float:
    """Poincare distance in the unit disk for the metric ``2|dz|/(1-|z|^2)``."""
    z = complex(z)
    w = complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise ParameterError("points must lie in the open unit disk")
    num = abs(z - w)
    den = abs(1 - z.conjugate() * w)
    return 2.0 * math.atanh(num / den)


def round_annulus_modulus(R: float) -> float:
    """Modulus ``log(R) / 2 pi`` of ``{1 < |z - a| < R}``; ``R = inf`` gives inf."""
    R = float(R)
    if math.isnan(R) or R <= 1:
        raise ParameterError(f"outer radius ratio must be > 1, got {R!r}")
    if math.isinf(R):
        return math.inf
    return math.log(R) / (2.0 * math.pi)


def f_c(c: float, eps: float) -> float:
    """``2 tanh(eps/2) cosh^2((eps + c)/2)``, increasing in eps."""
    return 2.0 * math.tanh(0.5 * eps) * math.cosh(0.5 * (eps + c)) ** 2


def eps0_target(c: float, l: float, c1: float) -> float:
    """Right-hand side ``c / (exp(l/c1) - 1)`` that eps0 is mapped onto."""
    return c / math.expm1(l / c1)


def eps0(c: float, l: float, c1: float, atol: float = 1e-12) -> float:
    """Invert ``f_c`` at ``c / (exp(l/c1) - 1)`` by bisection.

    The bracket ``[0, hi]`` is grown by doubling until ``f_c(hi)`` exceeds
    the target; bisection then runs until the residual is within ``atol``
    or the bracket cannot be split further.
    """
    c = _positive("c", c)
    l = _positive("l", l)
    c1 = _positive("c1", c1)
    target = eps0_target(c, l, c1)
    if not math.isfinite(target) or target <= 0:
        raise ParameterError(f"target value {target!r} is not a finite positive number")
    tol = atol
    lo, hi = 0.0, 1.0
    while f_c(c, hi) < target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ParameterError("f_c inversion bracket diverged")
    while True:
        mid = 0.5 * (lo + hi)
        fm = f_c(c, mid)
        if abs(fm - target) <= tol or mid in (lo, hi):
            return mid
        if fm < target:
            lo = mid
        else:
            hi = mid


@dataclass
class SurfaceClassSpec:
    """Topological/metric summary of a genus-0 candidate for F(a,l) / S(a,l).

    ``outer_loop_lengths`` has one entry per outer loop (punctures are 0);
    ``n_outer`` is the count of outer loops plus punctures.
    """

    genus: int
    n_outer: int
    outer_loop_lengths: list = field(default_factory=list)
    boundary_length: float = 0.0
    a: int = 0
    l: float = 1.0

    def __post_init__(self):
        if self.genus < 0 or self.n_outer < 0 or self.a < 0:
            raise ParameterError("genus, n_outer and a must be non-negative")
        if any(x < 0 for x in self.outer_loop_lengths) or self.boundary_length < 0:
            raise ParameterError("lengths must be non-negative")
        _positive("l", self.l)
        if self.chi > 2:
            raise ParameterError("Euler characteristic exceeds 2")

    @property
    def chi(self) -> int:
        return 2 - 2 * self.genus - self.n_outer


def classify_surface(spec: SurfaceClassSpec) -> dict:
    """Membership of ``spec`` in F(a, l) and S(a, l).

    Returns ``{"in_F": bool, "in_S": bool, "chi": int}``.
    """
    chi = spec.chi
    lengths = list(spec.outer_loop_lengths)
    long_loops = sum(1 for x in lengths if x > spec.l)
    in_F = spec.genus == 0 and -spec.a <= chi <= 0
    if in_F:
        if chi == 0:
            in_F = long_loops == 0
        else:
            in_F = long_loops <= 1
    if in_F and spec.boundary_length > 0:
        in_F = spec.boundary_length <= spec.l
    in_S = in_F and long_loops == 0
    return {"in_F": in_F, "in_S": in_S, "chi": chi}
