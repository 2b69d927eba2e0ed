"""Command-line scenarios.

Configs are INI-style blocks of ``key = value`` lines.  The ``[experiment]``
block names the scenario inputs; other blocks are referenced by name, for
example ``surface = disk`` points at a ``[disk]`` block holding a build
spec.  Every scenario writes JSON/CSV artifacts to ``--out`` and exits 0
iff all of its checks pass.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .balls import ball_profile, boundary_clearance, check_profile_inequality, scan_topology_bound
from .builders import BuildSpec, build, build_pair, flat_torus
from .comparison import ComparisonParams, comparison_area, comparison_boundary_length
from .domains import (
    PlaneDomain,
    check_length_ratio_punctured,
    check_minlen_bound,
    quasihyperbolic_distance,
    uniformly_perfect_constant,
)
from .geodesic import distance_field, geodesic_distances
from .gromov import DecompositionSpec, FiniteMetric, delta_four_point, validate_tree_decomposition
from .separation import SeparationSpec, annular_neighbourhood, estimate_D_star, validate_uniform_separation

SCENARIOS = ("build", "ball-profile", "delta", "tree-decomp", "separation", "dstar", "s-vs-sstar", "domain")


EXERCISES = {
    "build": "surface construction and mesh validity",
    "ball-profile": "ball length and area comparison, the area inequality and the ball topology bound",
    "delta": "four-point Gromov hyperbolicity of a finite metric",
    "tree-decomp": "tree decomposition of a glued surface into pieces",
    "separation": "uniform separation of removed sets",
    "dstar": "handle distance across neighbourhoods of removed sets",
    "s-vs-sstar": "hyperbolicity of a surface before and after removing separated sets",
    "domain": "quasihyperbolic length bound, uniform perfectness and the punctured-disk length ratio",
}


class ConfigError(Exception):
    pass


# ----------------------------------------------------------------------
# output helpers


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _write(out, name, text):
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, name), "w", newline="\n") as fh:
        fh.write(text)


# ----------------------------------------------------------------------
# config access


class Config:
    def __init__(self, parser: configparser.ConfigParser, base_dir: str):
        self.p = parser
        self.base = base_dir

    @classmethod
    def load(cls, path):
        p = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        p.optionxform = str  # keep key case (L, N)
        try:
            with open(path) as fh:
                p.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls(p, os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_text(cls, text, base_dir="."):
        p = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        p.optionxform = str
        p.read_string(text)
        return cls(p, base_dir)

    def block(self, name) -> dict:
        if not self.p.has_section(name):
            raise ConfigError(f"missing block [{name}]")
        return dict(self.p.items(name))

    def exp(self) -> dict:
        return self.block("experiment")

    def ref(self, key) -> dict:
        e = self.exp()
        if key not in e:
            raise ConfigError(f"[experiment] needs '{key}'")
        return self.block(e[key])

    def path(self, rel):
        return rel if os.path.isabs(rel) else os.path.join(self.base, rel)


def _get(d, key, conv=float, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing key '{key}'")
        return default
    try:
        return conv(d[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}': {d[key]!r}") from exc


def _surface(block: dict):
    """Build the mesh described by a surface block (a BuildSpec or the torus fixture)."""
    if block.get("kind") == "flat_torus":
        return flat_torus(_get(block, "a"), _get(block, "b"), _get(block, "h", default=0.2)).validate()
    try:
        return build(BuildSpec.from_mapping(block))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad build block: {exc}") from exc


def _basepoint(mesh, exp):
    lab = exp.get("basepoint", "center")
    if lab.isdigit():
        return int(lab)
    if lab not in mesh.labels:
        raise ConfigError(f"basepoint label {lab!r} not on the mesh")
    return int(mesh.labels[lab][0])


# ----------------------------------------------------------------------
# scenarios


def run_build(cfg, out, args):
    mesh = _surface(cfg.ref("surface"))
    _write(out, "mesh.trimesh", mesh.to_text())
    rep = {
        "scenario": "build",
        "vertices": mesh.n_vertices,
        "triangles": mesh.n_triangles,
        "edges": len(mesh.edges),
        "euler_characteristic": mesh.euler_characteristic(),
        "boundary_loops": len(mesh.boundary_loops()),
        "max_edge_length": float(mesh.lengths.max()),
        "labels": sorted(mesh.labels),
    }
    return rep, []


def run_ball_profile(cfg, out, args):
    exp = cfg.exp()
    mesh = _surface(cfg.ref("surface"))
    field = distance_field(mesh, _basepoint(mesh, exp))
    count = _get(exp, "radii", int, 60)
    clearance = boundary_clearance(mesh, field)
    # stay a margin away from the boundary, where the outer ring distorts l(r)
    r_max = _get(exp, "r_max", float, min(clearance * 5 / 6, float(field.dist.max())))
    radii = np.linspace(r_max / count, r_max, count)
    prof = ball_profile(mesh, field, radii)
    _write(out, "profile.csv", prof.to_csv())
    k = _get(exp, "k", float, 1.0)
    mesh_tol = args.tol if args.tol is not None else _get(exp, "mesh_tol", float, 0.05)
    ell_bar = np.array([comparison_boundary_length(k, r) for r in radii])
    a_bar = np.array([comparison_area(k, r) for r in radii])
    length_ok = bool(np.all(prof.boundary_length <= ell_bar * (1 + mesh_tol)))
    area_ok = bool(np.all(prof.area <= a_bar * (1 + mesh_tol)))
    fund = check_profile_inequality(prof, k)
    params = ComparisonParams(k, _get(exp, "c", float, 1.0), _get(exp, "r0", float, 1.0))
    top = scan_topology_bound(mesh, field, params)
    reports = {
        "ball_length": {"passed": length_ok, "max_ratio": float(np.max(prof.boundary_length / ell_bar)), "mesh_tol": mesh_tol},
        "ball_area": {"passed": area_ok, "max_ratio": float(np.max(prof.area / a_bar)), "mesh_tol": mesh_tol},
        "fundamental": {k2: v for k2, v in fund.items() if k2 != "residual"},
        "topology_estimate": top,
    }
    fails = [name for name, r in reports.items() if not r["passed"]]
    rep = {"scenario": "ball-profile", "vertices": mesh.n_vertices, "radii": count, "r_max": r_max, "reports": reports}
    return rep, fails


def _random_tree_metric(n, rng):
    parent = [int(rng.integers(0, i)) for i in range(1, n)]
    # dyadic lengths keep every path sum exact
    w = np.round(rng.uniform(0.1, 10.0, n - 1) * 2**20) / 2**20
    return FiniteMetric.from_graph(n, np.c_[np.arange(1, n), parent], w)


def run_delta(cfg, out, args):
    exp = cfg.exp()
    rng = np.random.default_rng(args.seed)
    if "metric" in exp:
        try:
            M = FiniteMetric.read(cfg.path(exp["metric"]))
        except OSError as exc:
            raise ConfigError(f"cannot read metric: {exc}") from exc
    elif "tree_nodes" in exp:
        M = _random_tree_metric(_get(exp, "tree_nodes", int), rng)
    elif "points" in exp:
        X = rng.random((_get(exp, "points", int), 2))
        M = FiniteMetric(np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1)))
    else:
        raise ConfigError("[experiment] needs 'metric', 'tree_nodes' or 'points'")
    mode = exp.get("mode", "auto")
    rep = delta_four_point(M, mode, budget=_get(exp, "budget", int, 10**7), seed=args.seed, threads=args.threads)
    _write(out, "delta.json", rep.to_json() + "\n")
    fails = []
    if rep.delta > M.diameter():
        fails.append("delta exceeds diameter")
    expect = exp.get("expect_delta")
    if expect is not None and rep.delta != float(expect):
        fails.append(f"delta {rep.delta!r} differs from expected {expect}")
    return {"scenario": "delta", "n": M.n, "diameter": M.diameter(), **json.loads(rep.to_json())}, fails


def run_tree_decomp(cfg, out, args):
    exp = cfg.exp()
    mesh = _surface(cfg.ref("surface"))
    names = sorted((k for k in mesh.labels if k.startswith("piece")), key=lambda s: int(s[5:]))
    if not names:
        raise ConfigError("surface has no piece labels")
    spec = DecompositionSpec([mesh.labels[k] for k in names], _get(exp, "k_claimed", float, math.inf), names)
    rep = validate_tree_decomposition(spec, mesh, seed=args.seed)
    return {"scenario": "tree-decomp", "pieces": len(names), **rep}, ([] if rep["valid"] else rep["reasons"])


def _separation_spec(cfg, exp):
    block = cfg.ref("surface")
    if block.get("kind") == "flat_torus":
        mesh = _surface(block)
        x, y = mesh.coords[:, 0], mesh.coords[:, 1]
        cx, cy, rad = (float(v) for v in block.get("hole", "2 2 0.3").split())
        x0, x1 = (float(v) for v in block.get("band", "1 3").split())
        E = [np.flatnonzero(np.hypot(x - cx, y - cy) < rad)]
        V = [np.flatnonzero((x >= x0) & (x <= x1))]
    else:
        S, _ = build_pair(BuildSpec.from_mapping(block))
        mesh = S
        names = sorted((k for k in S.labels if k.startswith("E")), key=lambda s: int(s[1:]))
        E = [S.labels[k] for k in names]
        width = _get(exp, "width", float, 0.5)
        V = [annular_neighbourhood(S, e, width) for e in E]
    return SeparationSpec(
        mesh, E, V, _get(exp, "r", float, 0.0), _get(exp, "s", float, math.inf), _get(exp, "N", int, 1)
    )


def run_separation(cfg, out, args):
    spec = _separation_spec(cfg, cfg.exp())
    rep = validate_uniform_separation(spec)
    fails = [k for k, v in rep["checks"].items() if not v["passed"]]
    return {"scenario": "separation", **rep}, fails


def run_dstar(cfg, out, args):
    exp = cfg.exp()
    spec = _separation_spec(cfg, exp)
    rep = estimate_D_star(spec)
    fails = []
    if "expect_D_star" in exp and rep["D_star"] != float(exp["expect_D_star"]):
        fails.append(f"D_star {rep['D_star']!r} differs from expected {exp['expect_D_star']}")
    if _get(exp, "require_finite", int, 0) and rep["infinite"]:
        fails.append("D_star is infinite")
    return {"scenario": "dstar", **rep}, fails


def _sampled_metric(mesh, verts):
    rows = np.array([geodesic_distances(mesh, [v])[verts] for v in verts])
    return FiniteMetric.from_samples(rows)


def run_s_vs_sstar(cfg, out, args):
    exp = cfg.exp()
    block = cfg.ref("surface")
    S, Sstar = build_pair(BuildSpec.from_mapping(block))
    rng = np.random.default_rng(args.seed)
    m = _get(exp, "samples", int, 60)
    drop = np.unique(np.concatenate([S.labels[k] for k in S.labels if k.startswith("E")]))
    keep = np.setdiff1d(np.arange(S.n_vertices), drop)
    pick = np.sort(rng.choice(keep, size=min(m, keep.size), replace=False))
    new = -np.ones(S.n_vertices, dtype=np.int64)
    new[keep] = np.arange(keep.size)
    budget = _get(exp, "budget", int, 200000)
    dS = delta_four_point(_sampled_metric(S, pick), "sampled", budget, args.seed, args.threads)
    dT = delta_four_point(_sampled_metric(Sstar, new[pick]), "sampled", budget, args.seed, args.threads)
    spec = _separation_spec(cfg, exp)
    sep = validate_uniform_separation(spec)
    dstar = estimate_D_star(spec)
    rep = {
        "scenario": "s-vs-sstar",
        "delta_S": json.loads(dS.to_json()),
        "delta_S_star": json.loads(dT.to_json()),
        "separation": sep,
        "D_star": dstar,
    }
    fails = [k for k, v in sep["checks"].items() if not v["passed"]]
    if dstar["infinite"]:
        fails.append("D_star is infinite")
    return rep, fails


def _domain(block):
    outer = block.get("outer", "1")
    R = None if outer.strip() == "plane" else float(outer)
    holes = []
    for chunk in block.get("holes", "").split(";"):
        if chunk.strip():
            x, y, r = (float(v) for v in chunk.replace(",", " ").split())
            holes.append((complex(x, y), r))
    try:
        return PlaneDomain(R, holes, _get(block, "grid", int, 256))
    except ValueError as exc:
        raise ConfigError(f"bad domain block: {exc}") from exc


def _random_polyline(dom, rng, nseg=4, tries=200):
    R = dom.outer_radius or 1.0
    for _ in range(tries):
        pts = [complex(*rng.uniform(-R, R, 2))]
        if dom.delta(pts[0]) <= 0:
            continue
        ok = True
        for _ in range(nseg):
            q = pts[-1] + complex(*rng.normal(0, 0.2 * R, 2))
            if not dom.segment_inside(pts[-1], q):
                ok = False
                break
            pts.append(q)
        if ok:
            return np.array(pts)
    raise ConfigError("could not sample a polyline inside the domain")


def run_domain(cfg, out, args):
    exp = cfg.exp()
    dom = _domain(cfg.ref("domain"))
    rng = np.random.default_rng(args.seed)
    rep = {"scenario": "domain"}
    fails = []
    if len(dom.holes) + (dom.outer_radius is not None) >= 2:
        rep["uniformly_perfect"] = uniformly_perfect_constant(dom)
    npoly = _get(exp, "polylines", int, 100)
    worst = math.inf
    bad = 0
    for _ in range(npoly):
        r = check_minlen_bound(dom, _random_polyline(dom, rng))
        worst = min(worst, r["qh_length"] - r["bound"])
        bad += not r["passed"]
    rep["minlen"] = {"polylines": npoly, "failures": bad, "min_margin": worst}
    if bad:
        fails.append("minlen")
    if "z" in exp and "w" in exp:
        z = complex(*(float(v) for v in exp["z"].split()))
        w = complex(*(float(v) for v in exp["w"].split()))
        rep["qh_distance"] = {"z": [z.real, z.imag], "w": [w.real, w.imag], "value": quasihyperbolic_distance(dom, z, w)}
    rhos = [float(v) for v in exp.get("rho", "0.1 0.5 0.99").split()]
    ratios = [check_length_ratio_punctured(r) for r in rhos]
    rep["length_ratio"] = ratios
    if not all(r["passed"] for r in ratios):
        fails.append("length_ratio")
    return rep, fails


RUNNERS = {
    "build": run_build,
    "ball-profile": run_ball_profile,
    "delta": run_delta,
    "tree-decomp": run_tree_decomp,
    "separation": run_separation,
    "dstar": run_dstar,
    "s-vs-sstar": run_s_vs_sstar,
    "domain": run_domain,
}


# built-in configs for verify-all (small, fast instances)
VERIFY_CONFIGS = {
    "build": "[experiment]\nsurface = pants\n[pants]\nkind = pants_tree\ndepth = 1\nh = 0.2\n",
    "ball-profile": "[experiment]\nsurface = disk\n[disk]\nkind = hyperbolic_disk\nradius = 3\nh = 0.1\n",
    "delta": "[experiment]\ntree_nodes = 120\nexpect_delta = 0\n",
    "tree-decomp": "[experiment]\nsurface = pants\nk_claimed = 10\n[pants]\nkind = pants_tree\ndepth = 1\nh = 0.25\n",
    "separation": (
        "[experiment]\nsurface = holes\nwidth = 0.4\nr = 0.2\ns = 10\nN = 1\n"
        "[holes]\nkind = disk_minus_disks\nradius = 3\nh = 0.15\nholes = 1 0 0.3; 1.5 3.14159 0.4\n"
    ),
    "dstar": (
        "[experiment]\nsurface = torus\nrequire_finite = 1\n"
        "[torus]\nkind = flat_torus\na = 4\nb = 4\nh = 0.25\nhole = 2 2 0.3\nband = 1 3\n"
    ),
    "s-vs-sstar": (
        "[experiment]\nsurface = holes\nwidth = 0.4\nr = 0.2\ns = 10\nN = 1\nsamples = 40\nbudget = 50000\n"
        "[holes]\nkind = disk_minus_disks\nradius = 3\nh = 0.15\nholes = 1 0 0.3; 1.5 3.14159 0.4\n"
    ),
    "domain": (
        "[experiment]\ndomain = D\npolylines = 50\nz = 0 0\nw = 0.5 0\n"
        "[D]\nouter = 1\nholes = 0.5 0.5 0.1; -0.5 0 0.2\ngrid = 64\n"
    ),
}


def _run_one(name, cfg, out, args) -> int:
    try:
        rep, fails = RUNNERS[name](cfg, out, args)
    except ConfigError as exc:
        _write(out, "failure.json", dumps({"scenario": name, "status": "error", "failures": [str(exc)]}))
        sys.stdout.write(dumps({"scenario": name, "status": "error", "failures": [str(exc)]}))
        return 2
    rep = {"scenario": name, "exercises": EXERCISES[name], **rep}
    rep["status"] = "pass" if not fails else "fail"
    rep["failures"] = fails
    rep["seed"] = args.seed
    _write(out, "report.json", dumps(rep))
    stale = os.path.join(out, "failure.json")
    if not fails and os.path.exists(stale):
        os.remove(stale)
    if fails:
        _write(out, "failure.json", dumps({"scenario": name, "status": "fail", "failures": fails}))
        sys.stdout.write(dumps({"scenario": name, "status": "fail", "failures": fails}))
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toposurf", description="Curvature comparison and hyperbolicity experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SCENARIOS + ("verify-all",):
        s = sub.add_parser(name)
        s.add_argument("--config", help="config file (required except for verify-all)")
        s.add_argument("--out", default="out", help="output directory")
        s.add_argument("--seed", type=int, default=None, help="random seed (overrides the config)")
        s.add_argument("--tol", type=float, default=None, help="mesh tolerance override")
        s.add_argument("--threads", type=int, default=None, help="worker threads for delta enumeration")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify-all":
        if args.seed is None:
            args.seed = 0
        status = {}
        for name, text in VERIFY_CONFIGS.items():
            status[name] = _run_one(name, Config.from_text(text), os.path.join(args.out, name), args)
        summary = {"scenarios": {k: ("pass" if v == 0 else "fail") for k, v in status.items()}}
        _write(args.out, "summary.json", dumps(summary))
        return 0 if all(v == 0 for v in status.values()) else 1
    if not args.config:
        err = {"scenario": args.command, "status": "error", "failures": ["--config is required"]}
        _write(args.out, "failure.json", dumps(err))
        sys.stdout.write(dumps(err))
        return 2
    try:
        cfg = Config.load(args.config)
        if args.seed is None:
            args.seed = _get(cfg.exp(), "seed", int, 0)
    except ConfigError as exc:
        err = {"scenario": args.command, "status": "error", "failures": [str(exc)]}
        _write(args.out, "failure.json", dumps(err))
        sys.stdout.write(dumps(err))
        return 2
    return _run_one(args.command, cfg, args.out, args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
