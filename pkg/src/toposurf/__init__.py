"""Curvature comparison for metric balls on surfaces, Gromov hyperbolicity of
finite metric spaces, and quasihyperbolic geometry of plane domains."""

__version__ = "0.1.0"

from .comparison import (  # noqa: E402
    ComparisonParams,
    ParameterError,
    SurfaceClassSpec,
    classify_surface,
    collar_width,
    comparison_area,
    comparison_boundary_length,
    disk_distance,
    eps0,
    f_c,
    round_annulus_modulus,
    topology_bound,
)
from .kernels import BACKEND  # noqa: E402
from .mesh import MeshError, TriMesh  # noqa: E402

__all__ = [
    "BACKEND",
    "ComparisonParams",
    "MeshError",
    "ParameterError",
    "SurfaceClassSpec",
    "TriMesh",
    "classify_surface",
    "collar_width",
    "comparison_area",
    "comparison_boundary_length",
    "disk_distance",
    "eps0",
    "f_c",
    "round_annulus_modulus",
    "topology_bound",
]
