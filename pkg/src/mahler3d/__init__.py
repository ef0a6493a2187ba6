"""Volume products of 3-polytopes and shadow-system descent toward the tetrahedron."""

from ._kernels import BACKEND, HAVE_NUMBA
from .descent import DescentTrace, Side, Step, Termination, descend, normalize, random_polytope
from .errors import (CenterNotInterior, DegenerateInput, DegeneratePolytope, InvalidPolytope, MahlerError,
                     NonConvergence, NotAdmissible, OffParseError, ParallelFacet, PreconditionUnmet)
from .offio import format_off, parse_off, read_off, write_off
from .polar import (SantaloResult, is_interior, polar, polar_centroid, polar_volume, product_monotonicity_check,
                    santalo_point, santalo_polar, volume_product)
from .polytope import (SHAPES, FaceLattice, Polytope, centroid, facet_stats, hull, lattice_equal, shape, validate,
                       volume)
from .shadow import (SweepTrace, constancy_check, convexity_check, deform, normal_update, offset_update,
                     persistence_interval, sweep, volume_affine_residual)
from .speeds import (AdmissibleBasis, Alternative, SpeedAssignment, admissible_space, admissibility_violations,
                     combinatorial_alternative, dimension_bound_check, nontrivial_speed)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "HAVE_NUMBA", "SHAPES",
    "AdmissibleBasis", "Alternative", "CenterNotInterior", "DegenerateInput", "DegeneratePolytope",
    "DescentTrace", "FaceLattice", "InvalidPolytope", "MahlerError", "NonConvergence", "NotAdmissible",
    "OffParseError", "ParallelFacet", "Polytope", "PreconditionUnmet", "SantaloResult", "Side",
    "SpeedAssignment", "Step", "SweepTrace", "Termination",
    "admissibility_violations", "admissible_space", "centroid", "combinatorial_alternative", "constancy_check",
    "convexity_check", "deform", "descend", "dimension_bound_check", "facet_stats", "format_off", "hull",
    "is_interior", "lattice_equal", "nontrivial_speed", "normal_update", "normalize", "offset_update",
    "parse_off", "persistence_interval", "polar", "polar_centroid", "polar_volume",
    "product_monotonicity_check", "random_polytope", "read_off", "santalo_point", "santalo_polar", "shape",
    "sweep", "validate", "volume", "volume_affine_residual", "volume_product", "write_off",
]
