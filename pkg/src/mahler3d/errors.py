"""Exception hierarchy shared by all modules."""


class MahlerError(Exception):
    """Base class for all errors raised by mahler3d."""


class DegenerateInput(MahlerError):
    """Point set is coplanar, collinear or otherwise not full-dimensional."""


class InvalidPolytope(MahlerError):
    """A polytope failed structural validation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems) or "invalid polytope")


class DegeneratePolytope(MahlerError):
    """Vertices of a polytope do not affinely span 3-space."""


class CenterNotInterior(MahlerError):
    """Polar center is not strictly inside the polytope."""


class NonConvergence(MahlerError):
    """Santalo solver did not reach its residual tolerance."""


class NotAdmissible(MahlerError):
    """Speed vector violates the per-facet affine constraints."""

    def __init__(self, facets, message=None):
        self.facets = list(facets)
        if message is None:
            message = "speed is not admissible on facets " + ", ".join(map(str, self.facets))
        super().__init__(message)


class ParallelFacet(MahlerError):
    """Facet is parallel to the motion direction and has no affine speed extension."""


class PreconditionUnmet(MahlerError):
    """Input does not satisfy an operation's precondition."""


class OffParseError(MahlerError):
    """Malformed OFF file."""
