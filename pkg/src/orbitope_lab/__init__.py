"""Numerical lab for gradient maps of real reductive groups on projective space."""
from .errors import OrbitopeLabError
from .groups import GroupModel, build_model
from .numeric import DEFAULT_TOL, ProjectivePoint, ToleranceProfile
from .representation import Representation, build_representation

__version__ = "0.1.0"

__all__ = [
    "OrbitopeLabError", "GroupModel", "build_model", "DEFAULT_TOL", "ProjectivePoint",
    "ToleranceProfile", "Representation", "build_representation", "__version__",
]
