"""Exception hierarchy.

Every error carries a stable ``code`` (used for CLI exit codes and the
structured error JSON) and the ``module`` it was raised from.
"""
from __future__ import annotations

from typing import Any


class OrbitopeLabError(Exception):
    code = "internal"
    module = "orbitope_lab"
    exit_code = 10

    def __init__(self, message: str, *, module: str | None = None, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context
        if module is not None:  # shared error types report where they were raised
            self.module = module

    def to_dict(self) -> dict[str, Any]:
        return {
            "code": self.code,
            "module": self.module,
            "message": self.message,
            "context": self.context,
        }


# numeric-core
class SymmetryViolationError(OrbitopeLabError):
    code, module, exit_code = "symmetry-violation", "numeric", 3


class NotPSDError(OrbitopeLabError):
    code, module, exit_code = "not-psd", "numeric", 3


class DecompositionError(OrbitopeLabError):
    code, module, exit_code = "decomposition", "numeric", 3


class ScaledComputationError(OrbitopeLabError):
    code, module, exit_code = "scaled-computation", "numeric", 3


# group-model
class ConfigurationError(OrbitopeLabError):
    code, module, exit_code = "configuration", "groups", 2


class ModelMembershipError(OrbitopeLabError):
    code, module, exit_code = "model-membership", "groups", 3


class SubspaceError(OrbitopeLabError):
    code, module, exit_code = "subspace", "groups", 3


class ChamberError(OrbitopeLabError):
    code, module, exit_code = "chamber", "groups", 3


class PreconditionError(OrbitopeLabError):
    code, module, exit_code = "precondition", "groups", 3


# representation
class ParseError(OrbitopeLabError):
    code, module, exit_code = "parse", "representation", 2


class IrreducibilityError(OrbitopeLabError):
    code, module, exit_code = "irreducible", "representation", 3


class AmbiguityError(OrbitopeLabError):
    code, module, exit_code = "ambiguity", "representation", 3


# orbitope-faces
class UnsupportedDimensionError(OrbitopeLabError):
    code, module, exit_code = "unsupported-dimension", "faces", 3


class ConstructionError(OrbitopeLabError):
    code, module, exit_code = "construction", "faces", 3


# satake-boundary
class NotBoundaryPointError(OrbitopeLabError):
    code, module, exit_code = "not-a-boundary-point", "satake", 3


class UnclassifiedLimitError(OrbitopeLabError):
    code, module, exit_code = "unclassified", "satake", 3


class IndeterminacyError(OrbitopeLabError):
    code, module, exit_code = "indeterminacy", "satake", 3


# bly-furstenberg
class EvaluationError(OrbitopeLabError):
    code, module, exit_code = "evaluation", "bly", 4


class MassLossError(OrbitopeLabError):
    code, module, exit_code = "mass-loss", "bly", 4


class SolverError(OrbitopeLabError):
    code, module, exit_code = "solver", "bly", 4


# eigen-estimates
class MeshError(OrbitopeLabError):
    code, module, exit_code = "mesh", "eigen", 5


# cli / io
class ConfigError(ParseError):
    code, module, exit_code = "config", "cli", 2
