"""Explicit diagonalisation of twisted periodic free-group automorphisms on the free skew-field."""

from __future__ import annotations

from .automorphism import TwistedAutomorphism, build_phi
from .diagonalizer import DiagonalBasis, DiagonalisationResult, PostCheckFailed, diagonalize
from .freegroup import FreeWord
from .grpalg import GroupAlgebraElement
from .nntree import NNTree, TreeValidationError, random_tree, validate_tree
from .ratexpr import RationalExpr, probable_equal
from .scalar import Coefficient
from .verifier import Twist, VerificationReport, VerifyConfig, load_twist, verify_all

__version__ = "0.1.0"

__all__ = [
    "Coefficient",
    "DiagonalBasis",
    "DiagonalisationResult",
    "FreeWord",
    "GroupAlgebraElement",
    "NNTree",
    "PostCheckFailed",
    "RationalExpr",
    "TreeValidationError",
    "Twist",
    "TwistedAutomorphism",
    "VerificationReport",
    "VerifyConfig",
    "build_phi",
    "diagonalize",
    "load_twist",
    "probable_equal",
    "random_tree",
    "validate_tree",
    "verify_all",
]
