"""Exact verification of orthogonal product-state sets: orthogonality, local
redundancy, discrimination protocols, unextendibility and irreducibility
certificates, all over the rationals."""

__version__ = "0.1.0"

from .exactla import RMatrix, kernel_basis, rank
from .hilbert import PartySpec, ProductState, StructuralError, ket
from .statesets import StateSet, build_named, check_orthogonality
from .measurements import Measurement, apply_outcome, check_completeness, is_orthogonality_preserving
from .protocols import Leaf, Node, simulate
from .nonlocality import (
    certify_grouping,
    certify_strong_irreducibility,
    check_local_redundancy,
    check_upb,
    opm_solution_dims,
)
from .activation import match_sets, verify_theorem1, verify_theorem2, verify_theorem3, verify_theorem4

__all__ = [
    "RMatrix", "kernel_basis", "rank",
    "PartySpec", "ProductState", "StructuralError", "ket",
    "StateSet", "build_named", "check_orthogonality",
    "Measurement", "apply_outcome", "check_completeness", "is_orthogonality_preserving",
    "Leaf", "Node", "simulate",
    "certify_grouping", "certify_strong_irreducibility", "check_local_redundancy", "check_upb",
    "opm_solution_dims",
    "match_sets", "verify_theorem1", "verify_theorem2", "verify_theorem3", "verify_theorem4",
]
