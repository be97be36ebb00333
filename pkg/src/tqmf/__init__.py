"""Exact computations around the Weierstrass Hopf algebroid: Ext via the cobar
complex, the b2..Delta identities, the descent spectral sequence and q-expansions."""
from .cobar import CobarComplex, ExtTable, cocycle_class, ext_group, ext_table
from .hopf import (
    ComodulePresentation,
    HopfAlgebroidPresentation,
    PresentationError,
    builtin,
    load_presentation,
    presentation_from_config,
)
from .linalg import (
    AbelianGroupPresentation,
    IntMatrix,
    Limits,
    ResourceLimitExceeded,
    cohomology_at,
    invariant_factors,
    smith_normal_form,
)
from .poly import GradedPolynomial, RingSpec, parse_polynomial
from .quasimodular import b2_q_expansion, h0_presentation_check, named_elements, verify_identities

__version__ = "0.1.0"

__all__ = [
    "AbelianGroupPresentation",
    "CobarComplex",
    "ComodulePresentation",
    "ExtTable",
    "GradedPolynomial",
    "HopfAlgebroidPresentation",
    "IntMatrix",
    "Limits",
    "PresentationError",
    "ResourceLimitExceeded",
    "RingSpec",
    "b2_q_expansion",
    "builtin",
    "cocycle_class",
    "cohomology_at",
    "ext_group",
    "ext_table",
    "h0_presentation_check",
    "invariant_factors",
    "load_presentation",
    "named_elements",
    "parse_polynomial",
    "presentation_from_config",
    "smith_normal_form",
    "verify_identities",
]
