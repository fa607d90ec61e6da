"""Exact-arithmetic toolkit for solvable Lie algebras whose derived
algebras have codimension one or two: derivation algebras, first
cohomology, extensions, canonical forms up to proportional similarity, and
catalog-driven classification sweeps."""

from .exactla import (
    EigenStructure,
    IrreducibleFactorDegreeTooHigh,
    Matrix,
    QuadraticEigenvalue,
    RealIrrationalEigenvalues,
    Subspace,
    UnsupportedSpectrumError,
    char_poly,
    eigen_structure,
    frac,
    nullspace,
    real_jordan_form,
    rref,
    solve,
)
from .liealg import (
    Ideal,
    JacobiViolation,
    LieAlgebra,
    abelian,
    adjoint_matrix,
    bracket,
    center,
    derived_series,
    derived_subalgebra,
    direct_sum,
    filiform4,
    heisenberg3,
    is_nilpotent,
    is_solvable,
    lower_central_series,
    make_algebra,
    quotient,
    r_plus_heisenberg,
    restricted_adjoint,
)
from .deriv import (
    CohomologyClass,
    DerivationSpace,
    NotADerivation,
    derivation_space,
    induced_quotient_map,
    is_outer,
    project_to_h1,
)
from .ext import (
    ConditionDisagreement,
    ExtensionSpec,
    IsoWitness,
    LieCSpec,
    build_double_extension,
    check_codim1_condition,
    check_codim2_condition,
    extend_by_derivation,
    is_decomposable_double,
    lie_c_iso_check,
    verify_iso_witness_full,
    verify_weak_similarity_witness,
    witness_from_triple,
)
from .canon import (
    AmbiguousMatch,
    CanonicalForm,
    ExactScalar,
    FamilyTemplate,
    NoLegalPlacement,
    NoMatch,
    PlacementConstraints,
    family_match,
    proportional_normalize,
    proportional_similar,
)
from .classify import (
    CatalogEntry,
    ClassificationReport,
    Fingerprint,
    GoldenMismatch,
    GridSpec,
    catalog,
    classify_ext1,
    classify_ext2_ad,
    classify_extensions,
    distinctness_evidence,
    fingerprint,
)

__version__ = "0.1.0"
