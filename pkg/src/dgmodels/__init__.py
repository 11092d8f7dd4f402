"""Minimal models of dg modules over Sullivan algebras, and circle-action reports."""

from .cdga import (
    SullivanPresentation,
    parse_polynomial,
    trivial_algebra,
    verify_cdga,
)
from .circle import (
    BasicData,
    action_report,
    almost_free_model,
    dimc_relation,
    equivariant_les,
    equivariant_model,
    extension_of_scalars_check,
    formality_check,
    from_complexes,
    localization_check,
    model_of_fixed_set,
    model_of_total_space,
    naive_structure,
    poincare_relations,
    semifree_s3_models,
    shared_basis_check,
    smith_gysin_inequality,
)
from .dgmodule import (
    DgModuleMap,
    FreeDgModule,
    TabulatedDgModule,
    algebra_module,
    betti_table,
    cone,
    cone_les,
    free_cone,
    map_from_generator_images,
    module_cohomology,
    shift,
    tabulate,
    verify_dgmodule,
)
from .errors import (
    DegreeWindowError,
    InconclusiveWindowError,
    PreconditionError,
    ValidationError,
)
from .fixtures import FIXTURES, fixture
from .io import InputDocument, load_document, loads_document
from .minmodel import (
    lift_section,
    minimal_factorization,
    minimal_model,
    model_of_morphism,
    verify_minimal,
)

__version__ = "0.1.0"
