"""Sensitivity analysis for monomial probabilistic models and staged trees."""

from .covariation import (
    InfeasibleVariation,
    Linear,
    Proportional,
    Target,
    Uniform,
    apply_scheme,
    feasible_interval,
    make_target,
    parse_scheme,
    scheme_as_linear,
    validate_linear,
)
from .divergence import (
    CHI2,
    INVERSE_KL,
    KL,
    TOTAL_VARIATION,
    ConditionError,
    DivergenceReport,
    PhiFunction,
    cd_corollary4,
    cd_distance_block,
    cd_distance_full,
    check_cor4_condition,
    divergence_sweep,
    phi_divergence_block,
    phi_divergence_full,
)
from .model import (
    ModelError,
    MonomialModel,
    atomic_probability,
    block_exponent_sum,
    dumps_model,
    event_probability,
    is_multilinear,
    loads_model,
    support_split,
)
from .optimality import OptimalityVerdict, oracle_varied_distribution, search_schemes
from .sensitivity import (
    RationalSensitivity,
    SensitivityPolynomial,
    conditional_sensitivity,
    default_grid,
    degree_bound,
    sensitivity_polynomial,
    sensitivity_value,
    sweep,
)
from .tree import (
    ParseError,
    StagedTree,
    TreeError,
    compile_to_mm,
    parse_tree,
    serialize_tree,
    validate_tree,
)
from .fixtures import load_fixture

__version__ = "0.1.0"
