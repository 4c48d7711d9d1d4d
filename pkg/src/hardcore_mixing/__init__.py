"""Hard-core Glauber dynamics on regular bipartite graphs, desk scale.

Exact enumeration of weighted independent sets, the single-site chain with
conductance/mixing analysis, covering/degree-algorithm approximations with
their counting and reconstruction bounds, and a scalar inequality suite.
"""

__version__ = "0.1.0"

from .errors import (
    CapExceededError,
    ConfigError,
    HardcoreError,
    InvalidParameterError,
    IterationBudgetError,
    MixedParityError,
    PreconditionError,
)
from .graphs import (
    BipartiteGraph,
    VertexSet,
    bipartite_expansion_constant,
    build_even_torus,
    build_hypercube,
    closure,
    export_graph_text,
    hypercube_delta_lower_bound,
    import_graph_text,
    is_small,
    neighborhood,
    parse_graph_spec,
)
from .hardcore import (
    EnumerationSummary,
    HardCoreModel,
    RegionTag,
    alpha,
    beta,
    classify,
    count_independent_sets,
    enumerate_independent_sets,
    gamma_of_lambda,
    is_independent,
    partition_function,
    region_weight,
    region_weights,
    weight,
)
from .glauber import (
    ChainAnalysis,
    GlauberChain,
    bottleneck_conductance_bound,
    build_chain_analysis,
    chain_conductance_exact,
    conductance_lower_bound_on_mixing,
    conductance_of_set,
    escape_time_experiment,
    glauber_step,
    mixing_time_exact,
    spectral_gap,
    transition_probability,
)
from .containers import (
    CoveringApprox,
    DegreeAlgorithmTrace,
    FamilyKey,
    PsiApprox,
    claim2_output_count_bound,
    covering_approximation,
    degree_algorithm,
    enumerate_family,
    family_weight,
    lovasz_stein_cover,
    psi_gamma_theorem_choice,
    reconstruction_weight_bound,
    theorem2_bound_check,
    verify_psi_approximation,
)
from .bounds import (
    BoundReport,
    binary_entropy,
    check_alpha_log_alpha,
    check_binomial_sum_asymptotic,
    check_entropy_sandwich,
    chernoff_binomial_sum_bound,
    condition_check,
    corollary_hypercube_regimes,
    theorem1_lower_bound,
    theorem2_exponent_pipeline,
    trivial_region_bound_chain,
)
