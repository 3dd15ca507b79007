"""Local instruction-set model and GHZ predictions for three-photon x/y experiments."""
from .polarization import (
    Basis,
    InstructionSet,
    MeasurementContext,
    Outcome,
    ParseError,
    PolValue,
    all_contexts,
    all_instruction_sets,
    outcome_of,
    outcome_product,
    parse_context,
    parse_outcome,
)
from .lhv import (
    ModelDistribution,
    OutcomeDistribution,
    TableConstraints,
    UniformTable,
    canonical_model,
    canonical_table,
    h1_constraints,
    outcome_distribution,
    pair_marginal,
    pan_lr_admissible_sets,
    search_tables,
    single_marginal,
    verify_table,
)
from .qm import analyzer_vector, expectation_product, ghz_state, qm_outcome_distribution
from .stats import (
    ExperimentRecord,
    aggregate_fraction,
    compare_models,
    ingest_records,
    monte_carlo_sample,
    total_variation,
)
from .lp import (
    fit_distribution,
    max_linear_functional,
    mermin_value,
    mermin_weights,
    model_expectation,
)

__version__ = "0.1.0"
