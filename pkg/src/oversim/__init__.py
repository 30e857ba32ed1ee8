"""Simulator for algorithmic decision-making under human oversight.

Fairness-regularized logistic scoring (the candidate algorithm), societal
value statistics, decision-override policies, robust max-min algorithm
selection, and the simulation experiments tying them together.
"""

__version__ = "0.1.0"

from .data import (
    Dataset,
    Partition,
    RawTable,
    SplitPair,
    binarize_target,
    bundled_housing_path,
    load_csv,
    load_housing,
    partition_by_attribute,
    split_train_test,
    standardize,
)
from .errors import (
    DimensionMismatch,
    EmptyPolicySet,
    EmptySide,
    EmptySubpopulation,
    InvalidParameters,
    MissingColumn,
    MissingContext,
    NonFiniteIterate,
    OversimError,
    ParseError,
    SingleClassData,
    ValidationError,
)
from .fairglm import (
    FairGlmModel,
    FitInfo,
    FitOptions,
    ValueWeights,
    as_weights,
    decide,
    decide_all,
    fit,
    load_model,
    objective_subgradient,
    objective_value,
    predict_score,
    save_model,
    scores,
    sensitive_covariances,
)
from .values import ValueReport, evaluate_F, rho_decision, rho_score, value_report
from .pdm import (
    AppliedDecisions,
    PdmPolicy,
    apply_epsilon_budget,
    apply_policy,
    apply_unconstrained,
    correct_random_gt,
    describe,
    deviation_fraction,
    epsilon_budget,
    identity_policy,
    local_refit,
    random_correct_gt,
    unconstrained,
)
from .selection import (
    CandidateSet,
    PolicySet,
    build_observation2_instance,
    naive_select,
    placeholder_dataset,
    robust_select,
)
from .experiments import (
    DegradationCurve,
    ExplanationContext,
    StrategyRow,
    StrategyTable,
    SweepResult,
    build_grid,
    degradation_curve,
    emit_explanation_report,
    local_strategies_table,
    weight_equivalence_sweep,
)
