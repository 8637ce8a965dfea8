"""Machine teaching for kernel perceptrons.

Teachers construct provably minimal (linear, polynomial) or
epsilon-approximate (Gaussian) teaching sets; the ERM learner recovers the
target decision boundary from the set alone; the metrics module verifies
closeness and risk-gap guarantees.
"""

from .kernels import (
    ApproxConfig,
    FeatureVector,
    InfiniteDimensionError,
    KernelSpec,
    MultiIndex,
    choose_truncation,
    eval_kernel,
    feature_dim,
    kernel_matrix,
    multi_indices,
    poly_feature_map,
    taylor_tail_bound,
    truncated_gaussian_feature_map,
)
from .linalg import (
    GramMatrix,
    SingularMatrixError,
    extend_orthogonal_basis,
    gram_matrix,
    select_independent,
    solve_positive_definite,
)
from .teaching import TeachingSet
from .learner import (
    DualModel,
    FitNotConverged,
    LearnerConfig,
    PrimalModel,
    brute_force_fit,
    decision_value,
    fit,
    rkhs_norm,
    training_loss,
)
from .teacher import (
    AnchorSearchError,
    AssumptionReport,
    BoundarySampleError,
    SearchConfig,
    TeachingError,
    axis_power_sum_model,
    check_assumptions,
    closed_form_dual,
    gaussian_teaching_set,
    linear_teaching_set,
    polynomial_boundary_points,
    polynomial_teaching_set,
)
from .metrics import (
    RiskReport,
    direction_similarity,
    perceptron_risk,
    pointwise_gap,
    risk_gap,
    sign_agreement,
)
from .datasets import (
    CsvFormatError,
    Dataset,
    ReferenceFit,
    generate,
    load_csv,
    save_csv,
    train_reference,
)
from .estimator import KernelPerceptron

__version__ = "0.1.0"

__all__ = [
    "ApproxConfig", "FeatureVector", "InfiniteDimensionError", "KernelSpec",
    "MultiIndex", "choose_truncation", "eval_kernel", "feature_dim",
    "kernel_matrix", "multi_indices", "poly_feature_map", "taylor_tail_bound",
    "truncated_gaussian_feature_map",
    "GramMatrix", "SingularMatrixError", "extend_orthogonal_basis",
    "gram_matrix", "select_independent", "solve_positive_definite",
    "TeachingSet",
    "DualModel", "FitNotConverged", "LearnerConfig", "PrimalModel",
    "brute_force_fit", "decision_value", "fit", "rkhs_norm", "training_loss",
    "AnchorSearchError", "AssumptionReport", "BoundarySampleError",
    "SearchConfig", "TeachingError", "axis_power_sum_model",
    "check_assumptions", "closed_form_dual", "gaussian_teaching_set",
    "linear_teaching_set", "polynomial_boundary_points",
    "polynomial_teaching_set",
    "RiskReport", "direction_similarity", "perceptron_risk", "pointwise_gap",
    "risk_gap", "sign_agreement",
    "CsvFormatError", "Dataset", "ReferenceFit", "generate", "load_csv",
    "save_csv", "train_reference",
    "KernelPerceptron",
    "__version__",
]
