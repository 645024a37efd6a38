"""Space-allocation and angle-norm classification for few-shot
class-incremental learning, with a synthetic desk-scale benchmark harness.

The library splits into geometry primitives, an orthonormal center bank
with minimum-cost class allocation, the cosine center loss and its
hand-derived gradients, a small feature extractor trained by hand-coded
backpropagation, inference-time classifiers (nearest class mean, its
two-stage variant, and the angle-norm joint rule), and a session-protocol
harness with a deterministic CLI.
"""

from .center_loss import (
    CenterUpdateSchedule,
    LossWeights,
    center_momentum_update,
    pull_loss,
    pull_loss_descent,
    push_loss,
    push_loss_grad,
)
from .centers import (
    CenterBank,
    CostMatrix,
    assign_base_session,
    assign_incremental_session,
    build_cost_matrix,
    generate_orthonormal_centers,
)
from .classifier import (
    JointLogits,
    NormModel,
    RepresentativeSet,
    fit_norm_model,
    joint_predict,
    ncm_fit,
    ncm_predict,
    norm_logit,
    normal_tail,
    two_stage_fit,
)
from .experiment import (
    ABLATION_GRID,
    BASELINE,
    SAAN_FULL,
    ExperimentResult,
    MethodFlags,
    MetricsReport,
    ModelSpec,
    compute_metrics,
    method_from_name,
    run_experiment,
    standard_benchmark,
)
from .geometry import cosine_similarity, log_norm, mean_of_normalized, normalize
from .hungarian import minimum_cost_assignment
from .model import (
    LinearHead,
    TrainConfig,
    TwoLayerExtractor,
    backprop_step,
    cross_entropy,
    finetune_incremental,
    init_extractor,
    init_head,
    train_base_session,
)
from .synthetic import (
    FscilDataset,
    GeneratorConfig,
    ScenarioConfig,
    SessionSpec,
    generate_synthetic,
    sample_open_ended_sessions,
)

__version__ = "0.1.0"

__all__ = [
    "ABLATION_GRID",
    "BASELINE",
    "CenterBank",
    "CenterUpdateSchedule",
    "CostMatrix",
    "ExperimentResult",
    "FscilDataset",
    "GeneratorConfig",
    "JointLogits",
    "LinearHead",
    "LossWeights",
    "MethodFlags",
    "MetricsReport",
    "ModelSpec",
    "NormModel",
    "RepresentativeSet",
    "SAAN_FULL",
    "ScenarioConfig",
    "SessionSpec",
    "TrainConfig",
    "TwoLayerExtractor",
    "assign_base_session",
    "assign_incremental_session",
    "backprop_step",
    "build_cost_matrix",
    "center_momentum_update",
    "compute_metrics",
    "cosine_similarity",
    "cross_entropy",
    "finetune_incremental",
    "fit_norm_model",
    "generate_orthonormal_centers",
    "generate_synthetic",
    "init_extractor",
    "init_head",
    "joint_predict",
    "log_norm",
    "mean_of_normalized",
    "method_from_name",
    "minimum_cost_assignment",
    "ncm_fit",
    "ncm_predict",
    "norm_logit",
    "normal_tail",
    "normalize",
    "pull_loss",
    "pull_loss_descent",
    "push_loss",
    "push_loss_grad",
    "run_experiment",
    "sample_open_ended_sessions",
    "standard_benchmark",
    "train_base_session",
    "two_stage_fit",
]
