"""Poincare-ball embeddings of trees with capacity-aware training."""

from .capacity import (
    CapacityEstimate,
    CapacityOffender,
    capacity_check,
    capacity_lower_bound,
    capacity_upper_bound,
    estimate_capacity,
    node_radius,
    packing_angle,
)
from .errors import HypertreeError, InputError, TrainingError, ValidationError
from .evaluation import (
    IllnessReport,
    MetricsReport,
    classify_illness,
    infer_target,
    map_score,
    mean_rank,
    metrics_report,
    rank_set,
)
from .geometry import (
    InversionParams,
    apply_inversion,
    dilate,
    distance_gradient,
    hyperbolic_norm,
    inversion_to_origin,
    poincare_distance,
    project_to_ball,
    riemannian_rescale,
)
from .graph import (
    HierarchyGraph,
    generate_balanced_tree,
    load_edge_list,
    nearest_common_ancestor,
    transitive_closure,
    validate_tree,
)
from .sampling import Batch, make_batches, sample_negatives
from .training import (
    EmbeddingTable,
    TrainConfig,
    TrainTrace,
    apply_dilation,
    edge_loss,
    load_checkpoint,
    save_checkpoint,
    sgd_step,
    total_loss,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
