"""Change point detection on snapshot sequences, split into local (per-community)
and global (contracted-network) scales."""

__version__ = "0.1.0"

from .community import PartitionResult, louvain_partition, modularity
from .detectors import DetectorConfig, ScoreSeries, deltacon_score, em_score, kl_divergence
from .evaluation import bench, detection_metrics, ndcg
from .framework import ChangeReport, repartition_on_global_change, run_hierarchical
from .generators import table1_bter, table1_sbm, table1_schedules
from .graph import (
    CommunityAssignment,
    DynamicNetwork,
    Snapshot,
    ValidationError,
    contract,
    normalize_weights,
    unweight,
    unweight_sequence,
    validate,
)
from .thresholding import bootstrap_threshold, extract_changes

__all__ = [
    "ChangeReport", "CommunityAssignment", "DetectorConfig", "DynamicNetwork", "PartitionResult",
    "ScoreSeries", "Snapshot", "ValidationError", "bench", "bootstrap_threshold", "contract",
    "deltacon_score", "detection_metrics", "em_score", "extract_changes", "kl_divergence",
    "louvain_partition", "modularity", "ndcg", "normalize_weights", "repartition_on_global_change",
    "run_hierarchical", "table1_bter", "table1_sbm", "table1_schedules", "unweight",
    "unweight_sequence", "validate",
]
