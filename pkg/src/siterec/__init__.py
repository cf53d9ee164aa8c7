"""Data-driven site selection: hierarchical regional statistics,
constraint-based filtering, weighted scoring, and evaluation analytics."""

from .analysis import (
    Bucket,
    BucketBreakdown,
    ContingencyTable,
    CorrelationMatrix,
    GroupProfile,
    PresenceSet,
    RankSumResult,
    bucket_stats,
    chain_profile,
    contingency,
    correlation_matrix,
    new_site_candidates,
    overlap_percentage,
    pearson,
    wilcoxon_rank_sum,
)
from .engine import (
    Criterion,
    MembershipFunction,
    Predicate,
    Recommendation,
    RequirementProfile,
    SuitabilityRating,
    check_consistency,
    eliminate,
    membership,
    parse_profile,
    rate,
    recommend,
    score,
    survivors,
)
from .hierarchy import (
    Aggregation,
    FactorValue,
    Hierarchy,
    LevelScheme,
    LocationFactor,
    Site,
    Snapshot,
    build_hierarchy,
    national_aggregate,
    purchasing_power_index,
    resolve_factor,
)
from .ingest import (
    DatasetManifest,
    ValidationReport,
    build_snapshot,
    load_manifest,
    load_snapshot,
    parse_factor_file,
    parse_hierarchy_file,
)

__version__ = "0.1.0"

__all__ = [
    "Aggregation",
    "Bucket",
    "BucketBreakdown",
    "ContingencyTable",
    "CorrelationMatrix",
    "Criterion",
    "DatasetManifest",
    "FactorValue",
    "GroupProfile",
    "Hierarchy",
    "LevelScheme",
    "LocationFactor",
    "MembershipFunction",
    "Predicate",
    "PresenceSet",
    "RankSumResult",
    "Recommendation",
    "RequirementProfile",
    "Site",
    "Snapshot",
    "SuitabilityRating",
    "ValidationReport",
    "build_hierarchy",
    "build_snapshot",
    "bucket_stats",
    "chain_profile",
    "check_consistency",
    "contingency",
    "correlation_matrix",
    "eliminate",
    "load_manifest",
    "load_snapshot",
    "membership",
    "national_aggregate",
    "new_site_candidates",
    "overlap_percentage",
    "parse_factor_file",
    "parse_hierarchy_file",
    "parse_profile",
    "pearson",
    "purchasing_power_index",
    "rate",
    "recommend",
    "resolve_factor",
    "score",
    "survivors",
    "wilcoxon_rank_sum",
]
