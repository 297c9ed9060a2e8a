"""Field-level privacy leakage tooling for threat-intelligence sharing documents."""

__version__ = "0.1.0"

from .registry import (  # noqa: E402
    DEFAULT_WEIGHTS, FieldRule, LeakCategory, Registry, StandardCategory, StandardDescriptor,
    WeightProfile, builtin_registry, dump_registry, load_rules, static_schema_score,
    validate_registry,
)
from .tree import DocumentTree, FieldNode, FieldPath, enumerate_fields, path_matches  # noqa: E402
from .ingest import detect_standard, load_document, parse_document, parse_json, parse_xml  # noqa: E402
from .scoring import (  # noqa: E402
    FieldFinding, LeakageReport, classify_document, score_corpus, score_document, score_tree,
)
from .annotate import RenderOptions, render_report  # noqa: E402
from .sanitize import (  # noqa: E402
    SanitizationPolicy, apply_policy, generalize_value, pseudonymize_value,
)
from .anonymity import (  # noqa: E402
    QuasiIdentifierSpec, RecordTable, check_k_anonymity, check_l_diversity, dp_count,
    enforce_k_anonymity,
)
from .partition import (  # noqa: E402
    DEFAULT_TIERS, CommunityTier, PartitionSet, TierPolicy, merge_partitions, partition_document,
    tier_view,
)
from .quality import (  # noqa: E402
    IndicatorClass, IndicatorRecord, ProviderProfile, QualityScore, flag_free_riders,
    indicator_quality, label_agreement, provider_class_score, timeliness_score,
)
