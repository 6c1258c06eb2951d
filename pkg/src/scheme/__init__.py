from src.scheme.base import BaseSchema, canonical_dumps

from src.scheme.model import (
    ConvSpec, MaxPoolSpec, DenseSpec, ReluSpec, FlattenSpec, LayerSpec, ModelConfig
)

from src.scheme.data import (
    ManifestRecord, DatasetManifest, AugmentationConfig, SyntheticConfig, Sample
)

from src.scheme.attack import AttackConfig, PerturbedBatch

from src.scheme.metrics import (
    ConfusionMatrix, ClassMetrics, MetricsReport, MetricSummary, RoundsAggregate, ReportRow, ExperimentReport
)

from src.scheme.gradcam import (
    Heatmap, SaliencyScore, StampSpec, StampResult, StampStats, StampComparison
)

from src.scheme.run import (
    OptimizerConfig, RunConfig, EpochRecord, AttackEvaluation, CheckpointMetadata, RunRecord
)

__all__ = [
    "BaseSchema",
    "canonical_dumps",

    # Модель
    "ConvSpec",
    "MaxPoolSpec",
    "DenseSpec",
    "ReluSpec",
    "FlattenSpec",
    "LayerSpec",
    "ModelConfig",

    # Данные
    "ManifestRecord",
    "DatasetManifest",
    "AugmentationConfig",
    "SyntheticConfig",
    "Sample",

    # Атака
    "AttackConfig",
    "PerturbedBatch",

    # Метрики
    "ConfusionMatrix",
    "ClassMetrics",
    "MetricsReport",
    "MetricSummary",
    "RoundsAggregate",
    "ReportRow",
    "ExperimentReport",

    # Grad-CAM
    "Heatmap",
    "SaliencyScore",
    "StampSpec",
    "StampResult",
    "StampStats",
    "StampComparison",

    # Эксперимент
    "OptimizerConfig",
    "RunConfig",
    "EpochRecord",
    "AttackEvaluation",
    "CheckpointMetadata",
    "RunRecord"
]
