from typing import Dict, List, Optional

import numpy as np
from pydantic import Field, field_validator

from src.scheme.base import BaseSchema


class ConfusionMatrix(BaseSchema):
    """Матрица K×K: строки по истинному классу, столбцы по предсказанному."""
    counts: List[List[int]]

    @field_validator("counts")
    @classmethod
    def check_counts(cls, value: List[List[int]]) -> List[List[int]]:
        size = len(value)
        if size == 0 or any(len(row) != size for row in value):
            raise ValueError("матрица должна быть квадратной и непустой")
        if any(count < 0 for row in value for count in row):
            raise ValueError("счётчики должны быть неотрицательными")
        return value

    @property
    def num_classes(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return int(sum(sum(row) for row in self.counts))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)


class ClassMetrics(BaseSchema):
    """Метрики одного класса в режиме один-против-всех."""
    class_id: int
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    support: int
    predicted: int


class MetricsReport(BaseSchema):
    """Метрики классификации; основные считаются по положительному классу."""
    accuracy: float = Field(..., ge=0, le=1)
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    macro_precision: float = Field(..., ge=0, le=1)
    macro_recall: float = Field(..., ge=0, le=1)
    macro_f1: float = Field(..., ge=0, le=1)
    per_class: List[ClassMetrics]
    sample_count: int
    positive_class: int
    zero_division: List[str] = Field(default_factory=list)
    confusion: ConfusionMatrix


class MetricSummary(BaseSchema):
    """Среднее и полуширина доверительного интервала (нет интервала для одного раунда)."""
    mean: float
    half_width: Optional[float] = Field(default=None, ge=0)

    def format(self) -> str:
        if self.half_width is None:
            return f"{self.mean:.4f}"
        return f"{self.mean:.4f} ± {self.half_width:.4f}"


class RoundsAggregate(BaseSchema):
    """Сводка по раундам обучения и оценки."""
    rounds: List[MetricsReport]
    confidence: float
    metrics: Dict[str, MetricSummary]

    @property
    def n(self) -> int:
        return len(self.rounds)


class ReportRow(BaseSchema):
    """Строка итоговой таблицы; имя со звёздочкой означает оценку на возмущённых изображениях."""
    name: str
    variant: str
    epsilon: Optional[float] = None
    rounds: List[MetricsReport]
    metrics: Dict[str, MetricSummary]

    @property
    def perturbed(self) -> bool:
        return self.epsilon is not None


class ExperimentReport(BaseSchema):
    confidence: float
    rows: List[ReportRow]
