"""
Метрики классификации и доверительные интервалы по раундам.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from src.core.constants import CONFIDENCE
from src.core.exceptions import InsufficientRoundsError, UsageError
from src.scheme.metrics import ClassMetrics, ConfusionMatrix, MetricSummary, MetricsReport, RoundsAggregate

logger = logging.getLogger(__name__)

HEADLINE_METRICS = ("accuracy", "precision", "recall", "f1")
SUMMARY_METRICS = HEADLINE_METRICS + ("macro_precision", "macro_recall", "macro_f1")


def confusion(labels: Sequence[int], predictions: Sequence[int], num_classes: int) -> ConfusionMatrix:
    """Матрица ошибок: строки по истинному классу, столбцы по предсказанному."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    predictions = np.asarray(predictions, dtype=np.int64).reshape(-1)
    if labels.shape != predictions.shape:
        raise UsageError(f"confusion: {labels.size} меток и {predictions.size} предсказаний")
    for name, values in (("метка", labels), ("предсказание", predictions)):
        if values.size and (values.min() < 0 or values.max() >= num_classes):
            raise UsageError(f"confusion: {name} вне диапазона [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (labels, predictions), 1)
    return ConfusionMatrix(counts=counts.tolist())


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def f1_score(precision: float, recall: float) -> float:
    return 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def report(cm: ConfusionMatrix, positive_class: int) -> MetricsReport:
    """Метрики по матрице ошибок.

    Основные precision/recall/f1 считаются один-против-всех для положительного
    класса; макро-средние считаются по всем классам. Деление на ноль даёт 0
    и отметку в zero_division.
    """
    counts = cm.as_array()
    k = cm.num_classes
    if not 0 <= positive_class < k:
        raise UsageError(f"report: положительный класс {positive_class} вне [0, {k})")
    total = int(counts.sum())
    flags: List[str] = []
    accuracy = _ratio(int(np.trace(counts)), total)
    if accuracy is None:
        flags.append("accuracy")
        accuracy = 0.0

    per_class = []
    for c in range(k):
        tp = int(counts[c, c])
        predicted = int(counts[:, c].sum())
        support = int(counts[c, :].sum())
        precision = _ratio(tp, predicted)
        recall = _ratio(tp, support)
        if precision is None:
            flags.append(f"precision[{c}]")
        if recall is None:
            flags.append(f"recall[{c}]")
        precision = precision or 0.0
        recall = recall or 0.0
        per_class.append(ClassMetrics(
            class_id=c,
            precision=precision,
            recall=recall,
            f1=f1_score(precision, recall),
            support=support,
            predicted=predicted
        ))

    headline = per_class[positive_class]
    return MetricsReport(
        accuracy=accuracy,
        precision=headline.precision,
        recall=headline.recall,
        f1=headline.f1,
        macro_precision=float(np.mean([item.precision for item in per_class])),
        macro_recall=float(np.mean([item.recall for item in per_class])),
        macro_f1=float(np.mean([item.f1 for item in per_class])),
        per_class=per_class,
        sample_count=total,
        positive_class=positive_class,
        zero_division=flags,
        confusion=cm
    )


def t_half_width(values: Sequence[float], confidence: float = CONFIDENCE) -> float:
    """Полуширина t-интервала: t_{(1+c)/2, n-1} · s / √n."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 2:
        raise InsufficientRoundsError(f"для интервала нужно не меньше 2 раундов, получено {n}")
    if np.all(values == values[0]):
        return 0.0
    s = float(values.std(ddof=1))
    return float(stats.t.ppf((1.0 + confidence) / 2.0, n - 1) * s / math.sqrt(n))


def aggregate(rounds: Sequence[MetricsReport], confidence: float = CONFIDENCE) -> RoundsAggregate:
    """Среднее ± полуширина доверительного интервала по каждой метрике."""
    rounds = list(rounds)
    if len(rounds) < 2:
        raise InsufficientRoundsError(f"для агрегирования нужно не меньше 2 раундов, получено {len(rounds)}")
    metrics: Dict[str, MetricSummary] = {}
    for name in SUMMARY_METRICS:
        values = [getattr(item, name) for item in rounds]
        metrics[name] = MetricSummary(mean=float(np.mean(values)), half_width=t_half_width(values, confidence))
    return RoundsAggregate(rounds=rounds, confidence=confidence, metrics=metrics)
