"""
Итоговые таблицы: строки «модель» и «модель*» (оценка на возмущённых снимках).
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from src.core.constants import CONFIDENCE
from src.core.exceptions import DataError
from src.repository.artifacts import ArtifactStore
from src.scheme.metrics import ExperimentReport, MetricSummary, MetricsReport, ReportRow
from src.scheme.run import RunRecord
from src.service.metrics import SUMMARY_METRICS, aggregate

logger = logging.getLogger(__name__)

TABLE_COLUMNS = (
    ("accuracy", "Accuracy"),
    ("precision", "Precision"),
    ("recall", "Recall"),
    ("f1", "F1-score"),
)


def summarize(reports: Sequence[MetricsReport], confidence: float = CONFIDENCE) -> Dict[str, MetricSummary]:
    """Среднее ± полуширина; для одного раунда только значение."""
    if len(reports) >= 2:
        return aggregate(reports, confidence).metrics
    logger.warning("[REPORT] Один раунд: доверительный интервал не строится")
    return {name: MetricSummary(mean=getattr(reports[0], name)) for name in SUMMARY_METRICS}


def starred(name: str, epsilon: float, main_epsilon: float) -> str:
    return f"{name}*" if epsilon == main_epsilon else f"{name}*(ε={epsilon:g})"


def rows_for(name: str, records: Sequence[RunRecord], confidence: float = CONFIDENCE) -> List[ReportRow]:
    """Строка чистой оценки и по строке на каждый ε из записей."""
    if not records:
        raise DataError(f"нет успешных раундов для '{name}'")
    variant = records[0].variant
    clean = [record.test_report for record in records]
    rows = [ReportRow(name=name, variant=variant, rounds=clean, metrics=summarize(clean, confidence))]
    epsilons = [evaluation.epsilon for evaluation in records[0].perturbed]
    for position, epsilon in enumerate(epsilons):
        reports = [record.perturbed[position].report for record in records]
        rows.append(ReportRow(
            name=starred(name, epsilon, epsilons[0]),
            variant=variant,
            epsilon=epsilon,
            rounds=reports,
            metrics=summarize(reports, confidence)
        ))
    return rows


def build_report(rows: Iterable[ReportRow], confidence: float = CONFIDENCE) -> ExperimentReport:
    return ExperimentReport(confidence=confidence, rows=list(rows))


def format_table(report: ExperimentReport) -> str:
    """Текстовая таблица с выровненными столбцами."""
    header = ["Model", *[title for _, title in TABLE_COLUMNS]]
    body = [[row.name, *[row.metrics[key].format() for key, _ in TABLE_COLUMNS]] for row in report.rows]
    widths = [max(len(line[column]) for line in [header, *body]) for column in range(len(header))]

    def line(cells: List[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()

    rule = "  ".join("-" * width for width in widths)
    lines = [line(header), rule, *[line(cells) for cells in body]]
    lines.append("")
    lines.append(f"* оценка на FGSM-изображениях; интервал {report.confidence:.0%}")
    return "\n".join(lines) + "\n"


def write_report(store: ArtifactStore, report: ExperimentReport) -> str:
    text = format_table(report)
    store.write_report(report, text)
    return text


def directory_rows(directory: Path, name: Optional[str] = None) -> List[ReportRow]:
    """Строки из report.json каталога либо, если его нет, из записей раундов."""
    store = ArtifactStore(directory)
    existing = store.read_report()
    if existing is not None:
        return existing.rows
    records = store.read_records()
    if not records:
        raise DataError(f"{directory}: нет ни report.json, ни записей раундов")
    if name is None:
        config = store.read_config()
        name = model_label(config.model if isinstance(config.model, str) else config.model.name, records[0].variant)
    return rows_for(name, records)


def merge_reports(directories: Sequence[Path], confidence: float = CONFIDENCE) -> ExperimentReport:
    """Объединяет таблицы нескольких экспериментов; одинаковые имена уточняются каталогом."""
    rows: List[ReportRow] = []
    seen = set()
    for directory in directories:
        for row in directory_rows(Path(directory)):
            if row.name in seen:
                row = row.model_copy(update={"name": f"{Path(directory).name}/{row.name}"})
            seen.add(row.name)
            rows.append(row)
    return build_report(rows, confidence)


def model_label(model_name: str, variant: str) -> str:
    return f"{model_name}-robust" if variant == "adversarial" else model_name
