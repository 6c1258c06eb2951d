"""
Эксперимент из нескольких раундов, пара «стандартная / устойчивая» модель
и эксперимент со штампом.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from src.core.config import settings
from src.core.constants import RESCALE, SPLITS
from src.core.exceptions import InsufficientRoundsError, RobustLensError
from src.repository.artifacts import ArtifactStore, write_json
from src.repository.manifest import load_manifest
from src.scheme.attack import AttackConfig
from src.scheme.gradcam import StampComparison, StampSpec, StampStats
from src.scheme.metrics import ExperimentReport, RoundsAggregate
from src.scheme.run import RunConfig, RunRecord
from src.service.dataset import DatasetService
from src.service.gradcam import annotation_sensitivity
from src.service.metrics import aggregate
from src.service.report import build_report, model_label, rows_for, write_report
from src.service.trainer import TrainerService

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class ExperimentResult:
    directory: Path
    records: List[RunRecord]
    report: ExperimentReport
    aggregate: Optional[RoundsAggregate] = None


def open_dataset(config: RunConfig) -> DatasetService:
    """Манифест с проверкой файлов; все три выборки должны быть непустыми."""
    config.check_paths()
    manifest = load_manifest(config.manifest, num_classes=config.num_classes, check_files=True)
    for split in SPLITS:
        manifest.require_split(split)
    rescale = config.augmentation.rescale if config.augmentation is not None else RESCALE
    return DatasetService(manifest, config.input_hw(), rescale)


def run_name(config: RunConfig) -> str:
    model = config.model if isinstance(config.model, str) else config.model.name
    return model_label(model, config.variant)


def run_rounds(trainer: TrainerService, rounds: int) -> List[RunRecord]:
    """Раунды с seed = seed + номер; неудачные раунды записываются в error.json."""

    def attempt(index: int):
        try:
            return trainer.train_round(index)
        except RobustLensError as exc:
            logger.error("[TRAIN] Раунд %d завершился ошибкой: %s", index, exc)
            trainer.store.write_error(index, exc)
            return exc

    workers = min(settings.THREADS, rounds)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(attempt, range(rounds)))
    else:
        outcomes = [attempt(index) for index in range(rounds)]

    records = [outcome for outcome in outcomes if isinstance(outcome, RunRecord)]
    failures = [outcome for outcome in outcomes if not isinstance(outcome, RunRecord)]
    if failures and not records:
        raise failures[0]
    if rounds >= 2 and len(records) < 2:
        raise InsufficientRoundsError(f"успешных раундов {len(records)} из {rounds}, нужно не меньше 2")
    return records


def run_experiment(config: RunConfig, output_dir: Optional[PathLike] = None,
                   dataset: Optional[DatasetService] = None) -> ExperimentResult:
    """Обучает config.rounds раундов и пишет config.json, раунды и отчёт.

    Args:
        config: Конфигурация эксперимента
        output_dir: Каталог результатов; по умолчанию config.output_dir
        dataset: Уже открытый датасет (для пар моделей)

    Returns:
        Записи раундов, отчёт и агрегат по тестовым метрикам (при двух и более раундах)
    """
    directory = Path(output_dir or config.output_dir)
    store = ArtifactStore(directory)
    dataset = dataset or open_dataset(config)
    store.clear_rounds()
    store.write_config(config)

    records = run_rounds(TrainerService(config, dataset, store), config.rounds)
    report = build_report(rows_for(run_name(config), records))
    write_report(store, report)
    summary = aggregate([record.test_report for record in records]) if len(records) >= 2 else None
    if summary is not None:
        logger.info("[REPORT] %s: точность %s", run_name(config), summary.metrics["accuracy"].format())
    return ExperimentResult(directory=directory, records=records, report=report, aggregate=summary)


def twin_configs(config: RunConfig) -> List[RunConfig]:
    attack = config.attack or AttackConfig()
    return [
        config.model_copy(update={"adversarial": False, "attack": attack}),
        config.model_copy(update={"adversarial": True, "attack": attack}),
    ]


def run_twins(config: RunConfig, output_dir: Optional[PathLike] = None) -> ExperimentResult:
    """Стандартная и устойчивая модели с одинаковыми seed; общий отчёт из четырёх строк."""
    directory = Path(output_dir or config.output_dir)
    standard, robust = twin_configs(config)
    dataset = open_dataset(config)
    first = run_experiment(standard, directory / "standard", dataset)
    second = run_experiment(robust, directory / "robust", dataset)
    store = ArtifactStore(directory)
    store.write_config(standard)
    report = build_report(first.report.rows + second.report.rows)
    write_report(store, report)
    return ExperimentResult(directory=directory, records=first.records + second.records, report=report)


def default_stamp(config: RunConfig) -> StampSpec:
    height = max(2, config.input_hw()[0] // 6)
    return StampSpec(row=1, col=1, height=height, width=2 * height, intensity=1.0, seed=config.seed)


def stamp_statistics(trainer: TrainerService, params, stamp: StampSpec, layer) -> StampStats:
    samples = trainer.dataset.samples("test")
    results = [
        annotation_sensitivity(params, sample.image, stamp, layer=layer, mask=sample.mask)
        for sample in samples
    ]
    return StampStats(
        stamp_mass=float(np.mean([result.stamp_mass_after for result in results])),
        containment=float(np.mean([result.containment_after for result in results])),
        samples=len(results)
    )


def stamp_experiment(config: RunConfig, seeds: Sequence[int], stamp: Optional[StampSpec] = None,
                     layer: Union[str, int, None] = None, output_dir: Optional[PathLike] = None) -> List[StampComparison]:
    """Для каждого seed обучает обе модели и сравнивает массу значимости в области штампа.

    Маска для доли внутри берётся из манифеста, иначе всё, кроме штампа.
    """
    directory = Path(output_dir or config.output_dir)
    stamp = stamp or default_stamp(config)
    dataset = open_dataset(config)
    comparisons = []
    for seed in seeds:
        stats = {}
        for variant_config in twin_configs(config):
            store = ArtifactStore(directory / f"seed-{seed}" / variant_config.variant)
            trainer = TrainerService(variant_config, dataset, store)
            params, record = trainer.train(0, seed)
            store.write_record(record)
            stats[variant_config.variant] = stamp_statistics(trainer, params, stamp, layer)
        comparison = StampComparison(seed=seed, standard=stats["standard"], robust=stats["adversarial"])
        logger.info("[GRADCAM] seed %d: масса штампа %.4f (стандартная) / %.4f (устойчивая)",
                    seed, comparison.standard.stamp_mass, comparison.robust.stamp_mass)
        comparisons.append(comparison)
    write_json(directory / "stamp.json", [comparison.model_dump(mode="json") for comparison in comparisons])
    return comparisons
