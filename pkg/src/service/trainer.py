"""
Обучение одного раунда: эпохи, валидация, плато, ранняя остановка,
оценка лучшего снимка на тестовой выборке.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from src.autodiff import softmax_cross_entropy
from src.core.exceptions import NonFiniteError
from src.model.network import ModelParams, build, forward
from src.repository.artifacts import ArtifactStore
from src.repository.checkpoint import Checkpoint, save_checkpoint
from src.scheme.metrics import MetricsReport
from src.scheme.run import AttackEvaluation, CheckpointMetadata, EpochRecord, RunConfig, RunRecord
from src.service.adversarial import adversarial_train_step, evaluate_under_attack, predict_batches, train_step
from src.service.dataset import DatasetService
from src.service.metrics import confusion, report
from src.service.optimizer import AdamState
from src.service.schedule import EarlyStopState, PlateauState, early_stop_update, plateau_update

logger = logging.getLogger(__name__)

EVAL_BATCH = 64


class TrainerService:
    """Сервис обучения и оценки модели."""

    def __init__(self, config: RunConfig, dataset: DatasetService, store: ArtifactStore):
        """Инициализация сервиса.

        Args:
            config: Конфигурация эксперимента
            dataset: Источник изображений
            store: Каталог результатов
        """
        self.config = config
        self.dataset = dataset
        self.store = store

    def round_seed(self, round_index: int) -> int:
        return self.config.seed + round_index

    def _run_epoch(self, params: ModelParams, state: AdamState, seed: int, epoch: int) -> float:
        """Одна эпоха; возвращает среднюю по батчам потерю."""
        config = self.config
        losses = []
        batches = self.dataset.batch_iter("train", config.batch_size, config.augmentation, seed=seed, epoch=epoch)
        for images, labels in batches:
            if config.adversarial:
                loss = adversarial_train_step(params, images, labels, state, config.attack)
            else:
                loss = train_step(params, images, labels, state)
            losses.append(loss)
        return float(np.mean(losses))

    def _validate(self, params: ModelParams) -> Tuple[float, float]:
        """Средняя перекрёстная энтропия и точность на валидации без аугментации."""
        images, labels = self.dataset.arrays("val")
        frozen = params.frozen()
        total = 0.0
        correct = 0
        for start in range(0, len(images), EVAL_BATCH):
            logits, _ = forward(frozen, images[start:start + EVAL_BATCH])
            chunk = labels[start:start + EVAL_BATCH]
            total += float(softmax_cross_entropy(logits, chunk, reduction="sum").item())
            correct += int((logits.data.argmax(axis=1) == chunk).sum())
        return total / len(images), correct / len(images)

    def evaluate(self, params: ModelParams, split: str = "test") -> MetricsReport:
        images, labels = self.dataset.arrays(split)
        _, predictions = predict_batches(params, images, EVAL_BATCH)
        return report(confusion(labels, predictions, self.config.num_classes), self.config.positive_class)

    def evaluate_perturbed(self, params: ModelParams, split: str = "test") -> List[AttackEvaluation]:
        attack = self.config.attack
        if attack is None:
            return []
        images, labels = self.dataset.arrays(split)
        evaluations = []
        for epsilon in attack.epsilons():
            variant = attack.model_copy(update={"epsilon": epsilon})
            result = evaluate_under_attack(params, images, labels, variant, self.config.positive_class, EVAL_BATCH)
            evaluations.append(AttackEvaluation(epsilon=epsilon, report=result))
        return evaluations

    def train(self, round_index: int, seed: int) -> Tuple[ModelParams, RunRecord]:
        config = self.config
        optimizer = config.optimizer
        params = build(config.model_config_for(seed))
        state = AdamState(
            learning_rate=optimizer.learning_rate,
            beta1=optimizer.beta1,
            beta2=optimizer.beta2,
            epsilon=optimizer.epsilon
        )
        plateau = PlateauState(
            factor=optimizer.plateau_factor,
            patience=optimizer.plateau_patience,
            min_delta=optimizer.plateau_min_delta
        )
        early = EarlyStopState(patience=optimizer.early_stop_patience, max_epochs=config.max_epochs)
        epochs: List[EpochRecord] = []

        halt = False
        while not halt:
            epoch = early.epoch + 1
            learning_rate = state.learning_rate
            try:
                train_loss = self._run_epoch(params, state, seed, epoch)
                val_loss, val_accuracy = self._validate(params)
            except NonFiniteError:
                logger.error("[TRAIN] Раунд %d, эпоха %d: нечисловая потеря, lr=%g", round_index, epoch, learning_rate)
                raise
            epochs.append(EpochRecord(
                epoch=epoch,
                train_loss=train_loss,
                val_loss=val_loss,
                val_accuracy=val_accuracy,
                learning_rate=learning_rate
            ))
            logger.info("[TRAIN] Раунд %d, эпоха %d: train %.4f, val %.4f, val acc %.4f, lr %g",
                        round_index, epoch, train_loss, val_loss, val_accuracy, learning_rate)
            # Массивы параметров заменяются, а не изменяются: словарь ссылок и есть снимок
            halt = early_stop_update(early, val_loss, snapshot=dict(params.arrays()))
            state.learning_rate = plateau_update(plateau, val_loss, state.learning_rate)

        best = ModelParams.from_arrays(params.config, early.best_snapshot, requires_grad=False)
        checkpoint = save_checkpoint(
            Checkpoint.from_params(best, CheckpointMetadata(
                epoch=early.best_epoch,
                best_val_loss=early.best,
                rng_seed=seed,
                variant=config.variant
            )),
            self.store.checkpoint_path(round_index)
        )
        record = RunRecord(
            round_index=round_index,
            seed=seed,
            variant=config.variant,
            epochs=epochs,
            halt_epoch=early.epoch,
            best_epoch=early.best_epoch,
            best_val_loss=early.best,
            checkpoint_path=self.store.relative(checkpoint),
            train_accuracy=self.evaluate(best, "train").accuracy,
            test_report=self.evaluate(best, "test"),
            perturbed=self.evaluate_perturbed(best, "test")
        )
        return best, record

    def train_round(self, round_index: int, seed: Optional[int] = None) -> RunRecord:
        """Раунд обучения с записью контрольной точки и record.json."""
        seed = self.round_seed(round_index) if seed is None else seed
        logger.info("[TRAIN] Раунд %d (%s), seed %d", round_index, self.config.variant, seed)
        _, record = self.train(round_index, seed)
        self.store.write_record(record)
        return record


def train_round(config: RunConfig, dataset: DatasetService, store: ArtifactStore, round_index: int = 0,
                seed: Optional[int] = None) -> RunRecord:
    return TrainerService(config, dataset, store).train_round(round_index, seed)
