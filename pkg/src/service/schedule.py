"""
Снижение шага на плато и ранняя остановка по потере на валидации.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Optional

from src.core.constants import (
    DELTA_TOLERANCE, EARLY_STOP_PATIENCE, MAX_EPOCHS, PLATEAU_FACTOR, PLATEAU_MIN_DELTA, PLATEAU_PATIENCE
)
from src.core.exceptions import NonFiniteError

logger = logging.getLogger(__name__)


def _check_finite(value: float) -> None:
    if not math.isfinite(value):
        raise NonFiniteError("val_loss", "потеря на валидации")


@dataclass
class PlateauState:
    best: float = math.inf
    counter: int = 0
    factor: float = PLATEAU_FACTOR
    patience: int = PLATEAU_PATIENCE
    min_delta: float = PLATEAU_MIN_DELTA


def improved_by(best: float, value: float, min_delta: float) -> bool:
    """Улучшение строго больше min_delta; разница в пределах допуска считается равной."""
    if math.isinf(best):
        return True
    return best - value > min_delta + DELTA_TOLERANCE


def plateau_update(state: PlateauState, val_loss: float, learning_rate: float) -> float:
    """Возвращает шаг обучения после эпохи с потерей val_loss."""
    _check_finite(val_loss)
    if improved_by(state.best, val_loss, state.min_delta):
        state.best = val_loss
        state.counter = 0
        return learning_rate
    state.counter += 1
    if state.counter >= state.patience:
        state.counter = 0
        reduced = learning_rate * state.factor
        logger.info("[TRAIN] Плато: шаг обучения %g -> %g", learning_rate, reduced)
        return reduced
    return learning_rate


@dataclass
class EarlyStopState:
    best: float = math.inf
    counter: int = 0
    epoch: int = 0
    best_epoch: int = 0
    patience: int = EARLY_STOP_PATIENCE
    max_epochs: int = MAX_EPOCHS
    best_snapshot: Optional[Any] = None


def early_stop_update(state: EarlyStopState, val_loss: float, snapshot: Any = None) -> bool:
    """Учитывает эпоху; возвращает True, если обучение нужно остановить.

    Строгое уменьшение потери считается улучшением и сохраняет снимок;
    при равенстве остаётся более ранняя эпоха.
    """
    _check_finite(val_loss)
    state.epoch += 1
    if val_loss < state.best:
        state.best = val_loss
        state.best_epoch = state.epoch
        state.best_snapshot = snapshot
        state.counter = 0
    else:
        state.counter += 1
    halt = state.counter >= state.patience or state.epoch >= state.max_epochs
    if halt:
        logger.info("[TRAIN] Остановка на эпохе %d, лучшая эпоха %d (потеря %.6f)",
                    state.epoch, state.best_epoch, state.best)
    return halt
