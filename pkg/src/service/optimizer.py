"""
Оптимизатор Adam.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from src.core.constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, LEARNING_RATE
from src.core.exceptions import NonFiniteError, ShapeMismatchError
from src.model.network import ModelParams

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Моменты m, v по параметрам, номер шага и текущий шаг обучения."""
    learning_rate: float = LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: ModelParams, grads: Dict[str, Optional[np.ndarray]], state: AdamState) -> AdamState:
    """Один шаг Adam с коррекцией смещения моментов.

    Массивы параметров заменяются новыми; отсутствующий градиент считается нулевым.

    Args:
        params: Параметры модели
        grads: Градиенты по именам параметров
        state: Состояние оптимизатора, обновляется на месте

    Returns:
        То же состояние после шага
    """
    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    updated = {}
    for name in params.names():
        theta = params[name].data
        grad = grads.get(name)
        grad = np.zeros_like(theta) if grad is None else np.asarray(grad, dtype=theta.dtype)
        if grad.shape != theta.shape:
            raise ShapeMismatchError("adam_step", f"градиент {name}", [grad.shape, theta.shape])
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError("adam_step", f"градиент {name}")
        m = state.m.get(name, np.zeros_like(theta))
        v = state.v.get(name, np.zeros_like(theta))
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        new_theta = (theta - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)).astype(theta.dtype)
        if not np.all(np.isfinite(new_theta)):
            raise NonFiniteError("adam_step", f"параметр {name}")
        state.m[name] = m.astype(theta.dtype)
        state.v[name] = v.astype(theta.dtype)
        updated[name] = new_theta
    params.assign(updated)
    logger.debug("[TRAIN] Шаг Adam %d, lr=%g", t, state.learning_rate)
    return state
