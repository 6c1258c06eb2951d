"""
FGSM: возмущение η = ε·sign(∇ₓJ) и состязательное обучение.
"""
import logging
from typing import Tuple

import numpy as np

from src.autodiff import Tensor, backward, softmax_cross_entropy
from src.core.exceptions import NonFiniteError, UsageError
from src.model.network import ModelParams, forward, predict_classes
from src.scheme.attack import AttackConfig, PerturbedBatch
from src.scheme.metrics import MetricsReport
from src.service.metrics import confusion, report
from src.service.optimizer import AdamState, adam_step

logger = logging.getLogger(__name__)


def input_gradient(params: ModelParams, images: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """∇ₓJ суммарной перекрёстной энтропии; параметры модели не затрагиваются."""
    frozen = params.frozen()
    x = Tensor(np.asarray(images), requires_grad=True, dtype=np.dtype(params.config.dtype))
    logits, _ = forward(frozen, x)
    backward(softmax_cross_entropy(logits, labels, reduction="sum"))
    if x.grad is None:
        return np.zeros_like(x.data)
    if not np.all(np.isfinite(x.grad)):
        raise NonFiniteError("fgsm", "градиент по входу")
    return x.grad


def fgsm(params: ModelParams, images: np.ndarray, labels: np.ndarray, config: AttackConfig) -> PerturbedBatch:
    """Состязательные изображения при бюджете config.epsilon.

    sign(0) = 0; после обрезки |x_adv - x| не превышает ε ни в одном пикселе.
    """
    images = np.asarray(images)
    if images.size and (images.min() < config.clip_min or images.max() > config.clip_max):
        raise UsageError("fgsm: значения пикселей вне границ обрезки")
    labels = np.asarray(labels)
    if config.epsilon == 0.0:
        return PerturbedBatch(images=images.copy(), eta=np.zeros(images.shape, dtype=np.float64), labels=labels)

    grad = input_gradient(params, images, labels)
    eta = config.epsilon * np.sign(grad.astype(np.float64))
    adversarial = np.clip(images + eta, config.clip_min, config.clip_max).astype(images.dtype)
    # Округление до float32 может вывести пиксель за ε: сдвигаем на шаг к исходному
    overshoot = np.abs(adversarial.astype(np.float64) - images.astype(np.float64)) > config.epsilon
    if overshoot.any():
        adversarial[overshoot] = np.nextafter(adversarial[overshoot], images[overshoot])
    logger.debug("[ATTACK] FGSM ε=%g: батч %d, ненулевых знаков %d", config.epsilon, len(images), int(np.count_nonzero(eta)))
    return PerturbedBatch(images=adversarial, eta=adversarial.astype(np.float64) - images.astype(np.float64), labels=labels)


def train_step(params: ModelParams, images: np.ndarray, labels: np.ndarray, state: AdamState) -> float:
    """Стандартный шаг: средняя перекрёстная энтропия, обратный проход, Adam."""
    params.zero_grad()
    logits, _ = forward(params, images)
    loss = softmax_cross_entropy(logits, labels, reduction="mean")
    backward(loss)
    adam_step(params, params.grads(), state)
    params.zero_grad()
    return loss.item()


def adversarial_train_step(params: ModelParams, images: np.ndarray, labels: np.ndarray, state: AdamState,
                           config: AttackConfig) -> float:
    """Шаг на FGSM-батче, построенном по текущим параметрам."""
    perturbed = fgsm(params, images, labels, config)
    return train_step(params, perturbed.images, labels, state)


def predict_batches(params: ModelParams, images: np.ndarray, batch_size: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    """Логиты и предсказанные классы по частям, без графа."""
    frozen = params.frozen()
    chunks = [forward(frozen, images[start:start + batch_size])[0].data for start in range(0, len(images), batch_size)]
    logits = np.concatenate(chunks) if chunks else np.zeros((0, params.config.num_classes))
    return logits, predict_classes(logits)


def perturb_batches(params: ModelParams, images: np.ndarray, labels: np.ndarray, config: AttackConfig,
                    batch_size: int = 64) -> np.ndarray:
    parts = [
        fgsm(params, images[start:start + batch_size], labels[start:start + batch_size], config).images
        for start in range(0, len(images), batch_size)
    ]
    return np.concatenate(parts) if parts else images.copy()


def evaluate_under_attack(params: ModelParams, images: np.ndarray, labels: np.ndarray, config: AttackConfig,
                          positive_class: int, batch_size: int = 64) -> MetricsReport:
    """Метрики на FGSM-двойниках тестовых изображений, построенных против этой же модели."""
    adversarial = perturb_batches(params, images, labels, config, batch_size)
    _, predictions = predict_batches(params, adversarial, batch_size)
    result = report(confusion(labels, predictions, params.config.num_classes), positive_class)
    logger.info("[ATTACK] ε=%g: точность %.4f", config.epsilon, result.accuracy)
    return result
