"""
Grad-CAM и количественная оценка карт значимости.

Карта строится по выходу сверточного слоя (после смещения, до ReLU):
α_k = среднее по пространству ∂y^c/∂A^k, L = ReLU(Σ_k α_k A^k), затем
билинейное увеличение до размера входа и нормировка в [0, 1].
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from src.autodiff import backward, softmax, weighted_sum
from src.autodiff.sampling import resize_bilinear
from src.core.constants import TOP_Q
from src.core.exceptions import ShapeMismatchError
from src.model.network import ModelParams, forward, resolve_layer
from src.scheme.data import Sample
from src.scheme.gradcam import Heatmap, SaliencyScore, StampResult, StampSpec
from src.service.stamp import apply_stamp, stamp_region

logger = logging.getLogger(__name__)


def _as_batch(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim == 2:
        return image[None, None]
    if image.ndim == 3:
        return image[None]
    if image.ndim == 4 and image.shape[0] == 1:
        return image
    raise ShapeMismatchError("gradcam", "ожидалось одно изображение", image.shape)


def normalize(upsampled: np.ndarray) -> np.ndarray:
    """Нормировка неотрицательной карты в [0, 1] делением на максимум.

    Это min-max с нижней границей шкалы в нуле, а не в минимуме карты:
    карта, положительная всюду, остаётся пропорциональной своей положительной
    части, а не сдвигается к нулю. После ReLU минимум обычно равен нулю,
    и оба правила совпадают. Максимум результата равен 1, если карта ненулевая.
    """
    high = float(upsampled.max())
    if high <= 0.0:
        return np.zeros_like(upsampled)
    return upsampled / high


def gradcam(params: ModelParams, image: np.ndarray, class_id: Optional[int] = None,
            layer: Union[str, int, None] = None) -> Heatmap:
    """Карта Grad-CAM для одного изображения.

    Args:
        params: Параметры модели (не изменяются)
        image: Изображение 1×H×W
        class_id: Объясняемый класс; по умолчанию предсказанный
        layer: Имя (conv1, conv2, ...) или индекс сверточного слоя; по умолчанию последний

    Returns:
        Карта значимости
    """
    config = params.config
    name, index = resolve_layer(config, layer)
    batch = _as_batch(image)
    logits, activation = forward(params.frozen(), batch, tap=index)
    probabilities = softmax(logits.data.astype(np.float64))[0]
    predicted = int(np.argmax(logits.data[0]))
    target = predicted if class_id is None else int(class_id)
    if not 0 <= target < config.num_classes:
        raise ShapeMismatchError("gradcam", f"класс {target} вне [0, {config.num_classes})")

    selector = np.zeros(logits.shape, dtype=logits.dtype)
    selector[0, target] = 1.0
    backward(weighted_sum(logits, selector))
    activations = activation.data[0].astype(np.float64)
    grads = np.zeros_like(activations) if activation.grad is None else activation.grad[0].astype(np.float64)

    weights = grads.mean(axis=(1, 2))
    raw = np.maximum(np.tensordot(weights, activations, axes=(0, 0)), 0.0)
    height, width = batch.shape[2:]
    zero_map = not np.any(raw > 0.0)
    if zero_map:
        heat = np.zeros((height, width))
        logger.debug("[GRADCAM] Нулевая карта для класса %d, слой %s", target, name)
    else:
        heat = normalize(np.maximum(resize_bilinear(raw, (height, width)), 0.0))
    return Heatmap(
        raw=raw,
        weights=weights,
        map=heat,
        class_id=target,
        layer=name,
        zero_map=zero_map,
        predicted=predicted,
        probability=float(probabilities[predicted])
    )


def score_containment(heatmap: Union[Heatmap, np.ndarray], mask: np.ndarray, q: float = TOP_Q) -> SaliencyScore:
    """Доля массы карты внутри маски и доля top-q пикселей внутри маски.

    В top-q входят только положительные пиксели среди ceil(q·H·W) наибольших;
    при равенстве значений раньше идёт меньший плоский индекс.
    """
    values = np.asarray(heatmap.map if isinstance(heatmap, Heatmap) else heatmap, dtype=np.float64)
    mask = np.asarray(mask)
    if mask.shape != values.shape:
        raise ShapeMismatchError("score_containment", "размеры карты и маски различаются", [values.shape, mask.shape])
    inside = mask.astype(bool)
    total = float(values.sum())
    if total <= 0.0:
        return SaliencyScore(containment=0.0, top_q_containment=0.0, q=q, zero_mass=True)
    containment = min(1.0, max(0.0, float(values[inside].sum()) / total))

    flat = values.reshape(-1)
    count = max(1, math.ceil(q * flat.size))
    top = np.argsort(-flat, kind="stable")[:count]
    top = top[flat[top] > 0.0]
    top_q = float(inside.reshape(-1)[top].sum()) / len(top)
    return SaliencyScore(containment=containment, top_q_containment=top_q, q=q)


def stamp_mass(heatmap: Heatmap, stamp: StampSpec) -> float:
    total = float(heatmap.map.sum())
    if total <= 0.0:
        return 0.0
    region = stamp_region(stamp, heatmap.map.shape)
    return float(heatmap.map[region].sum()) / total


def annotation_sensitivity(params: ModelParams, image: np.ndarray, stamp: StampSpec,
                           layer: Union[str, int, None] = None, mask: Optional[np.ndarray] = None,
                           class_id: Optional[int] = None) -> StampResult:
    """Как меняется карта после выжигания текстовой метки.

    Объясняемый класс фиксируется по чистому снимку. Маска по умолчанию:
    всё изображение, кроме области штампа.
    """
    image = np.asarray(image)
    hw = image.shape[-2:]
    region = stamp_region(stamp, hw)
    if mask is None:
        mask = np.ones(hw)
        mask[region] = 0.0
    before = gradcam(params, image, class_id=class_id, layer=layer)
    after = gradcam(params, apply_stamp(image, stamp), class_id=before.class_id, layer=layer)
    containment_before = score_containment(before, mask).containment
    containment_after = score_containment(after, mask).containment
    return StampResult(
        containment_before=containment_before,
        containment_after=containment_after,
        delta=containment_after - containment_before,
        stamp_mass_before=stamp_mass(before, stamp),
        stamp_mass_after=stamp_mass(after, stamp)
    )


@dataclass(frozen=True)
class Explanation:
    sample: Sample
    heatmap: Heatmap
    score: Optional[SaliencyScore]


def explain_samples(params: ModelParams, samples: List[Sample], layer: Union[str, int, None] = None,
                    include_misclassified: bool = False, label: Optional[int] = None) -> List[Explanation]:
    """Карты для выборки: по умолчанию только правильно классифицированные снимки."""
    explanations = []
    skipped = 0
    for sample in samples:
        if label is not None and sample.label != label:
            continue
        heatmap = gradcam(params, sample.image, layer=layer)
        if heatmap.predicted != sample.label and not include_misclassified:
            skipped += 1
            continue
        score = score_containment(heatmap, sample.mask) if sample.mask is not None else None
        explanations.append(Explanation(sample=sample, heatmap=heatmap, score=score))
    logger.info("[GRADCAM] Построено карт: %d, пропущено ошибочных: %d", len(explanations), skipped)
    return explanations
