from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import Field

from src.core import constants
from src.scheme.base import BaseSchema


@dataclass(frozen=True)
class Heatmap:
    """Карта Grad-CAM.

    raw: карта на разрешении слоя (после ReLU); weights: веса каналов α
    (канал без градиента получает 0); map: карта размера изображения,
    нормированная в [0, 1].
    """
    raw: np.ndarray
    weights: np.ndarray
    map: np.ndarray
    class_id: int
    layer: str
    zero_map: bool
    predicted: int
    probability: float


class SaliencyScore(BaseSchema):
    """Доля значимости внутри маски."""
    containment: float = Field(..., ge=0, le=1)
    top_q_containment: float = Field(..., ge=0, le=1)
    q: float = constants.TOP_Q
    zero_mass: bool = False


class StampSpec(BaseSchema):
    """Яркий текстоподобный штамп, выжигаемый в угол снимка."""
    row: int = Field(default=0, ge=0)
    col: int = Field(default=0, ge=0)
    height: int = Field(default=4, gt=0)
    width: int = Field(default=8, gt=0)
    intensity: float = Field(default=1.0, ge=0, le=1)
    seed: int = Field(default=0, ge=0)


class StampResult(BaseSchema):
    """Содержание в маске до и после штампа и масса значимости в области штампа."""
    containment_before: float
    containment_after: float
    delta: float
    stamp_mass_before: float = Field(..., ge=0)
    stamp_mass_after: float = Field(..., ge=0)
    image: Optional[str] = None


class StampStats(BaseSchema):
    """Средние по тестовой выборке после выжигания штампа."""
    stamp_mass: float = Field(..., ge=0)
    containment: float = Field(..., ge=0, le=1)
    samples: int


class StampComparison(BaseSchema):
    """Стандартная и устойчивая модели, обученные с одним seed."""
    seed: int
    standard: StampStats
    robust: StampStats
