from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from src.core import constants
from src.core.exceptions import DuplicatePathError, EmptySplitError, UnknownLabelError
from src.scheme.base import BaseSchema

Split = Literal["train", "val", "test"]


class ManifestRecord(BaseSchema):
    """Строка манифеста: изображение, класс, выборка, маска."""
    path: str
    label: int = Field(..., ge=0)
    split: Split
    mask_path: Optional[str] = None
    source: Optional[str] = None


class DatasetManifest(BaseSchema):
    """Проверенный манифест датасета."""
    root: str = "."
    records: List[ManifestRecord]
    num_classes: int = Field(default=constants.NUM_CLASSES, gt=0)

    @model_validator(mode="after")
    def check_records(self) -> "DatasetManifest":
        seen = set()
        for record in self.records:
            if record.path in seen:
                raise DuplicatePathError(f"путь встречается дважды: {record.path}")
            seen.add(record.path)
            if record.label >= self.num_classes:
                raise UnknownLabelError(f"класс {record.label} вне диапазона [0, {self.num_classes}) ({record.path})")
        return self

    def split(self, name: str) -> List[ManifestRecord]:
        return [record for record in self.records if record.split == name]

    def require_split(self, name: str) -> List[ManifestRecord]:
        records = self.split(name)
        if not records:
            raise EmptySplitError(f"выборка '{name}' пуста")
        return records

    def counts(self) -> Dict[str, int]:
        return {name: len(self.split(name)) for name in constants.SPLITS}

    def class_counts(self, split: Optional[str] = None) -> Dict[int, int]:
        records = self.records if split is None else self.split(split)
        counts = {label: 0 for label in range(self.num_classes)}
        for record in records:
            counts[record.label] += 1
        return counts


class AugmentationConfig(BaseSchema):
    """Параметры стохастической аугментации."""
    enabled: bool = True
    rescale: float = Field(default=constants.RESCALE, gt=0)
    horizontal_flip: bool = True
    vertical_flip: bool = True
    zoom_range: Tuple[float, float] = constants.ZOOM_RANGE
    rotation_range: Tuple[float, float] = constants.ROTATION_RANGE
    width_shift: float = Field(default=constants.WIDTH_SHIFT, ge=0)
    height_shift: float = Field(default=constants.HEIGHT_SHIFT, ge=0)
    shear_range: float = Field(default=constants.SHEAR_RANGE, ge=0, description="Угол сдвига, градусы")
    seed: int = Field(default=0, ge=0)

    @field_validator("zoom_range", "rotation_range")
    @classmethod
    def check_order(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] > value[1]:
            raise ValueError(f"диапазон не упорядочен: {value}")
        return value

    @field_validator("zoom_range")
    @classmethod
    def check_zoom(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] <= 0:
            raise ValueError("масштаб должен быть положительным")
        return value

    @classmethod
    def identity(cls, **overrides) -> "AugmentationConfig":
        """Все диапазоны схлопнуты в тождественное преобразование."""
        values = dict(
            horizontal_flip=False,
            vertical_flip=False,
            zoom_range=(1.0, 1.0),
            rotation_range=(0.0, 0.0),
            width_shift=0.0,
            height_shift=0.0,
            shear_range=0.0
        )
        values.update(overrides)
        return cls(**values)


class SyntheticConfig(BaseSchema):
    """Параметры генератора синтетических снимков (яркости в уровнях 0..255)."""
    size: int = Field(default=16, ge=8)
    num_classes: int = Field(default=constants.NUM_CLASSES, ge=2, le=constants.NUM_CLASSES)
    counts: Dict[Split, int] = Field(default_factory=lambda: {"train": 40, "val": 10, "test": 20},
                                     description="Число изображений каждого класса в выборке")
    body_level: int = Field(default=150, ge=0, le=255)
    lung_level: int = Field(default=70, ge=0, le=255)
    blob_amplitude: int = Field(default=50, ge=0, le=150, description="Устойчивый признак: пятно в лёгком")
    blob_size: int = Field(default=2, ge=1)
    texture_amplitude: int = Field(default=0, ge=0, le=20, description="Неустойчивый признак: слабая текстура")
    stamp_amplitude: int = Field(default=0, ge=0, le=150, description="Текстовая метка в углу")
    stamp_correlation: float = Field(default=0.9, ge=0, le=1)
    stamp_class: int = Field(default=constants.POSITIVE_CLASS, ge=0)
    noise: int = Field(default=1, ge=0, le=20)
    image_format: Literal["png", "pgm"] = "png"
    masks: bool = True
    seed: int = Field(default=0, ge=0)

    @field_validator("counts")
    @classmethod
    def check_counts(cls, value: Dict[str, int]) -> Dict[str, int]:
        if any(count < 0 for count in value.values()):
            raise ValueError("число изображений не может быть отрицательным")
        return value

    @model_validator(mode="after")
    def check_stamp_class(self) -> "SyntheticConfig":
        if self.stamp_class >= self.num_classes:
            raise ValueError(f"класс метки {self.stamp_class} вне [0, {self.num_classes})")
        return self


@dataclass(frozen=True)
class Sample:
    """Изображение 1×H×W в [0, 1], класс и необязательная бинарная маска H×W."""
    image: np.ndarray
    label: int
    mask: Optional[np.ndarray] = None
    path: str = ""

    def __post_init__(self):
        if self.image.ndim != 3 or self.image.shape[0] != 1:
            raise ValueError(f"ожидалось изображение 1×H×W, получено {self.image.shape}")
        if self.image.size and (self.image.min() < 0.0 or self.image.max() > 1.0):
            raise ValueError("значения пикселей вне [0, 1]")
        if self.mask is not None:
            if self.mask.shape != self.image.shape[1:]:
                raise ValueError(f"маска {self.mask.shape} не совпадает с изображением {self.image.shape[1:]}")
            if not np.isin(self.mask, (0, 1)).all():
                raise ValueError("маска должна быть бинарной")

    @property
    def height(self) -> int:
        return self.image.shape[1]

    @property
    def width(self) -> int:
        return self.image.shape[2]
