from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import Field, model_validator

from src.core import constants
from src.core.config import settings
from src.core.exceptions import MissingFileError
from src.scheme.attack import AttackConfig
from src.scheme.base import BaseSchema
from src.scheme.data import AugmentationConfig
from src.scheme.metrics import MetricsReport
from src.scheme.model import ModelConfig

Variant = Literal["standard", "adversarial"]


class OptimizerConfig(BaseSchema):
    """Adam, снижение шага на плато и ранняя остановка."""
    learning_rate: float = Field(default=constants.LEARNING_RATE, gt=0)
    beta1: float = Field(default=constants.ADAM_BETA1, ge=0, lt=1)
    beta2: float = Field(default=constants.ADAM_BETA2, ge=0, lt=1)
    epsilon: float = Field(default=constants.ADAM_EPSILON, gt=0)
    plateau_factor: float = Field(default=constants.PLATEAU_FACTOR, gt=0, lt=1)
    plateau_patience: int = Field(default=constants.PLATEAU_PATIENCE, gt=0)
    plateau_min_delta: float = Field(default=constants.PLATEAU_MIN_DELTA, ge=0)
    early_stop_patience: int = Field(default=constants.EARLY_STOP_PATIENCE, gt=0)


class RunConfig(BaseSchema):
    """Конфигурация эксперимента."""
    model: Union[str, ModelConfig] = "tiny"
    manifest: str
    image_size: Tuple[int, int] = (64, 64)
    num_classes: int = Field(default=constants.NUM_CLASSES, gt=0)
    positive_class: int = Field(default=constants.POSITIVE_CLASS, ge=0)
    augmentation: Optional[AugmentationConfig] = Field(default_factory=AugmentationConfig)
    attack: Optional[AttackConfig] = None
    adversarial: bool = False
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    batch_size: int = Field(default=constants.BATCH_SIZE, gt=0)
    max_epochs: int = Field(default=constants.MAX_EPOCHS, gt=0)
    rounds: int = Field(default=constants.ROUNDS, ge=1)
    seed: int = Field(default=0, ge=0)
    output_dir: str = Field(default_factory=lambda: settings.DEFAULT_OUTPUT_DIR)

    @model_validator(mode="after")
    def check_consistency(self) -> "RunConfig":
        if self.adversarial and self.attack is None:
            self.attack = AttackConfig()
        if self.positive_class >= self.num_classes:
            raise ValueError(f"положительный класс {self.positive_class} вне [0, {self.num_classes})")
        if isinstance(self.model, ModelConfig):
            if self.model.num_classes != self.num_classes:
                raise ValueError("num_classes модели и эксперимента различаются")
        else:
            from src.model.zoo import ZOO
            if self.model not in ZOO:
                raise ValueError(f"неизвестная модель '{self.model}'; доступны: {', '.join(ZOO)}")
        return self

    @property
    def variant(self) -> Variant:
        return "adversarial" if self.adversarial else "standard"

    def model_config_for(self, seed: int) -> ModelConfig:
        """Конфигурация модели с seed инициализации раунда."""
        if isinstance(self.model, ModelConfig):
            return self.model.model_copy(update={"seed": seed})
        from src.model.zoo import ZOO
        return ZOO[self.model](input_shape=(1, *self.image_size), num_classes=self.num_classes, seed=seed)

    def input_hw(self) -> Tuple[int, int]:
        if isinstance(self.model, ModelConfig):
            return tuple(self.model.input_shape[1:])
        return tuple(self.image_size)

    def check_paths(self) -> None:
        if not Path(self.manifest).is_file():
            raise MissingFileError(f"манифест не найден: {self.manifest}")


class EpochRecord(BaseSchema):
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    learning_rate: float


class AttackEvaluation(BaseSchema):
    """Метрики на возмущённых изображениях при данном ε."""
    epsilon: float
    report: MetricsReport


class CheckpointMetadata(BaseSchema):
    epoch: int = 0
    best_val_loss: Optional[float] = None
    rng_seed: int = 0
    variant: Variant = "standard"


class RunRecord(BaseSchema):
    """Итог одного раунда."""
    round_index: int
    seed: int
    variant: Variant
    epochs: List[EpochRecord]
    halt_epoch: int
    best_epoch: int
    best_val_loss: float
    checkpoint_path: str
    train_accuracy: float
    test_report: MetricsReport
    perturbed: List[AttackEvaluation] = Field(default_factory=list)

    @property
    def lr_trace(self) -> List[float]:
        return [epoch.learning_rate for epoch in self.epochs]

    @property
    def val_losses(self) -> List[float]:
        return [epoch.val_loss for epoch in self.epochs]
