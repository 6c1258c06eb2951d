from src.service.augmentation import augment, compose, draw_params, sample_rng
from src.service.dataset import DatasetService, batch_iter
from src.service.synthetic import generate_dataset
from src.service.optimizer import AdamState, adam_step
from src.service.schedule import PlateauState, EarlyStopState, plateau_update, early_stop_update
from src.service.adversarial import fgsm, train_step, adversarial_train_step, evaluate_under_attack
from src.service.metrics import confusion, report, aggregate
from src.service.colormap import colormap, overlay
from src.service.stamp import text_glyph, apply_stamp
from src.service.gradcam import gradcam, score_containment, annotation_sensitivity
from src.service.trainer import TrainerService, train_round
from src.service.experiment import run_experiment, run_twins, stamp_experiment, open_dataset

__all__ = [
    # Данные
    "augment",
    "compose",
    "draw_params",
    "sample_rng",
    "DatasetService",
    "batch_iter",
    "generate_dataset",

    # Оптимизация
    "AdamState",
    "adam_step",
    "PlateauState",
    "EarlyStopState",
    "plateau_update",
    "early_stop_update",

    # Атака
    "fgsm",
    "train_step",
    "adversarial_train_step",
    "evaluate_under_attack",

    # Метрики
    "confusion",
    "report",
    "aggregate",

    # Grad-CAM
    "colormap",
    "overlay",
    "text_glyph",
    "apply_stamp",
    "gradcam",
    "score_containment",
    "annotation_sensitivity",

    # Эксперименты
    "TrainerService",
    "train_round",
    "run_experiment",
    "run_twins",
    "stamp_experiment",
    "open_dataset"
]
