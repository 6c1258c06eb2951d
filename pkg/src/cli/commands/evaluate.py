"""
Подкоманда eval: метрики контрольной точки на выборке.
"""
import argparse
import logging
from pathlib import Path

from pydantic import ValidationError

from src.cli.commands.common import (
    add_checkpoint_arguments,
    load_model,
    open_split,
    positive_class,
    validation_message
)
from src.core.exceptions import ConfigError
from src.repository.artifacts import ArtifactStore
from src.scheme.attack import AttackConfig
from src.scheme.metrics import ReportRow
from src.service.adversarial import evaluate_under_attack, predict_batches
from src.service.metrics import confusion, report
from src.service.report import build_report, summarize, write_report

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="Оценка контрольной точки",
                                   description="Метрики модели на выборке, при --perturbed и на FGSM-изображениях")
    add_checkpoint_arguments(parser, "eval")
    parser.add_argument("--perturbed", action="store_true", help="Добавить строку оценки на FGSM-изображениях")
    parser.add_argument("--epsilon", type=float, default=None, help="Бюджет FGSM (по умолчанию 0.02)")
    parser.set_defaults(handler=handle)


def attack_config(epsilon) -> AttackConfig:
    try:
        return AttackConfig() if epsilon is None else AttackConfig(epsilon=epsilon)
    except ValidationError as exc:
        raise ConfigError(f"--epsilon: {validation_message(exc)}") from exc


def handle(args: argparse.Namespace) -> int:
    params = load_model(args.checkpoint)
    dataset = open_split(args.manifest, params, args.split)
    positive = positive_class(args, params)
    images, labels = dataset.arrays(args.split)
    name = Path(args.checkpoint).stem

    _, predictions = predict_batches(params, images)
    clean = report(confusion(labels, predictions, params.config.num_classes), positive)
    rows = [ReportRow(name=name, variant="checkpoint", rounds=[clean], metrics=summarize([clean]))]
    if args.perturbed or args.epsilon is not None:
        attack = attack_config(args.epsilon)
        perturbed = evaluate_under_attack(params, images, labels, attack, positive)
        rows.append(ReportRow(name=f"{name}*", variant="checkpoint", epsilon=attack.epsilon, rounds=[perturbed],
                              metrics=summarize([perturbed])))
        logger.info("[ATTACK] %s: точность %.4f -> %.4f при ε=%g", name, clean.accuracy, perturbed.accuracy,
                    attack.epsilon)

    text = write_report(ArtifactStore(args.output), build_report(rows))
    print(text, end="")
    return 0
