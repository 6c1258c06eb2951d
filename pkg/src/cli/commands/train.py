"""
Подкоманды train и train-adv.
"""
import argparse
import logging

from src.cli.commands.common import add_run_arguments, load_run_config, run_overrides
from src.service.experiment import run_experiment, run_twins
from src.service.report import format_table

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    for name, adversarial, help_text in (
        ("train", False, "Стандартное обучение по раундам"),
        ("train-adv", True, "Состязательное обучение (FGSM на каждом шаге)"),
    ):
        parser = subparsers.add_parser(name, help=help_text, description=help_text)
        add_run_arguments(parser)
        parser.add_argument("--twins", action="store_true",
                            help="Обучить стандартную и устойчивую модели с одними seed")
        parser.set_defaults(handler=handle, adversarial=adversarial)


def handle(args: argparse.Namespace) -> int:
    overrides = run_overrides(args)
    overrides["adversarial"] = args.adversarial
    config = load_run_config(args.config, overrides)
    logger.info("[CLI] %s: модель %s, раундов %d, seed %d", args.command, config.model if isinstance(config.model, str)
                else config.model.name, config.rounds, config.seed)
    result = run_twins(config) if args.twins else run_experiment(config)
    print(format_table(result.report), end="")
    return 0
