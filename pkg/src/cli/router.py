"""
Разбор аргументов и выбор подкоманды.
"""
import argparse
import logging
import sys
from typing import List, Optional

from src.cli.commands import attack, evaluate, gradcam, report, schema, stamp, synth, train
from src.core.constants import EXIT_OK
from src.core.exceptions import RobustLensError, UsageError

logger = logging.getLogger(__name__)

COMMANDS = (train, evaluate, attack, gradcam, report, stamp, synth, schema)


class CliParser(argparse.ArgumentParser):
    """Парсер, который сообщает об ошибке исключением с кодом 1 вместо выхода с кодом 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="robustlens",
        description="Обучение, FGSM-атаки и Grad-CAM для классификаторов рентгенограмм"
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Выполняет подкоманду и возвращает код завершения процесса."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logger.debug("[CLI] Команда %s", args.command)
        code = args.handler(args)
        return EXIT_OK if code is None else code
    except RobustLensError as exc:
        logger.error("[CLI] %s: %s", type(exc).__name__, exc.detail)
        print(f"ошибка: {exc.detail}", file=sys.stderr)
        return exc.exit_code
