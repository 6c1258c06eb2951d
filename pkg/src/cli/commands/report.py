"""
Подкоманда report: сводная таблица по каталогам экспериментов.
"""
import argparse
from pathlib import Path

from src.repository.artifacts import ArtifactStore
from src.service.report import format_table, merge_reports, write_report


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="Сводная таблица",
                                   description="Объединяет report.json или записи раундов нескольких каталогов")
    parser.add_argument("directories", nargs="+", help="Каталоги экспериментов")
    parser.add_argument("--output", default=None, help="Куда записать объединённый отчёт")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    report = merge_reports([Path(directory) for directory in args.directories])
    text = write_report(ArtifactStore(args.output), report) if args.output else format_table(report)
    print(text, end="")
    return 0
