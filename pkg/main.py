import logging
import sys
from typing import List, Optional

from src.cli.router import dispatch
from src.core.config import settings

# Настройка логирования
logging.basicConfig(level=settings.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа командной строки; возвращает код завершения."""
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
