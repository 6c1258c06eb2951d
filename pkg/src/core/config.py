from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Получаем абсолютный путь к корневой директории проекта
ROOT_DIR = Path(__file__).resolve().parent.parent.parent
ENV_FILE = ROOT_DIR / ".env"


class Settings(BaseSettings):
    """Настройки процесса, читаются из окружения и .env файла."""

    # Верхняя граница числа рабочих потоков (раунды, декодирование)
    THREADS: int = Field(default=1, ge=1)

    # Логирование
    LOG_LEVEL: str = "INFO"

    # Каталог результатов по умолчанию
    DEFAULT_OUTPUT_DIR: str = "runs"

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_prefix="ROBUSTLENS_",
        env_file=ENV_FILE,
        env_file_encoding="utf-8",
        env_ignore_empty=True,
        extra="ignore"
    )

    @field_validator("LOG_LEVEL")
    @classmethod
    def normalize_level(cls, value: str) -> str:
        value = value.strip().upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"неизвестный уровень логирования: {value}")
        return value


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
