import json
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """Базовая схема Pydantic."""
    model_config = ConfigDict(from_attributes=True, extra="forbid")

    def canonical_json(self) -> str:
        """JSON с сортированными ключами и без пробелов."""
        return canonical_dumps(self.model_dump(mode="json"))


def canonical_dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
