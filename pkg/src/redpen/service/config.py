"""Service configuration from a TOML file.

Example::

    seed = 7
    parallelism = 8
    data_dir = "var/redpen"

    [provider]
    model_id = "mock"
    temperature = 0.05

    [lms]
    kind = "file"          # or "http"
    directory = "var/lms"  # file backend
    base_url = ""          # http backend
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ParseError, ValidationError
from ..providers import ProviderConfig


@dataclass(frozen=True)
class LmsConfig:
    kind: str = "file"
    directory: str = "var/lms"
    base_url: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("file", "http"):
            raise ValidationError(f"lms.kind must be file/http, got {self.kind!r}")
        if self.kind == "http" and not self.base_url:
            raise ValidationError("lms.kind 'http' requires lms.base_url")


@dataclass(frozen=True)
class ServiceConfig:
    seed: int = 0
    parallelism: int = 4
    data_dir: str = ""
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    lms: LmsConfig = field(default_factory=LmsConfig)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ServiceConfig":
        known = {"seed", "parallelism", "data_dir", "provider", "lms"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(
            seed=int(data.get("seed", 0)),
            parallelism=int(data.get("parallelism", 4)),
            data_dir=str(data.get("data_dir", "")),
            provider=ProviderConfig.from_dict(data.get("provider", {})),
            lms=LmsConfig(**data.get("lms", {})),
        )


def load_config(path: str | Path) -> ServiceConfig:
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"invalid TOML in {path}: {exc}") from exc
    return ServiceConfig.from_dict(data)
