"""Returning grades and feedback to an LMS.

Two interchangeable backends: a file drop (one JSON document per essay)
and an HTTP poster.  The HTTP client takes an injectable httpx client so
tests can swap in a mock transport; there is no retry logic here — the
caller decides whether a failed push should be retried.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Protocol

import httpx

from ..errors import ServiceError
from .core import FeedbackExport


class LmsBackend(Protocol):
    def push(self, export: FeedbackExport) -> dict[str, Any]: ...


class FileLmsExporter:
    """Writes each export as pretty JSON under ``directory``."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def push(self, export: FeedbackExport) -> dict[str, Any]:
        path = self.directory / f"{export.essay_id}.json"
        path.write_text(
            json.dumps(export.to_dict(), indent=2, ensure_ascii=False),
            encoding="utf-8",
        )
        return {"backend": "file", "path": str(path)}


class HttpLmsExporter:
    """POSTs exports to ``{base_url}/grades``."""

    def __init__(self, base_url: str, client: httpx.Client | None = None) -> None:
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=30.0)

    def push(self, export: FeedbackExport) -> dict[str, Any]:
        try:
            response = self._client.post(
                f"{self.base_url}/grades", json=export.to_dict()
            )
        except httpx.HTTPError as exc:
            raise ServiceError(f"LMS push failed: {exc}", status_code=502) from exc
        if response.status_code >= 400:
            raise ServiceError(
                f"LMS push rejected with status {response.status_code}",
                status_code=502,
            )
        return {"backend": "http", "status": response.status_code}
