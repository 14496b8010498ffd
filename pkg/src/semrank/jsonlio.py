"""File formats: JSONL streams, flat config files, run manifests.

All writes are atomic (temp file + rename in the target directory), so
an interrupted run never leaves a truncated output behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator

from .model import DecodeRequest, ValidationError, request_from_dict, validate_request


class JsonlError(ValidationError):
    """A malformed line, reported with its 1-based line number."""

    def __init__(self, path: str | Path, line_no: int, message: str) -> None:
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, parsed object) pairs, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise JsonlError(path, line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise JsonlError(path, line_no, "expected a JSON object")
            yield line_no, obj


def load_requests(path: str | Path, validate: bool = True) -> list[DecodeRequest]:
    requests = []
    for line_no, obj in read_jsonl(path):
        try:
            req = request_from_dict(obj)
            if validate:
                validate_request(req)
        except ValidationError as exc:
            raise JsonlError(path, line_no, str(exc)) from exc
        requests.append(req)
    return requests


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    lines = [json.dumps(rec, sort_keys=True) for rec in records]
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return len(lines)


def write_json(path: str | Path, obj: object) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Parse the flat `key = value` grammar with `#` comments."""
    raw: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise JsonlError(path, line_no, "expected 'key = value'")
            key, value = (part.strip() for part in stripped.split("=", 1))
            if not key:
                raise JsonlError(path, line_no, "empty key")
            raw[key] = value
    return raw


def format_config(cfg_dict: dict[str, object]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in sorted(cfg_dict.items()))


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
