"""Shared helpers: JSON-lines I/O, stable hashing, and seed substreams."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Iterator

MANIFEST_KEY = "__manifest__"


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) pairs, skipping blank and manifest lines.

    Line numbers are 1-based so they can be reported in error messages.
    """
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if isinstance(record, dict) and MANIFEST_KEY in record:
                continue
            yield lineno, record


def write_jsonl(path: str | Path, records: Iterable[dict], manifest: dict | None = None) -> None:
    """Write records as JSON-lines; an optional manifest becomes the first line."""
    with open(path, "w", encoding="utf-8") as f:
        if manifest is not None:
            f.write(json.dumps({MANIFEST_KEY: manifest}, sort_keys=True) + "\n")
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def stable_hash(*parts: Any) -> int:
    """Deterministic 63-bit integer hash of the given parts.

    Unlike builtin hash(), the result does not depend on PYTHONHASHSEED or
    the process, so it is safe to derive RNG seeds from it.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def substream(seed: int, *names: Any) -> int:
    """Derive a named child seed from a master seed.

    Every source of randomness in the toolkit draws from a named substream
    of the single run seed, so partial pipeline reruns stay reproducible.
    """
    return stable_hash(seed, *names)
