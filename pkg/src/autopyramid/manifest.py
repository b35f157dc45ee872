"""Run manifests: a sidecar JSON file recording how an output was produced.

Every file a command writes gets ``<file>.manifest.json`` next to it with
the command name, the effective configuration, SHA-256 digests of the
inputs, the tool version, and a timestamp. Everything except the timestamp
is deterministic, so reruns can be diffed. Endpoint URLs are stored with
credentials and query strings stripped; auth tokens live in environment
variables and never reach the manifest.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from urllib.parse import urlsplit, urlunsplit

from . import __version__
from .data import atomic_write_text
from .errors import FileUnreadable


def redact_endpoint(url: str) -> str:
    """Strip userinfo and query/fragment from a URL."""
    parts = urlsplit(url)
    host = parts.hostname or ""
    if parts.port:
        host = f"{host}:{parts.port}"
    return urlunsplit((parts.scheme, host, parts.path, "", ""))


def _redact_config(config: dict) -> dict:
    cleaned = {}
    for key, value in config.items():
        if value is not None and "endpoint" in key and isinstance(value, str):
            cleaned[key] = redact_endpoint(value)
        else:
            cleaned[key] = value
    return cleaned


def file_digest(path) -> str:
    try:
        with open(path, "rb") as handle:
            return hashlib.sha256(handle.read()).hexdigest()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc


def manifest_path(out_path) -> str:
    return f"{out_path}.manifest.json"


def write_manifest(
    out_path,
    *,
    command: str,
    config: dict,
    inputs: list,
    extra: dict | None = None,
) -> str:
    payload = {
        "command": command,
        "config": _redact_config(config),
        "inputs": {str(p): file_digest(p) for p in inputs},
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if extra:
        payload["extra"] = extra
    target = manifest_path(out_path)
    atomic_write_text(
        target, json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    )
    return target
