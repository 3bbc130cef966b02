"""Model artifact container: one self-describing file per trained model.

An artifact is a torch-serialized dict with keys format_version, kind
("image", "text", or "generator"), config (plain dict snapshot), state_dict,
and kind-specific extras (vocabulary tokens for text and generator models).
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import torch

from .errors import ConfigError

FORMAT_VERSION = 1


def save_artifact(path: str | Path, kind: str, config: dict, state_dict: dict, **extra) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": config,
        "state_dict": state_dict,
    }
    payload.update(extra)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, str(path))


def load_artifact(path: str | Path, expected_kind: str | None = None) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"model artifact not found: {path}")
    payload = torch.load(str(path), map_location="cpu", weights_only=False)
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise ConfigError(f"{path}: not a model artifact")
    if payload["format_version"] != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported artifact version {payload['format_version']}")
    if expected_kind and payload.get("kind") != expected_kind:
        raise ConfigError(f"{path}: artifact kind {payload.get('kind')!r}, expected {expected_kind!r}")
    return payload


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
