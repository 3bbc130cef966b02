"""Pipeline configuration: a TOML file with one section per subcommand.

Keys are the subcommand's flag names (dashes or underscores both accepted);
any flag given on the command line overrides the file. A top-level `seed`
key feeds every subcommand that doesn't set its own. Unknown sections or
keys are rejected rather than ignored.
"""

from __future__ import annotations

import sys
from pathlib import Path
from types import SimpleNamespace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

GLOBAL_KEYS = {"seed"}


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _normalize(key: str) -> str:
    return key.replace("-", "_")


def validate_config(config: dict, command_keys: dict[str, set[str]]) -> None:
    """Reject unknown top-level keys, sections, and per-section keys."""
    for key, value in config.items():
        if key in GLOBAL_KEYS:
            continue
        if key not in command_keys:
            raise ConfigError(f"unknown config section or key: {key}")
        if not isinstance(value, dict):
            raise ConfigError(f"config section {key} must be a table")
        for inner in value:
            if _normalize(inner) not in command_keys[key]:
                raise ConfigError(f"unknown config key {key}.{inner}")


def resolve_options(args, command: str, dests: set[str], defaults: dict, config: dict) -> SimpleNamespace:
    """Effective options: subcommand flag, else the global --seed flag (for
    seed), else config section, else top-level config seed, else the hard
    default."""
    section = {_normalize(k): v for k, v in config.get(command, {}).items()}
    out = {}
    for dest in dests:
        value = getattr(args, dest, None)
        if value is None and dest == "seed":
            value = getattr(args, "global_seed", None)
        if value is None:
            value = section.get(dest)
        if value is None and dest == "seed":
            value = config.get("seed")
        if value is None:
            value = defaults.get(dest)
        out[dest] = value
    return SimpleNamespace(**out)
