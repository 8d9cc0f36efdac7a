"""Flat ``key = value`` experiment config files.

Keys are dotted ``section.field`` names, e.g.::

    # AWGN, SecureMSE
    channel.kind = awgn
    channel.snr_bob_db = 10
    objective.kind = secure_mse
    objective.lambda = 0.5
    train.batch_size = 32

Sections map onto the TrainConfig sub-models; ``train.*`` keys map onto
TrainConfig itself. Unknown or repeated keys are errors so that typos never
silently fall back to defaults.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from secsemcom.core.errors import ConfigurationError
from secsemcom.schemas.channel_schemas import ChannelConfig
from secsemcom.schemas.codec_schemas import CodecConfig
from secsemcom.schemas.objective_schemas import ObjectiveConfig
from secsemcom.schemas.run_schemas import DataConfig, OptimizerConfig, TrainConfig

logger = logging.getLogger(__name__)

SECTION_MODELS: dict[str, type[BaseModel]] = {
    "codec": CodecConfig,
    "channel": ChannelConfig,
    "objective": ObjectiveConfig,
    "optimizer": OptimizerConfig,
    "data": DataConfig,
}
TRAIN_SECTION = "train"
_NONE_VALUES = {"", "none", "null"}


def _field_keys(model: type[BaseModel]) -> dict[str, str]:
    """Map config-file key names onto model field names."""
    keys = {}
    for name, info in model.model_fields.items():
        keys[info.alias or name] = name
    return keys


def allowed_keys() -> set[str]:
    """All dotted keys accepted in a config file."""
    keys = {
        f"{section}.{key}"
        for section, model in SECTION_MODELS.items()
        for key in _field_keys(model)
    }
    train_fields = set(TrainConfig.model_fields) - set(SECTION_MODELS)
    keys.update(f"{TRAIN_SECTION}.{name}" for name in train_fields)
    return keys


def parse_train_config(text: str, source: str = "<string>") -> TrainConfig:
    """Parse config file text into a validated TrainConfig.

    Args:
        text: File contents
        source: Name used in error messages

    Returns:
        TrainConfig: The validated, immutable configuration

    Raises:
        ConfigurationError: On malformed lines, unknown or duplicate keys, or
            values that fail validation
    """
    known = allowed_keys()
    sections: dict[str, dict[str, Any]] = {name: {} for name in SECTION_MODELS}
    top_level: dict[str, Any] = {}
    seen: set[str] = set()

    # Parsed by hand: dotenv_values keeps the last of repeated keys and reports
    # no line numbers, and both are needed in the errors below.
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)

        parsed: Any = None if value.lower() in _NONE_VALUES else value
        section, name = key.split(".", 1)
        if section == TRAIN_SECTION:
            top_level[name] = parsed
        else:
            sections[section][name] = parsed

    payload: dict[str, Any] = dict(top_level)
    for section, values in sections.items():
        if values:
            payload[section] = values
    try:
        return TrainConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigurationError(f"{source}: invalid configuration: {e}") from e


def load_train_config(path: Path) -> TrainConfig:
    """Read and parse a config file.

    Raises:
        ConfigurationError: If the file does not exist or is invalid
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    logger.debug("Loading train config from %s", path)
    return parse_train_config(path.read_text(encoding="utf-8"), source=str(path))


def _format_value(value: Any) -> str | None:
    if value is None:
        return None
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return "x".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_train_config(config: TrainConfig) -> str:
    """Render the canonical config file text for ``config`` (sorted keys)."""
    lines: list[str] = []
    for section, model in SECTION_MODELS.items():
        sub = getattr(config, section)
        for key, name in _field_keys(model).items():
            formatted = _format_value(getattr(sub, name))
            if formatted is not None:
                lines.append(f"{section}.{key} = {formatted}")
    for name in TrainConfig.model_fields:
        if name in SECTION_MODELS:
            continue
        formatted = _format_value(getattr(config, name))
        if formatted is not None:
            lines.append(f"{TRAIN_SECTION}.{name} = {formatted}")
    return "\n".join(sorted(lines)) + "\n"
