"""Configuration settings module for secsemcom.

This module defines the process-level settings (where the corpus lives,
where runs are written, which device to train on) using Pydantic's
BaseSettings for environment variable loading. Experiment settings such
as the channel or the objective live in ``secsemcom.schemas`` and are
read from config files instead.
"""

import logging
from pathlib import Path
from typing import Literal, Optional

import torch
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from secsemcom.core.errors import ConfigurationError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings configuration.

    Uses pydantic BaseSettings to load config from environment variables.
    Nothing is required at import time; the data root is only demanded by
    the commands that read the corpus.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",  # Ignore extra fields in .env
    )

    SECSEMCOM_ENV: Literal["development", "ci", "production"] = "development"
    SECSEMCOM_DATA_ROOT: Optional[Path] = None
    SECSEMCOM_OUT_DIR: Path = Path("runs")
    SECSEMCOM_DEVICE: str = "cpu"
    SECSEMCOM_LOG_LEVEL: str = "INFO"
    SECSEMCOM_NUM_WORKERS: int = 4

    @field_validator("SECSEMCOM_LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Normalize the log level name and reject unknown levels."""
        level = v.upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator("SECSEMCOM_NUM_WORKERS")
    @classmethod
    def validate_num_workers(cls, v: int) -> int:
        """Decode worker count must be at least one."""
        if v < 1:
            raise ValueError("SECSEMCOM_NUM_WORKERS must be >= 1")
        return v

    @property
    def is_ci_environment(self) -> bool:
        """Return True when running the reduced CI-scale configuration."""
        return self.SECSEMCOM_ENV == "ci"

    @property
    def torch_device(self) -> torch.device:
        """Resolve the configured device, falling back to CPU without CUDA.

        Returns:
            torch.device: The device tensors and modules should live on
        """
        if self.SECSEMCOM_DEVICE.startswith("cuda") and not torch.cuda.is_available():
            logger.warning(
                "SECSEMCOM_DEVICE=%s requested but CUDA is unavailable; using cpu",
                self.SECSEMCOM_DEVICE,
            )
            return torch.device("cpu")
        return torch.device(self.SECSEMCOM_DEVICE)

    def resolved_data_root(self, override: Optional[Path] = None) -> Path:
        """Get the corpus root, preferring an explicit ``--data-root`` flag.

        Args:
            override: Value passed on the command line, if any

        Returns:
            Path: An existing directory holding the Linnaeus 5 layout

        Raises:
            ConfigurationError: If no root is configured or it does not exist
        """
        root = override or self.SECSEMCOM_DATA_ROOT
        if root is None:
            raise ConfigurationError(
                "no data root configured: pass --data-root or set "
                "SECSEMCOM_DATA_ROOT"
            )
        root = Path(root)
        if not root.is_dir():
            raise ConfigurationError(f"data root is not a directory: {root}")
        return root


# settings will be initialized from environment variables or .env file
settings = Settings()


def get_settings() -> Settings:
    """Return the process-wide settings instance."""
    return settings
