"""Module providing the codec configuration schema."""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class CodecArchitecture(str, Enum):
    """Feature extractor used between the resampling layers."""

    RESIDUAL = "residual"
    FULL_CONV = "full_conv"


class CodecConfig(BaseModel):
    """Schema describing the JSC encoder/decoder pair.

    The defaults reproduce the reference architecture: 128 filters, three
    spatial halvings of a 128x128x3 image and 8 latent channels, i.e.
    M = 16 * 16 * 8 = 2048 real channel symbols.
    """

    model_config = ConfigDict(frozen=True)

    num_filters: int = Field(128, gt=0, description="Channel width of every block")
    latent_channels: int = Field(8, gt=0, description="Latent channel count C_z")
    downsample_stages: int = Field(
        3, ge=0, description="Number of stride-2 spatial halvings"
    )
    input_shape: tuple[int, int, int] = Field(
        (128, 128, 3), description="Image shape as height, width, channels"
    )
    architecture: CodecArchitecture = Field(
        CodecArchitecture.RESIDUAL, description="Residual cascade or plain convs"
    )
    power_budget: float = Field(
        1.0, gt=0, description="Average per-symbol transmit power p"
    )

    @field_validator("input_shape", mode="before")
    @classmethod
    def parse_input_shape(cls, v: Any) -> Any:
        """Accept the ``128x128x3`` spelling used in config files."""
        if isinstance(v, str):
            parts = v.lower().replace(",", "x").split("x")
            return tuple(int(p.strip()) for p in parts if p.strip())
        return v

    @model_validator(mode="after")
    def check_divisible(self) -> "CodecConfig":
        """Image sides must be positive and divisible by 2**downsample_stages."""
        height, width, channels = self.input_shape
        if min(height, width, channels) <= 0:
            raise ValueError(f"input_shape must be positive, got {self.input_shape}")
        factor = 2**self.downsample_stages
        if height % factor or width % factor:
            raise ValueError(
                f"input_shape {height}x{width} is not divisible by {factor} "
                f"({self.downsample_stages} downsampling stages)"
            )
        return self

    @property
    def image_chw(self) -> tuple[int, int, int]:
        """Image shape in torch channel-first order."""
        height, width, channels = self.input_shape
        return channels, height, width

    @property
    def latent_shape(self) -> tuple[int, int, int]:
        """Latent feature map shape (C_z, H', W') before flattening."""
        height, width, _ = self.input_shape
        factor = 2**self.downsample_stages
        return self.latent_channels, height // factor, width // factor

    @property
    def latent_dim(self) -> int:
        """Number of real channel symbols M per image."""
        c, h, w = self.latent_shape
        return c * h * w

    @property
    def bandwidth_ratio(self) -> float:
        """Transmitted symbols per source dimension, M / (H * W * C)."""
        height, width, channels = self.input_shape
        return self.latent_dim / (height * width * channels)
