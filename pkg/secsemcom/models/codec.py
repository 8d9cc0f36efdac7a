"""JSC encoder/decoder and the transmit power layer.

Encoder: stem conv, then [feature block -> stride-2 conv -> GDN] per stage,
then a projection to ``latent_channels``; the map is flattened to M real
channel symbols. Decoder mirrors it with [sub-pixel conv -> IGDN -> feature
block] per stage and a sigmoid output so reconstructions lie in [0, 1].
"""

import logging

import torch
from torch import nn

from secsemcom.core.errors import PowerNormalizationError, ShapeMismatchError
from secsemcom.models.gdn import GDN
from secsemcom.schemas.codec_schemas import CodecArchitecture, CodecConfig

logger = logging.getLogger(__name__)

NORM_EPS = 1e-12


def conv3x3(in_channels: int, out_channels: int, stride: int = 1) -> nn.Conv2d:
    return nn.Conv2d(in_channels, out_channels, kernel_size=3, stride=stride, padding=1)


class ResidualBlock(nn.Module):
    """Pre-activation residual block: x + conv(act(conv(act(x))))."""

    def __init__(self, channels: int) -> None:
        super().__init__()
        self.body = nn.Sequential(
            nn.PReLU(),
            conv3x3(channels, channels),
            nn.PReLU(),
            conv3x3(channels, channels),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.body(x)


class ConvBlock(nn.Module):
    """Plain conv + activation used by the full-convolution variant."""

    def __init__(self, channels: int) -> None:
        super().__init__()
        self.conv = conv3x3(channels, channels)
        self.act = nn.PReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.act(self.conv(x))


def feature_block(config: CodecConfig) -> nn.Module:
    if config.architecture is CodecArchitecture.FULL_CONV:
        return ConvBlock(config.num_filters)
    return ResidualBlock(config.num_filters)


class SubPixelUpsample(nn.Module):
    """Convolve to r^2 times the channels and shuffle them into space."""

    def __init__(self, channels: int, upscale_factor: int = 2) -> None:
        super().__init__()
        self.conv = conv3x3(channels, channels * upscale_factor**2)
        self.shuffle = nn.PixelShuffle(upscale_factor)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.shuffle(self.conv(x))


class Encoder(nn.Module):
    """JSC encoder f(s; theta) producing a (B, M) pre-normalization latent."""

    def __init__(self, config: CodecConfig) -> None:
        super().__init__()
        self.config = config
        channels, _, _ = config.image_chw
        width = config.num_filters
        self.stem = conv3x3(channels, width)
        self.stages = nn.ModuleList(
            nn.Sequential(
                feature_block(config),
                conv3x3(width, width, stride=2),
                GDN(width),
            )
            for _ in range(config.downsample_stages)
        )
        self.project = conv3x3(width, config.latent_channels)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        expected = self.config.image_chw
        if images.dim() != 4 or tuple(images.shape[1:]) != expected:
            raise ShapeMismatchError(
                f"encoder expects images of shape (B, {expected[0]}, "
                f"{expected[1]}, {expected[2]}), got {tuple(images.shape)}"
            )
        h = self.stem(images)
        for stage in self.stages:
            h = stage(h)
        return self.project(h).flatten(start_dim=1)


class Decoder(nn.Module):
    """JSC decoder g(y; Theta), shared by Bob and Eve."""

    def __init__(self, config: CodecConfig) -> None:
        super().__init__()
        self.config = config
        channels, _, _ = config.image_chw
        width = config.num_filters
        self.head = conv3x3(config.latent_channels, width)
        self.stages = nn.ModuleList(
            nn.Sequential(
                SubPixelUpsample(width),
                GDN(width, inverse=True),
                feature_block(config),
            )
            for _ in range(config.downsample_stages)
        )
        self.output = conv3x3(width, channels)

    def forward(self, y: torch.Tensor) -> torch.Tensor:
        latent_dim = self.config.latent_dim
        if y.dim() != 2 or y.shape[1] != latent_dim:
            raise ShapeMismatchError(
                f"decoder expects a (B, {latent_dim}) latent, got {tuple(y.shape)}"
            )
        h = self.head(y.reshape(y.shape[0], *self.config.latent_shape))
        for stage in self.stages:
            h = stage(h)
        return torch.sigmoid(self.output(h))


def build_codec(
    config: CodecConfig, init_seed: int, dtype: torch.dtype = torch.float32
) -> tuple[Encoder, Decoder]:
    """Create an encoder/decoder pair initialised from ``init_seed``.

    The global RNG state is restored afterwards, so building a codec never
    perturbs other random streams.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(init_seed)
        encoder = Encoder(config).to(dtype)
        decoder = Decoder(config).to(dtype)
    logger.debug(
        "Built %s codec: M=%d, bandwidth ratio %.4f",
        config.architecture.value,
        config.latent_dim,
        config.bandwidth_ratio,
    )
    return encoder, decoder


def encode(images: torch.Tensor, encoder: Encoder) -> torch.Tensor:
    """Pre-normalization latent x = f(s; theta), shape (B, M)."""
    return encoder(images)


def decode(y: torch.Tensor, decoder: Decoder) -> torch.Tensor:
    """Reconstruction g(y; Theta), shape (B, C, H, W) with values in [0, 1]."""
    return decoder(y)


def power_normalize(z: torch.Tensor, p: float = 1.0) -> torch.Tensor:
    """Scale each latent to x = sqrt(M p) z / ||z||_2, so (1/M)||x||^2 = p.

    Raises:
        PowerNormalizationError: If some latent vector is identically zero
    """
    if p <= 0:
        raise ValueError(f"power budget must be positive, got {p}")
    if z.dim() != 2:
        raise ShapeMismatchError(f"expected a (B, M) latent, got {tuple(z.shape)}")
    energy = (z * z).sum(dim=1, keepdim=True)
    if bool((energy == 0).any()):
        raise PowerNormalizationError("zero-power latent")
    latent_dim = z.shape[1]
    return (latent_dim * p) ** 0.5 * z / torch.sqrt(energy + NORM_EPS)


def average_power(x: torch.Tensor) -> torch.Tensor:
    """Per-item average symbol power (1/M)||x||^2."""
    return (x * x).mean(dim=1)
