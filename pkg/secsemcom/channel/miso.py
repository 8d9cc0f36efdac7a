"""MISO wiretap link with maximum ratio transmission towards Bob.

With the MRT precoder v = h_b / ||h_b||^2, Bob's effective gain h_b^H v is
exactly one, while Eve sees the complex coefficient

    alpha_e = h_e^H h_b / ||h_b||^2.

The codec emits real symbols, so on Eve's path consecutive entries
(2k, 2k+1) are treated as the real and imaginary part of one complex symbol.
Noise is added with variance sigma^2 per real component on both paths, so
Eve's SNR is |alpha_e|^2 p / sigma_e^2 and alpha_e = 1 reduces to AWGN.
"""

import logging
import math
from dataclasses import dataclass

import torch

from secsemcom.channel.noise import ChannelStreams, gaussian_noise, noise_powers
from secsemcom.core.errors import ChannelError
from secsemcom.schemas.channel_schemas import ChannelConfig

logger = logging.getLogger(__name__)


def mrt_precoder(h_b: torch.Tensor) -> torch.Tensor:
    """Precoder v = h_b / ||h_b||^2 so that h_b^H v = 1.

    Raises:
        ChannelError: If ``h_b`` is the zero vector
    """
    energy = torch.sum(torch.abs(h_b) ** 2)
    if float(energy) == 0.0:
        raise ChannelError("zero channel vector: MRT precoder undefined")
    return h_b / energy


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Fading vectors of both receivers and Eve's effective coefficient."""

    h_b: torch.Tensor
    h_e: torch.Tensor
    alpha_e: complex

    @classmethod
    def from_channels(cls, h_b: torch.Tensor, h_e: torch.Tensor) -> "ChannelRealization":
        """Derive alpha_e = h_e^H v under the MRT precoder."""
        if h_b.shape != h_e.shape or h_b.dim() != 1:
            raise ChannelError(
                f"channel vectors must be 1-D with equal length, got "
                f"{tuple(h_b.shape)} and {tuple(h_e.shape)}"
            )
        v = mrt_precoder(h_b)
        alpha = torch.vdot(h_e, v)
        return cls(h_b=h_b, h_e=h_e, alpha_e=complex(alpha.item()))

    @property
    def antennas(self) -> int:
        return int(self.h_b.shape[0])


def sample_miso_realization(
    antennas: int, generator: torch.Generator
) -> ChannelRealization:
    """Draw i.i.d. CN(0, 1) Rayleigh channels for Bob and Eve."""
    if antennas < 1:
        raise ChannelError(f"antenna count must be >= 1, got {antennas}")
    parts = torch.randn(
        (4, antennas), generator=generator, dtype=torch.float64,
        device=generator.device,
    ) / math.sqrt(2.0)
    h_b = torch.complex(parts[0], parts[1]).cpu()
    h_e = torch.complex(parts[2], parts[3]).cpu()
    return ChannelRealization.from_channels(h_b, h_e)


def rotate_pairs(x: torch.Tensor, alpha: complex) -> torch.Tensor:
    """Multiply the complex symbols x[2k] + j x[2k+1] by ``alpha``.

    Raises:
        ChannelError: If the latent length is odd
    """
    if x.shape[-1] % 2:
        raise ChannelError(
            f"latent dimension must be even for complex pairing, got {x.shape[-1]}"
        )
    pairs = x.reshape(*x.shape[:-1], -1, 2)
    re, im = pairs[..., 0], pairs[..., 1]
    a, b = alpha.real, alpha.imag
    rotated = torch.stack((a * re - b * im, b * re + a * im), dim=-1)
    return rotated.reshape(x.shape)


def miso_pair(
    x: torch.Tensor,
    realization: ChannelRealization,
    config: ChannelConfig,
    streams: ChannelStreams,
    p: float = 1.0,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Bob and Eve outputs y_b = x + n_b, y_e = alpha_e x + n_e."""
    sigma_b2, sigma_e2 = noise_powers(config, p)
    y_e_clean = rotate_pairs(x, realization.alpha_e)
    y_b = x + gaussian_noise(x, sigma_b2, streams.bob)
    y_e = y_e_clean + gaussian_noise(x, sigma_e2, streams.eve)
    return y_b, y_e
