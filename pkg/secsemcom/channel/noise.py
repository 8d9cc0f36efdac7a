"""Additive noise channels and the seeded random streams feeding them."""

import math
from dataclasses import dataclass

import torch

from secsemcom.core.seeding import derive_seed, make_generator
from secsemcom.schemas.channel_schemas import ChannelConfig


@dataclass(frozen=True, eq=False)
class ChannelStreams:
    """Independent generators for Bob's noise, Eve's noise and fading."""

    bob: torch.Generator
    eve: torch.Generator
    fading: torch.Generator

    @classmethod
    def from_seed(cls, seed: int, device: torch.device | str = "cpu") -> "ChannelStreams":
        return cls(
            bob=make_generator(derive_seed(seed, "bob"), device),
            eve=make_generator(derive_seed(seed, "eve"), device),
            fading=make_generator(derive_seed(seed, "fading"), device),
        )


def snr_to_noise_power(snr_db: float, p: float = 1.0) -> float:
    """Noise power sigma^2 = p / 10^(snr_db / 10); infinite SNR gives 0."""
    if p <= 0:
        raise ValueError(f"signal power must be positive, got {p}")
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return p / 10.0 ** (snr_db / 10.0)


def gaussian_noise(
    like: torch.Tensor, variance: float, generator: torch.Generator
) -> torch.Tensor:
    """Real white Gaussian noise with the shape, dtype and device of ``like``."""
    if variance == 0:
        return torch.zeros_like(like)
    noise = torch.randn(
        like.shape, generator=generator, dtype=like.dtype, device=like.device
    )
    return math.sqrt(variance) * noise


def noise_powers(config: ChannelConfig, p: float = 1.0) -> tuple[float, float]:
    """(sigma_b^2, sigma_e^2) for a channel configuration."""
    sigma_b2 = snr_to_noise_power(config.snr_bob_db, p)
    return sigma_b2, config.eve_noise_ratio * sigma_b2


def awgn_pair(
    x: torch.Tensor,
    config: ChannelConfig,
    streams: ChannelStreams,
    p: float = 1.0,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Legitimate and wiretap AWGN outputs y_b = x + n_b, y_e = x + n_e.

    Noise is sampled outside the autograd graph; gradients flow through x.
    """
    sigma_b2, sigma_e2 = noise_powers(config, p)
    y_b = x + gaussian_noise(x, sigma_b2, streams.bob)
    y_e = x + gaussian_noise(x, sigma_e2, streams.eve)
    return y_b, y_e


def identity_pair(x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Noiseless link: both receivers observe x."""
    return x, x
