"""Differentiable simulated channels towards Bob and Eve."""

from typing import Optional

import torch

from secsemcom.channel.miso import (
    ChannelRealization,
    miso_pair,
    mrt_precoder,
    rotate_pairs,
    sample_miso_realization,
)
from secsemcom.channel.noise import (
    ChannelStreams,
    awgn_pair,
    identity_pair,
    noise_powers,
    snr_to_noise_power,
)
from secsemcom.schemas.channel_schemas import ChannelConfig, ChannelKind


def transmit_pair(
    x: torch.Tensor,
    config: ChannelConfig,
    streams: ChannelStreams,
    realization: Optional[ChannelRealization] = None,
    p: float = 1.0,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Send a power-normalized batch through the configured channel.

    For MISO a realization is drawn from ``streams.fading`` when none is
    given.
    """
    if config.kind is ChannelKind.IDENTITY:
        return identity_pair(x)
    if config.kind is ChannelKind.AWGN:
        return awgn_pair(x, config, streams, p)
    if realization is None:
        realization = sample_miso_realization(config.antennas, streams.fading)
    return miso_pair(x, realization, config, streams, p)


__all__ = [
    "ChannelRealization",
    "ChannelStreams",
    "awgn_pair",
    "identity_pair",
    "miso_pair",
    "mrt_precoder",
    "noise_powers",
    "rotate_pairs",
    "sample_miso_realization",
    "snr_to_noise_power",
    "transmit_pair",
]
