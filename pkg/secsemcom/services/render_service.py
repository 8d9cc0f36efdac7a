"""Module providing example panels: original | Bob | Eve side by side."""

import io
import logging
import re
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from secsemcom.channel import ChannelStreams, sample_miso_realization, transmit_pair
from secsemcom.core.seeding import derive_seed, make_generator
from secsemcom.data.dataset import DatasetSplit
from secsemcom.models.codec import power_normalize
from secsemcom.schemas.channel_schemas import ChannelConfig, ChannelKind
from secsemcom.services.checkpoint_service import LoadedCheckpoint
from secsemcom.services.storage_service import StorageService

logger = logging.getLogger(__name__)

_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


def to_pil(image: torch.Tensor) -> Image.Image:
    """Convert a (C, H, W) tensor in [0, 1] to an 8-bit Pillow image."""
    array = (image.detach().cpu().clamp(0, 1) * 255.0).round().to(torch.uint8)
    array_hwc = array.permute(1, 2, 0).numpy()
    if array_hwc.shape[2] == 1:
        return Image.fromarray(np.ascontiguousarray(array_hwc[:, :, 0]))
    return Image.fromarray(np.ascontiguousarray(array_hwc))


def _png_bytes(image: Image.Image) -> bytes:
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


def panel_name(run_id: str, snr_db: float, source_id: str, receiver: str) -> str:
    """File name encoding run id, SNR, image id and receiver."""
    return (
        f"{_UNSAFE.sub('-', run_id)}_snr{snr_db:+.1f}dB_"
        f"{_UNSAFE.sub('-', source_id)}_{receiver}.png"
    )


def render_examples(
    checkpoint: LoadedCheckpoint,
    test_split: DatasetSplit,
    image_ids: Sequence[str],
    snr_db: float,
    channel: ChannelConfig,
    out_dir: Path,
    seed: int = 0,
    device: torch.device | str = "cpu",
) -> list[Path]:
    """Write one panel per image plus the individual reconstructions.

    Each panel is H x 3W: the original, Bob's and Eve's reconstruction.

    Args:
        checkpoint: Codec to render with
        test_split: Split holding the requested images
        image_ids: Source ids of the images
        snr_db: Bob's transmit SNR
        channel: Channel model; its SNR is replaced by ``snr_db``
        out_dir: Directory the PNG files are written to
        seed: Seed of the channel noise and fading
        device: Device the codec lives on

    Returns:
        list[Path]: Written files, four per image (panel, original, bob, eve)

    Raises:
        UnknownImageError: If an id is not in the split; nothing is written
    """
    samples = [test_split.get(image_id) for image_id in image_ids]
    config = channel.at_snr(snr_db)
    p = checkpoint.codec.power_budget
    encoder, decoder = checkpoint.encoder.eval(), checkpoint.decoder.eval()

    written: list[Path] = []
    with torch.no_grad():
        for index, sample in enumerate(samples):
            images = sample.pixels.unsqueeze(0).to(device)
            streams = ChannelStreams.from_seed(
                derive_seed(seed, "render", index), device
            )
            realization = None
            if config.kind is ChannelKind.MISO_MRT:
                realization = sample_miso_realization(
                    config.antennas,
                    make_generator(derive_seed(seed, "render", "fading", index)),
                )
            x = power_normalize(encoder(images), p)
            y_b, y_e = transmit_pair(x, config, streams, realization, p=p)
            views = {
                "original": images[0],
                "bob": decoder(y_b)[0],
                "eve": decoder(y_e)[0],
            }
            views["panel"] = torch.cat(
                [views["original"], views["bob"], views["eve"]], dim=-1
            )
            for receiver in ("panel", "original", "bob", "eve"):
                name = panel_name(checkpoint.run_id, snr_db, sample.source_id, receiver)
                written.append(
                    StorageService.save_file_at(
                        _png_bytes(to_pil(views[receiver])), Path(out_dir) / name
                    )
                )
    logger.info(f"Rendered {len(samples)} panels into {out_dir}")
    return written
