"""Module providing checkpoint save/load for the services."""

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import torch
from pydantic import ValidationError

from secsemcom.core.errors import CheckpointError
from secsemcom.models.codec import Decoder, Encoder
from secsemcom.schemas.codec_schemas import CodecConfig
from secsemcom.schemas.run_schemas import RunStage, TrainConfig
from secsemcom.services.storage_service import StorageService

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class LoadedCheckpoint:
    """A restored codec plus the metadata stored next to its weights."""

    encoder: Encoder
    decoder: Decoder
    codec: CodecConfig
    stage: RunStage
    run_id: str
    corpus: str
    train_config: Optional[TrainConfig]
    path: Path

    @property
    def run_dir(self) -> Optional[Path]:
        """Run directory the checkpoint was written into, if it follows the layout."""
        if self.path.parent.name == "checkpoints":
            return self.path.parent.parent
        return None


def save_checkpoint(
    path: Path,
    encoder: Encoder,
    decoder: Decoder,
    stage: RunStage,
    run_id: str,
    train_config: Optional[TrainConfig] = None,
    corpus: str = "linnaeus5",
) -> Path:
    """Atomically write encoder/decoder weights and their metadata.

    Args:
        path: Destination file
        encoder: Trained encoder
        decoder: Trained decoder
        stage: Which stage produced the weights
        run_id: Run the weights belong to
        train_config: Full training configuration, if available
        corpus: Corpus label

    Returns:
        Path: Absolute path of the checkpoint
    """
    payload: dict[str, Any] = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "stage": stage.value,
        "run_id": run_id,
        "corpus": corpus,
        "codec": encoder.config.model_dump(mode="json"),
        "train_config": (
            train_config.model_dump(mode="json") if train_config is not None else None
        ),
        "encoder": encoder.state_dict(),
        "decoder": decoder.state_dict(),
    }
    buffer = io.BytesIO()
    torch.save(payload, buffer)
    written = StorageService.save_file_at(buffer.getvalue(), Path(path))
    logger.info(f"Saved {stage.value} checkpoint to {written}")
    return written


def load_checkpoint(
    path: Path,
    expected_codec: Optional[CodecConfig] = None,
    device: torch.device | str = "cpu",
) -> LoadedCheckpoint:
    """Restore a codec from a checkpoint file.

    Args:
        path: Checkpoint file
        expected_codec: When given, the stored CodecConfig must equal it
        device: Device to place the modules on

    Returns:
        LoadedCheckpoint: Encoder/decoder in eval mode plus metadata

    Raises:
        CheckpointError: If the file is missing, unreadable, of another
            format version or built for another codec configuration
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location=device, weights_only=True)
    except Exception as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(payload, dict):
        raise CheckpointError(f"cannot read checkpoint {path}: unexpected content")

    version = payload.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format version {version}, "
            f"expected {CHECKPOINT_FORMAT_VERSION}"
        )

    try:
        codec = CodecConfig.model_validate(payload["codec"])
        train_config = (
            TrainConfig.model_validate(payload["train_config"])
            if payload.get("train_config") is not None
            else None
        )
        stage = RunStage(payload["stage"])
    except (KeyError, ValueError, ValidationError) as e:
        raise CheckpointError(f"checkpoint {path} has invalid metadata: {e}") from e

    if expected_codec is not None and codec != expected_codec:
        raise CheckpointError(
            f"checkpoint {path} was built for a different codec configuration: "
            f"{codec.model_dump()} != {expected_codec.model_dump()}"
        )

    encoder = Encoder(codec)
    decoder = Decoder(codec)
    try:
        encoder.load_state_dict(payload["encoder"])
        decoder.load_state_dict(payload["decoder"])
    except (KeyError, RuntimeError) as e:
        raise CheckpointError(f"checkpoint {path} has mismatched weights: {e}") from e
    encoder.to(device).eval()
    decoder.to(device).eval()

    logger.info(f"Loaded {stage.value} checkpoint {path}")
    return LoadedCheckpoint(
        encoder=encoder,
        decoder=decoder,
        codec=codec,
        stage=stage,
        run_id=str(payload.get("run_id", path.stem)),
        corpus=str(payload.get("corpus", "linnaeus5")),
        train_config=train_config,
        path=path,
    )
