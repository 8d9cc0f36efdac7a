"""Module providing tests for checkpoint save/load."""

from pathlib import Path

import pytest
import torch

from secsemcom.core.errors import CheckpointError
from secsemcom.models import build_codec
from secsemcom.schemas import CodecConfig, RunStage, TrainConfig
from secsemcom.services.checkpoint_service import load_checkpoint, save_checkpoint


@pytest.fixture
def saved(tmp_path: Path, tiny_train_config: TrainConfig) -> Path:
    encoder, decoder = build_codec(tiny_train_config.codec, init_seed=4)
    return save_checkpoint(
        tmp_path / "run-x" / "checkpoints" / "train.pt",
        encoder,
        decoder,
        stage=RunStage.TRAIN,
        run_id="run-x",
        train_config=tiny_train_config,
    )


class TestCheckpointService:
    """Test suite for save_checkpoint and load_checkpoint."""

    def test_round_trip_restores_weights(
        self, saved: Path, tiny_train_config: TrainConfig
    ) -> None:
        """Test a loaded codec reproduces the saved one."""
        encoder, decoder = build_codec(tiny_train_config.codec, init_seed=4)

        loaded = load_checkpoint(saved, expected_codec=tiny_train_config.codec)

        images = torch.rand(2, 3, 16, 16)
        with torch.no_grad():
            assert torch.equal(loaded.encoder(images), encoder(images))
            latent = encoder(images)
            assert torch.equal(loaded.decoder(latent), decoder(latent))
        assert not loaded.encoder.training
        assert loaded.stage is RunStage.TRAIN
        assert loaded.run_id == "run-x"
        assert loaded.train_config == tiny_train_config
        assert loaded.run_dir == saved.parent.parent

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(CheckpointError, match="checkpoint not found"):
            load_checkpoint(tmp_path / "nope.pt")

    def test_unreadable_file(self, tmp_path: Path) -> None:
        path = tmp_path / "junk.pt"
        path.write_bytes(b"definitely not a checkpoint")

        with pytest.raises(CheckpointError, match="cannot read checkpoint"):
            load_checkpoint(path)

    def test_codec_mismatch(self, saved: Path, tiny_codec_config: CodecConfig) -> None:
        """Test loading into a different architecture fails loudly."""
        other = tiny_codec_config.model_copy(update={"num_filters": 16})

        with pytest.raises(CheckpointError, match="different codec configuration"):
            load_checkpoint(saved, expected_codec=other)

    def test_format_version_checked(self, saved: Path) -> None:
        payload = torch.load(saved, weights_only=True)
        payload["format_version"] = 99
        torch.save(payload, saved)

        with pytest.raises(CheckpointError, match="format version 99"):
            load_checkpoint(saved)

    def test_mismatched_weights(self, saved: Path) -> None:
        payload = torch.load(saved, weights_only=True)
        payload["decoder"] = {}
        torch.save(payload, saved)

        with pytest.raises(CheckpointError, match="mismatched weights"):
            load_checkpoint(saved)

    def test_run_dir_outside_layout(
        self, tmp_path: Path, tiny_codec_config: CodecConfig
    ) -> None:
        encoder, decoder = build_codec(tiny_codec_config, init_seed=0)
        path = save_checkpoint(
            tmp_path / "loose.pt", encoder, decoder, stage=RunStage.PRETRAIN, run_id="r"
        )

        loaded = load_checkpoint(path)

        assert loaded.run_dir is None
        assert loaded.train_config is None
        assert loaded.stage is RunStage.PRETRAIN
