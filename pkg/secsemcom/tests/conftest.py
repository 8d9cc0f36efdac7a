"""Pytest configuration file for the secsemcom tests."""

import logging
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from secsemcom.core.config import Settings
from secsemcom.data.dataset import LINNAEUS_CLASSES, DatasetSplit, load_dataset
from secsemcom.schemas import CodecConfig, OptimizerConfig, TrainConfig

# Setup logger for test configurations
logger = logging.getLogger(__name__)

FIXTURE_SIZE = 16


def write_linnaeus_fixture(
    root: Path,
    per_class: dict[str, int],
    size: int = FIXTURE_SIZE,
    seed: int = 0,
) -> Path:
    """Write a tiny corpus in the Linnaeus 5 layout with smooth random images.

    Args:
        root: Directory that receives ``train/`` and ``test/``
        per_class: Images per class for each split name
        size: Side length of the square RGB images
        seed: Seed of the pixel generator

    Returns:
        Path: ``root``
    """
    rng = np.random.default_rng(seed)
    for split, count in per_class.items():
        for label in LINNAEUS_CLASSES:
            class_dir = root / split / label
            class_dir.mkdir(parents=True, exist_ok=True)
            for index in range(count):
                coarse = rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8)
                image = Image.fromarray(coarse).resize(
                    (size, size), Image.Resampling.BILINEAR
                )
                image.save(class_dir / f"{index}_{label}.png")
    return root


@pytest.fixture
def fixture_corpus(tmp_path: Path) -> Path:
    """Corpus with 20 training and 2 test images per class (100 / 10)."""
    return write_linnaeus_fixture(tmp_path / "linnaeus", {"train": 20, "test": 2})


@pytest.fixture
def train_split(fixture_corpus: Path) -> DatasetSplit:
    return load_dataset(
        fixture_corpus, "train", image_shape=(FIXTURE_SIZE, FIXTURE_SIZE, 3)
    )


@pytest.fixture
def holdout_split(fixture_corpus: Path) -> DatasetSplit:
    return load_dataset(
        fixture_corpus, "test", image_shape=(FIXTURE_SIZE, FIXTURE_SIZE, 3)
    )


@pytest.fixture
def tiny_codec_config() -> CodecConfig:
    """Small codec for 16x16 images: M = 2 * 4 * 4 = 32."""
    return CodecConfig(
        num_filters=8,
        latent_channels=2,
        downsample_stages=2,
        input_shape=(FIXTURE_SIZE, FIXTURE_SIZE, 3),
    )


@pytest.fixture
def tiny_train_config(tiny_codec_config: CodecConfig) -> TrainConfig:
    return TrainConfig(
        codec=tiny_codec_config,
        optimizer=OptimizerConfig(learning_rate=1e-3),
        batch_size=10,
        epochs=2,
    )


@pytest.fixture
def run_settings(tmp_path: Path, fixture_corpus: Path) -> Settings:
    """Settings pointing at the fixture corpus and a temporary output dir."""
    return Settings(
        _env_file=None,
        SECSEMCOM_ENV="ci",
        SECSEMCOM_DATA_ROOT=fixture_corpus,
        SECSEMCOM_OUT_DIR=tmp_path / "runs",
        SECSEMCOM_NUM_WORKERS=2,
    )

