"""Linnaeus 5 ingestion, deterministic splits and seeded batching.

The corpus is read from its published layout::

    <root>/train/<class>/<image>.jpg
    <root>/test/<class>/<image>.jpg

Images are decoded with Pillow, scaled to [0, 1] by dividing 8-bit values
by 255 and held channel-first (C, H, W) as torch expects.
"""

import logging
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, overload

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from secsemcom.core.errors import ConfigurationError, DatasetError, UnknownImageError
from secsemcom.core.seeding import make_generator

logger = logging.getLogger(__name__)

SplitKind = Literal["train", "test"]

LINNAEUS_CLASSES = ("berry", "bird", "dog", "flower", "other")
FULL_CORPUS_PER_CLASS: dict[str, int] = {"train": 1200, "test": 400}
IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp"}


@dataclass(frozen=True, eq=False)
class ImageSample:
    """A decoded image with its class and a stable identifier."""

    pixels: torch.Tensor  # (C, H, W), float32 in [0, 1]
    class_label: str
    source_id: str


@dataclass(frozen=True, eq=False)
class DatasetSplit:
    """Immutable, ordered collection of samples from one split."""

    samples: tuple[ImageSample, ...]
    split_kind: SplitKind

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def source_ids(self) -> list[str]:
        """Sample identifiers in split order."""
        return [sample.source_id for sample in self.samples]

    @property
    def image_shape(self) -> tuple[int, ...]:
        """Channel-first shape shared by every sample."""
        return tuple(self.samples[0].pixels.shape) if self.samples else ()

    def class_counts(self) -> dict[str, int]:
        """Number of samples per class label."""
        return dict(Counter(sample.class_label for sample in self.samples))

    @property
    def is_full_corpus(self) -> bool:
        """True when every class holds exactly the published per-class count."""
        expected = FULL_CORPUS_PER_CLASS[self.split_kind]
        counts = self.class_counts()
        return all(counts.get(label) == expected for label in LINNAEUS_CLASSES)

    def get(self, source_id: str) -> ImageSample:
        """Look a sample up by id.

        Raises:
            UnknownImageError: Naming the valid ids if ``source_id`` is absent
        """
        for sample in self.samples:
            if sample.source_id == source_id:
                return sample
        raise UnknownImageError(
            f"unknown image id {source_id!r}; valid ids: "
            + ", ".join(self.source_ids)
        )

    def stack(self, indices: Sequence[int] | None = None) -> torch.Tensor:
        """Stack (a subset of) the samples into a (B, C, H, W) tensor."""
        chosen = range(len(self.samples)) if indices is None else indices
        return torch.stack([self.samples[i].pixels for i in chosen])


@dataclass(frozen=True, eq=False)
class BatchPlan:
    """How a split is cut into batches."""

    batch_size: int
    shuffle_seed: int = 0
    drop_last: bool = True
    check_range: bool = False

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigurationError(
                f"batch_size must be >= 1, got {self.batch_size}"
            )


@dataclass(frozen=True, eq=False)
class BatchSequence(Sequence[torch.Tensor]):
    """Lazily stacked batches following a fixed permutation of a split."""

    split: DatasetSplit
    plan: BatchPlan
    order: tuple[int, ...] = field(repr=False)

    def __len__(self) -> int:
        full, rest = divmod(len(self.order), self.plan.batch_size)
        return full if self.plan.drop_last or rest == 0 else full + 1

    def batch_indices(self, index: int) -> tuple[int, ...]:
        """Split indices that make up batch ``index``."""
        if not 0 <= index < len(self):
            raise IndexError(f"batch index {index} out of range")
        start = index * self.plan.batch_size
        return self.order[start : start + self.plan.batch_size]

    @overload
    def __getitem__(self, index: int) -> torch.Tensor: ...

    @overload
    def __getitem__(self, index: slice) -> list[torch.Tensor]: ...

    def __getitem__(self, index: int | slice) -> torch.Tensor | list[torch.Tensor]:
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        batch = self.split.stack(self.batch_indices(index))
        if self.plan.check_range and (batch.min() < 0 or batch.max() > 1):
            raise DatasetError(f"batch {index} has pixels outside [0, 1]")
        return batch

    def __iter__(self) -> Iterator[torch.Tensor]:
        for i in range(len(self)):
            yield self[i]


def _decode_image(
    path: Path, channels: int, expected_hw: tuple[int, int] | None, resize: bool
) -> torch.Tensor:
    mode = "RGB" if channels == 3 else "L"
    try:
        with Image.open(path) as img:
            img = img.convert(mode)
            if resize and expected_hw is not None:
                height, width = expected_hw
                if img.size != (width, height):
                    img = img.resize((width, height), Image.Resampling.BICUBIC)
            array = np.asarray(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as e:
        raise DatasetError(f"cannot decode image file {path}: {e}") from e

    if array.ndim == 2:
        array = array[:, :, None]
    if expected_hw is not None and array.shape[:2] != expected_hw:
        raise DatasetError(
            f"image file {path} has dimensions {array.shape[0]}x{array.shape[1]}, "
            f"expected {expected_hw[0]}x{expected_hw[1]}"
        )
    tensor = torch.from_numpy(array.astype(np.float32) / 255.0)
    return tensor.permute(2, 0, 1).contiguous()


def _list_files(split_dir: Path, max_per_class: int | None) -> list[tuple[str, str, Path]]:
    entries: list[tuple[str, str, Path]] = []
    for class_dir in sorted(p for p in split_dir.iterdir() if p.is_dir()):
        if class_dir.name not in LINNAEUS_CLASSES:
            logger.warning("Skipping unknown class directory %s", class_dir)
            continue
        files = sorted(
            p
            for p in class_dir.iterdir()
            if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
        )
        class_entries = [
            (f"{split_dir.name}/{class_dir.name}/{p.stem}", class_dir.name, p)
            for p in files
        ]
        class_entries.sort(key=lambda entry: entry[0])
        if max_per_class is not None:
            class_entries = class_entries[:max_per_class]
        entries.extend(class_entries)
    entries.sort(key=lambda entry: entry[0])
    return entries


def load_dataset(
    root_path: Path,
    split_kind: SplitKind,
    *,
    image_shape: tuple[int, int, int] | None = (128, 128, 3),
    resize: bool = False,
    max_per_class: int | None = None,
    num_workers: int = 4,
) -> DatasetSplit:
    """Load one split of the corpus.

    Args:
        root_path: Directory holding ``train/`` and ``test/``
        split_kind: Which split to read
        image_shape: Expected (H, W, C); ``None`` skips the size check
        resize: Resize images to ``image_shape`` instead of rejecting them
        max_per_class: Keep only the first k images (by id) of each class
        num_workers: Decode threads

    Returns:
        DatasetSplit: Samples ordered by sorted source_id

    Raises:
        ConfigurationError: If the split directory is missing
        DatasetError: If no samples are found or a file is invalid
    """
    split_dir = Path(root_path) / split_kind
    if not split_dir.is_dir():
        raise ConfigurationError(f"missing dataset directory: {split_dir}")

    entries = _list_files(split_dir, max_per_class)
    if not entries:
        raise DatasetError(f"no samples found in {split_dir}")

    channels = image_shape[2] if image_shape is not None else 3
    expected_hw = image_shape[:2] if image_shape is not None else None

    def decode(entry: tuple[str, str, Path]) -> ImageSample:
        source_id, label, path = entry
        pixels = _decode_image(path, channels, expected_hw, resize)
        return ImageSample(pixels=pixels, class_label=label, source_id=source_id)

    with ThreadPoolExecutor(max_workers=num_workers) as pool:
        samples = tuple(pool.map(decode, entries))

    split = DatasetSplit(samples=samples, split_kind=split_kind)
    logger.info(
        "Loaded %d %s images from %s (%s)",
        len(split),
        split_kind,
        split_dir,
        ", ".join(f"{k}={v}" for k, v in sorted(split.class_counts().items())),
    )
    if split.is_full_corpus:
        logger.info("Full Linnaeus 5 %s split detected", split_kind)
    return split


def make_batches(split: DatasetSplit, plan: BatchPlan) -> BatchSequence:
    """Cut a split into batches following a seeded permutation.

    The permutation depends only on ``plan.shuffle_seed`` and the split size.
    A batch size larger than the split yields one partial batch, or nothing
    when ``drop_last`` is set.
    """
    generator = make_generator(plan.shuffle_seed)
    order = torch.randperm(len(split), generator=generator).tolist()
    return BatchSequence(split=split, plan=plan, order=tuple(order))


def black_image(shape: Sequence[int]) -> torch.Tensor:
    """All-zero image (or batch) of the given shape, the darkest valid image."""
    dims = tuple(int(d) for d in shape)
    if not dims or any(d <= 0 for d in dims):
        raise ValueError(f"invalid image shape {tuple(shape)}")
    return torch.zeros(dims)
