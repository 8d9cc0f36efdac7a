"""Image corpus ingestion and batching."""

from secsemcom.data.dataset import (
    LINNAEUS_CLASSES,
    BatchPlan,
    BatchSequence,
    DatasetSplit,
    ImageSample,
    black_image,
    load_dataset,
    make_batches,
)

__all__ = [
    "LINNAEUS_CLASSES",
    "BatchPlan",
    "BatchSequence",
    "DatasetSplit",
    "ImageSample",
    "black_image",
    "load_dataset",
    "make_batches",
]
