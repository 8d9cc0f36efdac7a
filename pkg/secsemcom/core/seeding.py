"""Labelled seed derivation.

Every random stream in a run is derived from the master seed and a tuple of
labels, so training noise, evaluation noise and fading never share a stream
and any stream can be replayed from the RunRecord alone.
"""

import zlib

import numpy as np
import torch


def _label_key(label: object) -> int:
    if isinstance(label, bool):
        return int(label)
    if isinstance(label, int):
        if label < 0:
            raise ValueError(f"seed labels must be non-negative, got {label}")
        return label
    return zlib.crc32(str(label).encode("utf-8"))


def derive_seed(master_seed: int, *labels: object) -> int:
    """Derive an independent 63-bit seed from a master seed and labels.

    Args:
        master_seed: Non-negative seed recorded in the RunRecord
        *labels: Strings or non-negative ints naming the stream

    Returns:
        int: Seed usable with ``torch.Generator.manual_seed``
    """
    if master_seed < 0:
        raise ValueError(f"master_seed must be non-negative, got {master_seed}")
    sequence = np.random.SeedSequence(
        entropy=master_seed, spawn_key=tuple(_label_key(label) for label in labels)
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_generator(
    seed: int, device: torch.device | str = "cpu"
) -> torch.Generator:
    """Create a torch generator seeded with ``seed`` on ``device``."""
    generator = torch.Generator(device=device)
    generator.manual_seed(seed)
    return generator
