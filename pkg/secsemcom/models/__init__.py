"""Torch modules of the JSC autoencoder."""

from secsemcom.models.codec import (
    Decoder,
    Encoder,
    average_power,
    build_codec,
    decode,
    encode,
    power_normalize,
)
from secsemcom.models.gdn import GDN, gdn

__all__ = [
    "GDN",
    "Decoder",
    "Encoder",
    "average_power",
    "build_codec",
    "decode",
    "encode",
    "gdn",
    "power_normalize",
]
