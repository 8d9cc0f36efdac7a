"""Module providing the channel configuration schema."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

AWGN_EVE_NOISE_RATIO_DB = 15.0
MISO_EVE_NOISE_RATIO_DB = 0.0
MISO_ANTENNAS = 8


class ChannelKind(str, Enum):
    """Simulated channel between the transmitter and the two receivers."""

    AWGN = "awgn"
    MISO_MRT = "miso_mrt"
    # noiseless link used for pretraining
    IDENTITY = "identity"


class ChannelConfig(BaseModel):
    """Schema describing the legitimate and wiretap channels.

    ``snr_bob_db`` is the transmit SNR at Bob, 10*log10(p / sigma_b^2), and
    ``eve_noise_ratio_db`` is P = sigma_e^2 / sigma_b^2 in dB.
    """

    model_config = ConfigDict(frozen=True)

    kind: ChannelKind = Field(ChannelKind.AWGN, description="Channel model")
    snr_bob_db: float = Field(10.0, description="Transmit SNR at Bob in dB")
    eve_noise_ratio_db: float = Field(
        AWGN_EVE_NOISE_RATIO_DB, description="Eve/Bob noise power ratio P in dB"
    )
    antennas: int = Field(MISO_ANTENNAS, ge=1, description="Transmit antennas N")
    noise_seed: int = Field(0, ge=0, description="Label mixed into noise streams")

    @classmethod
    def awgn(cls, snr_bob_db: float, **overrides: object) -> "ChannelConfig":
        """AWGN wiretap pair with the degraded Eve channel (P = 15 dB)."""
        values: dict[str, object] = {
            "kind": ChannelKind.AWGN,
            "snr_bob_db": snr_bob_db,
            "eve_noise_ratio_db": AWGN_EVE_NOISE_RATIO_DB,
        }
        values.update(overrides)
        return cls.model_validate(values)

    @classmethod
    def miso(cls, snr_bob_db: float, **overrides: object) -> "ChannelConfig":
        """MISO link with MRT precoding, N = 8 and P = 1 (0 dB)."""
        values: dict[str, object] = {
            "kind": ChannelKind.MISO_MRT,
            "snr_bob_db": snr_bob_db,
            "eve_noise_ratio_db": MISO_EVE_NOISE_RATIO_DB,
            "antennas": MISO_ANTENNAS,
        }
        values.update(overrides)
        return cls.model_validate(values)

    @property
    def eve_noise_ratio(self) -> float:
        """P on a linear scale."""
        return float(10.0 ** (self.eve_noise_ratio_db / 10.0))

    @property
    def snr_eve_db(self) -> float:
        """Transmit SNR at Eve, SNR_bob - P (both in dB)."""
        return self.snr_bob_db - self.eve_noise_ratio_db

    def at_snr(self, snr_bob_db: float) -> "ChannelConfig":
        """Copy of this configuration operated at a different Bob SNR."""
        return self.model_copy(update={"snr_bob_db": snr_bob_db})
