"""Module providing training, sweep and run record schemas."""

from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from secsemcom.schemas.channel_schemas import ChannelConfig, ChannelKind
from secsemcom.schemas.codec_schemas import CodecConfig
from secsemcom.schemas.objective_schemas import ObjectiveConfig

DEFAULT_SNR_POINTS_DB = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)


class Receiver(str, Enum):
    """The two receivers of the wiretap model."""

    BOB = "bob"
    EVE = "eve"


class RunStage(str, Enum):
    """What produced a run record or checkpoint."""

    PRETRAIN = "pretrain"
    TRAIN = "train"


class OptimizerConfig(BaseModel):
    """Adaptive-moment optimizer settings."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["adam"] = "adam"
    learning_rate: float = Field(1e-4, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)


class DataConfig(BaseModel):
    """How the corpus is turned into training batches."""

    model_config = ConfigDict(frozen=True)

    resize: bool = Field(
        False, description="Resize images to codec.input_shape instead of failing"
    )
    max_per_class: Optional[int] = Field(
        None, gt=0, description="Cap on images per class (reduced CPU config)"
    )
    drop_last: bool = True


class TrainConfig(BaseModel):
    """Everything needed to reproduce a training run from the dataset."""

    model_config = ConfigDict(frozen=True)

    codec: CodecConfig = Field(default_factory=CodecConfig)
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    objective: ObjectiveConfig = Field(default_factory=ObjectiveConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    batch_size: int = Field(32, gt=0)
    epochs: int = Field(150, gt=0)
    pretrain_checkpoint: Optional[Path] = None
    master_seed: int = Field(0, ge=0)

    def with_seed(self, master_seed: int) -> "TrainConfig":
        """Copy of this configuration with another master seed."""
        return self.model_copy(update={"master_seed": master_seed})


class SweepSpec(BaseModel):
    """SNR sweep evaluated on the test split."""

    model_config = ConfigDict(frozen=True)

    snr_points_db: tuple[float, ...] = DEFAULT_SNR_POINTS_DB
    receivers: tuple[Receiver, ...] = (Receiver.BOB, Receiver.EVE)
    num_eval_batches: int = Field(
        10, ge=0, description="Test batches per point; 0 evaluates the whole split"
    )
    batch_size: int = Field(32, gt=0)
    eval_seed: int = Field(0, ge=0)

    @field_validator("snr_points_db", "receivers", mode="before")
    @classmethod
    def split_csv(cls, v: object) -> object:
        """Accept comma separated strings from the command line."""
        if isinstance(v, str):
            return tuple(part.strip() for part in v.split(",") if part.strip())
        return v

    @field_validator("receivers")
    @classmethod
    def non_empty_receivers(cls, v: tuple[Receiver, ...]) -> tuple[Receiver, ...]:
        """At least one receiver must be evaluated."""
        if not v:
            raise ValueError("receivers must not be empty")
        return v


class EpochRecord(BaseModel):
    """Loss diagnostics averaged over one training epoch."""

    epoch: int
    loss: float
    bob_distortion: float
    eve_blackness_distance: float = 0.0
    penalty_active_fraction: float = 0.0
    seconds: float = 0.0


class EvalRow(BaseModel):
    """One (channel, SNR, receiver) row of an evaluation sweep."""

    channel_kind: ChannelKind = Field(..., description="Channel the row was measured on")
    eval_seed: int = Field(..., ge=0, description="Seed of the evaluation noise and fading")
    snr_db: float
    receiver: Receiver
    ssim: float = Field(..., description="Windowed SSIM, the headline metric")
    ssim_global: float
    psnr_db: float
    mean_intensity: float
    distance_to_black: float
    transmit_power: float = Field(..., description="Measured (1/M)||x||^2")
    num_images: int

    @property
    def key(self) -> tuple[ChannelKind, float, Receiver]:
        """Identity of a row; a later sweep replaces rows with the same key."""
        return (self.channel_kind, self.snr_db, self.receiver)


class TradeoffPoint(BaseModel):
    """Privacy/quality averages of all runs sharing one lambda."""

    lambda_weight: float
    objective: str
    bob_ssim: float
    eve_ssim: float
    eve_distance_to_black: float
    num_runs: int


class RunRecord(BaseModel):
    """Persisted description of a run: config, seeds, curves and artifacts."""

    run_id: str
    stage: RunStage
    config: TrainConfig
    seeds: dict[str, int] = Field(default_factory=dict)
    corpus: str = "linnaeus5"
    bandwidth_ratio: float = 0.0
    started_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    epochs: list[EpochRecord] = Field(default_factory=list)
    eval_rows: list[EvalRow] = Field(default_factory=list)
    checkpoints: list[str] = Field(default_factory=list)
    wall_clock_seconds: float = 0.0
    completed: bool = False

    @property
    def label(self) -> str:
        """Curve label, e.g. ``SecureMSE``."""
        return self.config.objective.label
