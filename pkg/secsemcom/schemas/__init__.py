"""Pydantic models for configurations, reports and run records."""

from secsemcom.schemas.channel_schemas import ChannelConfig, ChannelKind
from secsemcom.schemas.codec_schemas import CodecArchitecture, CodecConfig
from secsemcom.schemas.metric_schemas import ImageMetrics, MetricReport
from secsemcom.schemas.objective_schemas import (
    LossReport,
    ObjectiveConfig,
    ObjectiveKind,
)
from secsemcom.schemas.run_schemas import (
    DataConfig,
    EpochRecord,
    EvalRow,
    OptimizerConfig,
    Receiver,
    RunRecord,
    RunStage,
    SweepSpec,
    TradeoffPoint,
    TrainConfig,
)

__all__ = [
    "ChannelConfig",
    "ChannelKind",
    "CodecArchitecture",
    "CodecConfig",
    "DataConfig",
    "EpochRecord",
    "EvalRow",
    "ImageMetrics",
    "LossReport",
    "MetricReport",
    "ObjectiveConfig",
    "ObjectiveKind",
    "OptimizerConfig",
    "Receiver",
    "RunRecord",
    "RunStage",
    "SweepSpec",
    "TradeoffPoint",
    "TrainConfig",
]
