"""Module providing the pretraining and training loops.

Every step follows the same path::

    s -> encoder -> power_normalize -> channel -> shared decoder -> objective

The decoder is run on Eve's output only when the objective looks at it.
All randomness is derived from ``TrainConfig.master_seed``: parameter
initialisation, the per-epoch shuffle and the per-batch channel streams,
so two runs with the same config produce identical loss curves.
"""

import hashlib
import logging
import math
import time
from pathlib import Path
from typing import Optional

import torch

from secsemcom.channel import ChannelStreams, transmit_pair
from secsemcom.core.config import Settings, get_settings
from secsemcom.core.config_file import dump_train_config
from secsemcom.core.errors import ConfigurationError, DatasetError, TrainingDivergedError
from secsemcom.core.seeding import derive_seed
from secsemcom.data.dataset import BatchPlan, DatasetSplit, load_dataset, make_batches
from secsemcom.models.codec import Decoder, Encoder, build_codec, power_normalize
from secsemcom.objectives import compute_objective, needs_eve_branch
from secsemcom.schemas.channel_schemas import ChannelConfig, ChannelKind
from secsemcom.schemas.objective_schemas import LossReport, ObjectiveConfig, ObjectiveKind
from secsemcom.schemas.run_schemas import EpochRecord, RunRecord, RunStage, TrainConfig
from secsemcom.services.checkpoint_service import load_checkpoint, save_checkpoint
from secsemcom.services.record_service import RecordService
from secsemcom.services.storage_service import StorageService

logger = logging.getLogger(__name__)


def make_run_id(config: TrainConfig, stage: RunStage) -> str:
    """Deterministic run id derived from the stage and the canonical config."""
    digest = hashlib.sha256(dump_train_config(config).encode("utf-8")).hexdigest()
    return (
        f"{stage.value}-{config.channel.kind.value}-{config.objective.kind.value}"
        f"-seed{config.master_seed}-{digest[:10]}"
    )


def pretraining_config(config: TrainConfig) -> TrainConfig:
    """The MSE / noiseless-link variant of ``config`` used for pretraining."""
    return config.model_copy(
        update={
            "channel": ChannelConfig(kind=ChannelKind.IDENTITY),
            "objective": ObjectiveConfig(kind=ObjectiveKind.MSE),
            "pretrain_checkpoint": None,
        }
    )


def run_seeds(config: TrainConfig) -> dict[str, int]:
    """Named seeds of a run, all derived from the master seed."""
    master = config.master_seed
    return {
        "master": master,
        "init": derive_seed(master, "init"),
        "shuffle": derive_seed(master, "shuffle"),
        "channel": derive_seed(master, "train", "channel", config.channel.noise_seed),
    }


def train_step(
    encoder: Encoder,
    decoder: Decoder,
    optimizer: torch.optim.Optimizer,
    images: torch.Tensor,
    config: TrainConfig,
    streams: ChannelStreams,
    epoch: int = 0,
    step: int = 0,
) -> LossReport:
    """One optimizer step on a batch.

    Raises:
        TrainingDivergedError: If the objective is NaN or infinite; no
            parameter update is applied in that case
    """
    optimizer.zero_grad(set_to_none=True)
    p = config.codec.power_budget
    x = power_normalize(encoder(images), p)
    y_b, y_e = transmit_pair(x, config.channel, streams, p=p)
    s_hat_b = decoder(y_b)
    s_hat_e = decoder(y_e) if needs_eve_branch(config.objective) else None
    loss, report = compute_objective(images, s_hat_b, s_hat_e, config.objective)
    if not torch.isfinite(loss):
        raise TrainingDivergedError(
            f"training diverged: loss is {float(loss.detach())} at epoch {epoch}, "
            f"step {step}",
            epoch=epoch,
            step=step,
        )
    loss.backward()
    optimizer.step()
    return report


def _epoch_record(epoch: int, reports: list[LossReport], seconds: float) -> EpochRecord:
    count = len(reports)
    return EpochRecord(
        epoch=epoch,
        loss=math.fsum(r.total for r in reports) / count,
        bob_distortion=math.fsum(r.bob_distortion for r in reports) / count,
        eve_blackness_distance=math.fsum(r.eve_blackness_distance for r in reports)
        / count,
        penalty_active_fraction=math.fsum(r.penalty_active_fraction for r in reports)
        / count,
        seconds=seconds,
    )


class TrainingService:
    """Service running pretraining and (secure) training runs."""

    def __init__(
        self,
        storage: Optional[StorageService] = None,
        settings: Optional[Settings] = None,
    ) -> None:
        """Initialize the training service.

        Args:
            storage: Storage for run directories; defaults to SECSEMCOM_OUT_DIR
            settings: Process settings; defaults to the module-level instance
        """
        self.settings = settings or get_settings()
        self.storage = storage or StorageService(self.settings.SECSEMCOM_OUT_DIR)
        self.records = RecordService(self.storage)
        self.device = self.settings.torch_device

    def load_train_split(
        self, config: TrainConfig, data_root: Optional[Path] = None
    ) -> DatasetSplit:
        """Load the training split the way ``config`` asks for it."""
        root = self.settings.resolved_data_root(data_root)
        return load_dataset(
            root,
            "train",
            image_shape=config.codec.input_shape,
            resize=config.data.resize,
            max_per_class=config.data.max_per_class,
            num_workers=self.settings.SECSEMCOM_NUM_WORKERS,
        )

    def _initial_codec(
        self, config: TrainConfig, init_seed: int
    ) -> tuple[Encoder, Decoder]:
        if config.pretrain_checkpoint is None:
            return build_codec(config.codec, init_seed)
        loaded = load_checkpoint(
            config.pretrain_checkpoint, expected_codec=config.codec, device=self.device
        )
        logger.info(f"Starting from pretrained weights {config.pretrain_checkpoint}")
        return loaded.encoder, loaded.decoder

    def fit(
        self,
        config: TrainConfig,
        stage: RunStage = RunStage.TRAIN,
        data_root: Optional[Path] = None,
        train_split: Optional[DatasetSplit] = None,
        run_id: Optional[str] = None,
    ) -> RunRecord:
        """Run a full training loop and persist its record and checkpoint.

        Args:
            config: Training configuration, used as given
            stage: Stage label stored in the record and checkpoint
            data_root: Corpus root overriding SECSEMCOM_DATA_ROOT
            train_split: Preloaded training split; skips reading the corpus
            run_id: Explicit run id; defaults to ``make_run_id``

        Returns:
            RunRecord: The completed record

        Raises:
            TrainingDivergedError: If the loss becomes NaN or infinite; the
                record is left without its completion marker
        """
        split = train_split if train_split is not None else self.load_train_split(
            config, data_root
        )
        if split.image_shape != config.codec.image_chw:
            raise DatasetError(
                f"training images have shape {split.image_shape}, codec expects "
                f"{config.codec.image_chw}"
            )
        if config.data.drop_last and config.batch_size > len(split):
            raise ConfigurationError(
                f"batch_size {config.batch_size} exceeds the {len(split)} training "
                "images and drop_last is set: no batch would be produced"
            )

        seeds = run_seeds(config)
        encoder, decoder = self._initial_codec(config, seeds["init"])
        encoder.to(self.device).train()
        decoder.to(self.device).train()
        optimizer = torch.optim.Adam(
            [*encoder.parameters(), *decoder.parameters()],
            lr=config.optimizer.learning_rate,
            betas=(config.optimizer.beta1, config.optimizer.beta2),
        )

        record = RunRecord(
            run_id=run_id or make_run_id(config, stage),
            stage=stage,
            config=config,
            seeds=seeds,
            bandwidth_ratio=config.codec.bandwidth_ratio,
        )
        self.records.start(record)
        logger.info(
            f"Starting {stage.value} run {record.run_id}: {len(split)} images, "
            f"{config.epochs} epochs, channel={config.channel.kind.value}, "
            f"objective={config.objective.label}"
        )

        started = time.perf_counter()
        step = 0
        for epoch in range(config.epochs):
            epoch_started = time.perf_counter()
            batches = make_batches(
                split,
                BatchPlan(
                    config.batch_size,
                    shuffle_seed=derive_seed(seeds["shuffle"], epoch),
                    drop_last=config.data.drop_last,
                    check_range=self.settings.is_ci_environment,
                ),
            )
            reports: list[LossReport] = []
            for index, images in enumerate(batches):
                streams = ChannelStreams.from_seed(
                    derive_seed(seeds["channel"], epoch, index), self.device
                )
                try:
                    report = train_step(
                        encoder,
                        decoder,
                        optimizer,
                        images.to(self.device),
                        config,
                        streams,
                        epoch=epoch,
                        step=step,
                    )
                except TrainingDivergedError as e:
                    logger.error(f"Run {record.run_id} aborted: {e}")
                    self.records.log_abort(record.run_id, str(e), e.epoch, e.step)
                    raise
                reports.append(report)
                step += 1

            epoch_record = _epoch_record(
                epoch, reports, time.perf_counter() - epoch_started
            )
            record.epochs.append(epoch_record)
            self.records.log_epoch(record.run_id, epoch_record)
            logger.info(
                f"epoch {epoch + 1}/{config.epochs} loss={epoch_record.loss:.6f} "
                f"bob_mse={epoch_record.bob_distortion:.6f} "
                f"eve_black={epoch_record.eve_blackness_distance:.6f} "
                f"active={epoch_record.penalty_active_fraction:.3f}"
            )

        encoder.eval()
        decoder.eval()
        checkpoint = save_checkpoint(
            self.storage.run_dir(record.run_id) / "checkpoints" / f"{stage.value}.pt",
            encoder,
            decoder,
            stage=stage,
            run_id=record.run_id,
            train_config=config,
            corpus=record.corpus,
        )
        record.checkpoints.append(str(checkpoint))
        record.wall_clock_seconds = time.perf_counter() - started
        record.completed = True
        self.records.finish(record)
        return record

    def pretrain(
        self,
        config: TrainConfig,
        data_root: Optional[Path] = None,
        train_split: Optional[DatasetSplit] = None,
    ) -> Path:
        """Train on the noiseless link with plain MSE.

        Returns:
            Path: The pretraining checkpoint
        """
        record = self.fit(
            pretraining_config(config),
            stage=RunStage.PRETRAIN,
            data_root=data_root,
            train_split=train_split,
        )
        return Path(record.checkpoints[-1])

    def train(
        self,
        config: TrainConfig,
        data_root: Optional[Path] = None,
        train_split: Optional[DatasetSplit] = None,
    ) -> RunRecord:
        """Train through the configured wiretap channel with its objective."""
        return self.fit(
            config, stage=RunStage.TRAIN, data_root=data_root, train_split=train_split
        )
