"""Module providing SNR sweep evaluation on the test split.

Evaluation never reuses a training stream: noise is drawn from seeds
labelled ``"eval"`` under ``SweepSpec.eval_seed``. For MISO, one channel
realization is drawn per evaluation batch and reused at every SNR point,
so curves across SNR are measured on the same fixed set of channels.
"""

import logging
import math
from collections import defaultdict
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

import torch

from secsemcom.channel import (
    ChannelRealization,
    ChannelStreams,
    sample_miso_realization,
    transmit_pair,
)
from secsemcom.core.config import Settings, get_settings
from secsemcom.core.errors import ConfigurationError, DatasetError
from secsemcom.core.seeding import derive_seed, make_generator
from secsemcom.data.dataset import BatchPlan, DatasetSplit, load_dataset, make_batches
from secsemcom.metrics import measure, ssim_global, summarize
from secsemcom.models.codec import Decoder, Encoder, average_power, power_normalize
from secsemcom.objectives import distance_to_black
from secsemcom.schemas.channel_schemas import ChannelConfig, ChannelKind
from secsemcom.schemas.metric_schemas import MetricReport
from secsemcom.schemas.run_schemas import (
    EvalRow,
    Receiver,
    RunRecord,
    SweepSpec,
    TradeoffPoint,
)
from secsemcom.services.checkpoint_service import LoadedCheckpoint, load_checkpoint
from secsemcom.services.record_service import RecordService
from secsemcom.services.storage_service import RECORD_FILE, StorageService

logger = logging.getLogger(__name__)


def trained_channel_kind(channel: ChannelConfig) -> ChannelKind:
    """Channel kind a model is swept on by default; AWGN after pretraining."""
    if channel.kind is ChannelKind.IDENTITY:
        return ChannelKind.AWGN
    return channel.kind


def default_channel(checkpoint: LoadedCheckpoint) -> ChannelConfig:
    """Channel a checkpoint was trained on, or AWGN for pretrained weights."""
    trained = checkpoint.train_config.channel if checkpoint.train_config else None
    if trained is None or trained.kind is ChannelKind.IDENTITY:
        return ChannelConfig.awgn(10.0)
    return trained


def evaluate_sweep(
    encoder: Encoder,
    decoder: Decoder,
    sweep: SweepSpec,
    channel: ChannelConfig,
    test_split: DatasetSplit,
    device: torch.device | str = "cpu",
    check_range: bool = False,
) -> list[EvalRow]:
    """Measure Bob's and Eve's reconstructions at every SNR point.

    Args:
        encoder: Trained encoder
        decoder: Trained decoder, shared by both receivers
        sweep: SNR points, receivers and batch budget
        channel: Channel model; its ``snr_bob_db`` is replaced per point
        test_split: Held-out images
        device: Device the codec lives on
        check_range: Reject batches with pixels outside [0, 1]

    Returns:
        list[EvalRow]: One row per (SNR, receiver), SNR-major in sweep order,
            labelled with the channel kind and the evaluation seed
    """
    if channel.kind is ChannelKind.IDENTITY:
        raise ConfigurationError("an SNR sweep needs an awgn or miso_mrt channel")
    if tuple(test_split.image_shape) != encoder.config.image_chw:
        raise DatasetError(
            f"test images have shape {test_split.image_shape}, codec expects "
            f"{encoder.config.image_chw}"
        )

    batches = make_batches(
        test_split,
        BatchPlan(
            sweep.batch_size,
            shuffle_seed=derive_seed(sweep.eval_seed, "eval", "order"),
            drop_last=False,
            check_range=check_range,
        ),
    )
    count = len(batches)
    if sweep.num_eval_batches:
        count = min(sweep.num_eval_batches, count)
    p = encoder.config.power_budget

    encoder.eval()
    decoder.eval()
    with torch.no_grad():
        latents = [
            power_normalize(encoder(batches[j].to(device)), p) for j in range(count)
        ]
        realizations: list[Optional[ChannelRealization]] = [
            (
                sample_miso_realization(
                    channel.antennas,
                    make_generator(derive_seed(sweep.eval_seed, "eval", "fading", j)),
                )
                if channel.kind is ChannelKind.MISO_MRT
                else None
            )
            for j in range(count)
        ]
        transmit_power = float(
            torch.cat([average_power(x) for x in latents]).double().mean()
        )

        rows: list[EvalRow] = []
        for point, snr_db in enumerate(sweep.snr_points_db):
            config = channel.at_snr(snr_db)
            reports: dict[Receiver, list[MetricReport]] = defaultdict(list)
            global_ssim: dict[Receiver, list[float]] = defaultdict(list)
            black: dict[Receiver, list[float]] = defaultdict(list)
            for j in range(count):
                images = batches[j].to(device)
                streams = ChannelStreams.from_seed(
                    derive_seed(sweep.eval_seed, "eval", "noise", point, j), device
                )
                y_b, y_e = transmit_pair(
                    latents[j], config, streams, realizations[j], p=p
                )
                outputs = {Receiver.BOB: y_b, Receiver.EVE: y_e}
                for receiver in sweep.receivers:
                    s_hat = decoder(outputs[receiver])
                    reports[receiver].append(measure(images, s_hat, windowed=True))
                    global_ssim[receiver].extend(ssim_global(images, s_hat).tolist())
                    black[receiver].extend(distance_to_black(s_hat).tolist())

            for receiver in sweep.receivers:
                summary = summarize(reports[receiver])
                row = EvalRow(
                    channel_kind=channel.kind,
                    eval_seed=sweep.eval_seed,
                    snr_db=snr_db,
                    receiver=receiver,
                    ssim=summary.ssim,
                    ssim_global=math.fsum(global_ssim[receiver])
                    / len(global_ssim[receiver]),
                    psnr_db=summary.psnr_db,
                    mean_intensity=summary.mean_intensity,
                    distance_to_black=math.fsum(black[receiver]) / len(black[receiver]),
                    transmit_power=transmit_power,
                    num_images=summary.num_images,
                )
                rows.append(row)
                logger.info(
                    f"{channel.kind.value} snr={snr_db:+.1f} dB {receiver.value}: "
                    f"ssim={row.ssim:.4f} "
                    f"psnr={row.psnr_db:.2f} dB d_black={row.distance_to_black:.4f}"
                )
    return rows


def summarize_tradeoff(
    records: Sequence[RunRecord],
    snr_db: Optional[float] = None,
    channel_kind: Optional[ChannelKind] = None,
) -> list[TradeoffPoint]:
    """Average Eve's SSIM and blackness per lambda across seeds.

    Args:
        records: Evaluated run records
        snr_db: Only use rows at this SNR; all rows when omitted
        channel_kind: Only use rows measured on this channel; defaults to
            the channel each record was trained on

    Returns:
        list[TradeoffPoint]: Sorted by objective, then lambda
    """
    groups: dict[tuple[str, float], dict[str, list[float]]] = {}
    for record in records:
        objective = record.config.objective
        weight = objective.lambda_weight if objective.label == "SecureMSE" else 0.0
        kind = channel_kind or trained_channel_kind(record.config.channel)
        rows = [
            row
            for row in record.eval_rows
            if row.channel_kind is kind
            and (snr_db is None or math.isclose(row.snr_db, snr_db))
        ]
        bob = [row.ssim for row in rows if row.receiver is Receiver.BOB]
        eve = [row for row in rows if row.receiver is Receiver.EVE]
        if not eve:
            logger.warning(f"Run {record.run_id} has no Eve rows; skipped")
            continue
        group = groups.setdefault(
            (objective.label, weight), {"bob": [], "eve": [], "black": []}
        )
        group["bob"].append(math.fsum(bob) / len(bob) if bob else math.nan)
        group["eve"].append(math.fsum(r.ssim for r in eve) / len(eve))
        group["black"].append(math.fsum(r.distance_to_black for r in eve) / len(eve))

    return [
        TradeoffPoint(
            lambda_weight=weight,
            objective=label,
            bob_ssim=math.fsum(values["bob"]) / len(values["bob"]),
            eve_ssim=math.fsum(values["eve"]) / len(values["eve"]),
            eve_distance_to_black=math.fsum(values["black"]) / len(values["black"]),
            num_runs=len(values["eve"]),
        )
        for (label, weight), values in sorted(groups.items())
    ]


class EvaluationService:
    """Service evaluating checkpoints and appending rows to their records."""

    def __init__(self, settings: Optional[Settings] = None) -> None:
        """Initialize the evaluation service.

        Args:
            settings: Process settings; defaults to the module-level instance
        """
        self.settings = settings or get_settings()
        self.device = self.settings.torch_device

    def load_test_split(
        self, checkpoint: LoadedCheckpoint, data_root: Optional[Path] = None
    ) -> DatasetSplit:
        """Load the test split matching the checkpoint's input shape."""
        data = checkpoint.train_config.data if checkpoint.train_config else None
        return load_dataset(
            self.settings.resolved_data_root(data_root),
            "test",
            image_shape=checkpoint.codec.input_shape,
            resize=data.resize if data else False,
            num_workers=self.settings.SECSEMCOM_NUM_WORKERS,
        )

    def sweep(
        self,
        checkpoint_path: Path,
        sweep: SweepSpec,
        channel: Optional[ChannelConfig] = None,
        data_root: Optional[Path] = None,
        test_split: Optional[DatasetSplit] = None,
    ) -> list[EvalRow]:
        """Evaluate a checkpoint and store the rows in its run record.

        Rows already in the record for the same (channel, SNR, receiver)
        are replaced, so repeating a sweep never duplicates rows.

        Args:
            checkpoint_path: Checkpoint to evaluate
            sweep: SNR points, receivers and batch settings
            channel: Channel model; defaults to the one used in training
            data_root: Corpus root overriding SECSEMCOM_DATA_ROOT
            test_split: Preloaded test split; skips reading the corpus

        Returns:
            list[EvalRow]: The measured rows

        Raises:
            CheckpointError: If the checkpoint cannot be loaded
        """
        checkpoint = load_checkpoint(checkpoint_path, device=self.device)
        split = test_split if test_split is not None else self.load_test_split(
            checkpoint, data_root
        )
        rows = evaluate_sweep(
            checkpoint.encoder,
            checkpoint.decoder,
            sweep,
            channel or default_channel(checkpoint),
            split,
            device=self.device,
            check_range=self.settings.is_ci_environment,
        )

        run_dir = checkpoint.run_dir
        if run_dir is not None and (run_dir / RECORD_FILE).is_file():
            replaced = RecordService(StorageService(run_dir.parent)).log_eval_rows(
                run_dir.name, rows
            )
            logger.info(
                f"Stored {len(rows)} rows in {run_dir / RECORD_FILE} "
                f"({replaced} replaced)"
            )
        else:
            logger.warning(f"No run record next to {checkpoint_path}; rows not stored")
        return rows
