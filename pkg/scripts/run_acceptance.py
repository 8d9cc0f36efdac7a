#!/usr/bin/env python
"""Train the acceptance model grid, sweep it and write acceptance.csv.

The grid covers MSE and SecureMSE on the AWGN and MISO channels plus a
lambda sweep with three seeds. Every verdict row holds the measured value,
the threshold and pass/fail.

Usage:
    python scripts/run_acceptance.py --data-root /data/linnaeus5 --reduced
"""

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from secsemcom.core.config import get_settings
from secsemcom.data.dataset import load_dataset
from secsemcom.main import configure_logging
from secsemcom.schemas import (
    ChannelConfig,
    CodecConfig,
    DataConfig,
    ObjectiveConfig,
    ObjectiveKind,
    Receiver,
    RunRecord,
    SweepSpec,
    TrainConfig,
)
from secsemcom.services.evaluation_service import EvaluationService, summarize_tradeoff
from secsemcom.services.storage_service import StorageService
from secsemcom.services.training_service import TrainingService

logger = logging.getLogger("run_acceptance")

LAMBDA_GRID = (0.0, 0.25, 0.5, 1.0)
MONOTONE_TOLERANCE = 0.02
TRADEOFF_TOLERANCE = 0.03


@dataclass(frozen=True)
class Verdict:
    """One acceptance row."""

    criterion: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""


def _ssim(record: RunRecord, snr_db: float, receiver: Receiver) -> float:
    for row in record.eval_rows:
        if row.receiver is receiver and abs(row.snr_db - snr_db) < 1e-9:
            return row.ssim
    raise KeyError(f"{record.run_id} has no {receiver.value} row at {snr_db} dB")


def _intensity(record: RunRecord, snr_db: float, receiver: Receiver) -> float:
    for row in record.eval_rows:
        if row.receiver is receiver and abs(row.snr_db - snr_db) < 1e-9:
            return row.mean_intensity
    raise KeyError(f"{record.run_id} has no {receiver.value} row at {snr_db} dB")


class AcceptanceCampaign:
    """Trains, evaluates and judges the acceptance grid."""

    def __init__(self, args: argparse.Namespace) -> None:
        settings = get_settings()
        if args.out_dir is not None:
            settings = settings.model_copy(update={"SECSEMCOM_OUT_DIR": args.out_dir})
        self.settings = settings
        self.data_root = settings.resolved_data_root(args.data_root)
        self.training = TrainingService(StorageService(settings.SECSEMCOM_OUT_DIR), settings)
        self.evaluation = EvaluationService(settings)
        self.sweep_spec = SweepSpec(num_eval_batches=args.num_eval_batches)
        self.base = self._base_config(args)
        self.train_split = self.training.load_train_split(self.base, self.data_root)
        self.test_split = load_dataset(
            self.data_root,
            "test",
            image_shape=self.base.codec.input_shape,
            resize=self.base.data.resize,
            num_workers=settings.SECSEMCOM_NUM_WORKERS,
        )
        self.pretrained: Optional[Path] = None
        self.pretrain_epochs = args.pretrain_epochs

    @staticmethod
    def _base_config(args: argparse.Namespace) -> TrainConfig:
        if args.reduced:
            return TrainConfig(
                codec=CodecConfig(input_shape=(64, 64, 3)),
                data=DataConfig(resize=True, max_per_class=100),
                epochs=args.epochs,
            )
        return TrainConfig(epochs=args.epochs)

    def pretrain(self) -> Path:
        if self.pretrained is None:
            config = self.base.model_copy(update={"epochs": self.pretrain_epochs})
            self.pretrained = self.training.pretrain(config, train_split=self.train_split)
        return self.pretrained

    def run(
        self,
        channel: ChannelConfig,
        objective: ObjectiveConfig,
        seed: int = 0,
    ) -> RunRecord:
        """Fine-tune from the pretrained weights, then sweep the result."""
        config = self.base.model_copy(
            update={
                "channel": channel,
                "objective": objective,
                "pretrain_checkpoint": self.pretrain(),
                "master_seed": seed,
            }
        )
        record = self.training.train(config, train_split=self.train_split)
        rows = self.evaluation.sweep(
            Path(record.checkpoints[-1]),
            self.sweep_spec,
            channel=channel,
            test_split=self.test_split,
        )
        return record.model_copy(update={"eval_rows": rows})

    def judge(self) -> list[Verdict]:
        mse = ObjectiveConfig(kind=ObjectiveKind.MSE)
        secure = ObjectiveConfig(kind=ObjectiveKind.SECURE_MSE)
        verdicts: list[Verdict] = []

        # low-SNR efficiency
        low = self.run(ChannelConfig.awgn(0.0), mse)
        bob_low = _ssim(low, 0.0, Receiver.BOB)
        verdicts.append(Verdict("bob_ssim_awgn_mse_0db", bob_low, 0.7, bob_low >= 0.7))
        curve = [_ssim(low, snr, Receiver.BOB) for snr in self.sweep_spec.snr_points_db]
        worst_drop = max(
            (earlier - later for earlier, later in zip(curve, curve[1:])), default=0.0
        )
        verdicts.append(
            Verdict(
                "bob_ssim_non_decreasing",
                worst_drop,
                MONOTONE_TOLERANCE,
                worst_drop <= MONOTONE_TOLERANCE,
                "largest drop between consecutive SNR points",
            )
        )

        # leakage existence and suppression at Bob SNR 10 dB
        awgn_mse = self.run(ChannelConfig.awgn(10.0), mse)
        awgn_secure = self.run(ChannelConfig.awgn(10.0), secure)
        eve_mse = _ssim(awgn_mse, 10.0, Receiver.EVE)
        verdicts.append(Verdict("eve_ssim_awgn_mse", eve_mse, 0.4, eve_mse >= 0.4))
        eve_secure = _ssim(awgn_secure, 10.0, Receiver.EVE)
        verdicts.append(
            Verdict("eve_ssim_awgn_secure", eve_secure, 0.15, eve_secure <= 0.15)
        )
        eve_dark = _intensity(awgn_secure, 10.0, Receiver.EVE)
        verdicts.append(
            Verdict("eve_intensity_awgn_secure", eve_dark, 0.1, eve_dark <= 0.1)
        )
        bob_loss = _ssim(awgn_mse, 10.0, Receiver.BOB) - _ssim(
            awgn_secure, 10.0, Receiver.BOB
        )
        verdicts.append(
            Verdict("bob_ssim_loss_awgn_secure", bob_loss, 0.05, bob_loss <= 0.05)
        )

        # MISO robustness
        miso_mse = self.run(ChannelConfig.miso(10.0), mse)
        miso_secure = self.run(ChannelConfig.miso(10.0), secure)
        high = [snr for snr in self.sweep_spec.snr_points_db if snr >= 10.0]
        eve_gap = min(
            _ssim(miso_mse, snr, Receiver.EVE) - _ssim(miso_secure, snr, Receiver.EVE)
            for snr in high
        )
        verdicts.append(Verdict("eve_ssim_gap_miso", eve_gap, 0.2, eve_gap >= 0.2))
        low_points = [s for s in self.sweep_spec.snr_points_db if -5.0 <= s <= 5.0]
        bob_gap = max(
            _ssim(miso_mse, snr, Receiver.BOB) - _ssim(miso_secure, snr, Receiver.BOB)
            for snr in low_points
        )
        verdicts.append(
            Verdict("bob_ssim_gap_miso_low_snr", bob_gap, 0.02, bob_gap > 0.02)
        )

        # trade-off monotonicity over lambda, three seeds each
        tradeoff_records = [
            self.run(
                ChannelConfig.awgn(10.0),
                ObjectiveConfig(kind=ObjectiveKind.SECURE_MSE, lambda_weight=weight),
                seed=seed,
            )
            for weight in LAMBDA_GRID
            for seed in range(3)
        ]
        points = summarize_tradeoff(tradeoff_records, snr_db=10.0)
        eve_curve = [point.eve_ssim for point in points]
        worst_rise = max(
            (later - earlier for earlier, later in zip(eve_curve, eve_curve[1:])),
            default=0.0,
        )
        verdicts.append(
            Verdict(
                "eve_ssim_non_increasing_in_lambda",
                worst_rise,
                TRADEOFF_TOLERANCE,
                worst_rise <= TRADEOFF_TOLERANCE,
                " ".join(f"{p.lambda_weight:g}:{p.eve_ssim:.4f}" for p in points),
            )
        )
        return verdicts

    def write(self, verdicts: list[Verdict]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["criterion", "measured", "threshold", "passed", "note"])
        for v in verdicts:
            writer.writerow(
                [v.criterion, f"{v.measured:.6g}", f"{v.threshold:.6g}", v.passed, v.note]
            )
        return StorageService.save_file_at(
            buffer.getvalue().encode("utf-8"),
            self.settings.SECSEMCOM_OUT_DIR / "acceptance.csv",
        )


def main(argv: Optional[list[str]] = None) -> int:
    """Run the script."""
    parser = argparse.ArgumentParser(description="Run the acceptance campaign")
    parser.add_argument("--data-root", type=Path, help="Linnaeus 5 root directory")
    parser.add_argument("--out-dir", type=Path, help="Output directory")
    parser.add_argument("--epochs", type=int, default=50, help="Fine-tuning epochs")
    parser.add_argument(
        "--pretrain-epochs", type=int, default=50, help="Pretraining epochs"
    )
    parser.add_argument(
        "--num-eval-batches", type=int, default=0, help="0 evaluates the whole split"
    )
    parser.add_argument(
        "--reduced", action="store_true", help="64x64 images, 100 per class"
    )
    args = parser.parse_args(argv)

    configure_logging("INFO")
    campaign = AcceptanceCampaign(args)
    verdicts = campaign.judge()
    path = campaign.write(verdicts)
    for v in verdicts:
        logger.info(
            f"{'PASS' if v.passed else 'FAIL'} {v.criterion}: {v.measured:.4f} "
            f"(threshold {v.threshold:g})"
        )
    logger.info(f"Wrote {path}")
    return 0 if all(v.passed for v in verdicts) else 1


if __name__ == "__main__":
    sys.exit(main())
