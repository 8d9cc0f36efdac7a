"""Module providing tests for the training and evaluation helpers."""

import math

import pytest
import torch

from secsemcom.channel import ChannelStreams
from secsemcom.core.errors import TrainingDivergedError
from secsemcom.models import build_codec
from secsemcom.schemas import (
    ChannelConfig,
    ChannelKind,
    EvalRow,
    ObjectiveConfig,
    ObjectiveKind,
    Receiver,
    RunRecord,
    RunStage,
    TrainConfig,
)
from secsemcom.services.evaluation_service import summarize_tradeoff
from secsemcom.services.training_service import (
    make_run_id,
    pretraining_config,
    run_seeds,
    train_step,
)


def _evaluated(
    lambda_weight: float,
    eve_ssim: float,
    seed: int,
    channel_kind: ChannelKind = ChannelKind.AWGN,
) -> RunRecord:
    objective = (
        ObjectiveConfig(kind=ObjectiveKind.SECURE_MSE, lambda_weight=lambda_weight)
        if lambda_weight > 0
        else ObjectiveConfig(kind=ObjectiveKind.MSE)
    )
    rows = [
        EvalRow(
            channel_kind=channel_kind,
            eval_seed=0,
            snr_db=0.0,
            receiver=receiver,
            ssim=0.8 if receiver is Receiver.BOB else eve_ssim,
            ssim_global=0.8,
            psnr_db=25.0,
            mean_intensity=0.2,
            distance_to_black=0.05,
            transmit_power=1.0,
            num_images=10,
        )
        for receiver in Receiver
    ]
    return RunRecord(
        run_id=f"r{lambda_weight}-{seed}",
        stage=RunStage.TRAIN,
        config=TrainConfig(objective=objective, master_seed=seed),
        eval_rows=rows,
    )


class TestRunIdentity:
    """Test suite for run ids and seeds."""

    def test_run_id_is_deterministic(self) -> None:
        config = TrainConfig(channel=ChannelConfig.miso(10.0), master_seed=2)

        run_id = make_run_id(config, RunStage.TRAIN)

        assert run_id == make_run_id(config, RunStage.TRAIN)
        assert run_id.startswith("train-miso_mrt-mse-seed2-")

    def test_run_id_changes_with_config(self) -> None:
        config = TrainConfig()

        assert make_run_id(config, RunStage.TRAIN) != make_run_id(
            config.model_copy(update={"epochs": 3}), RunStage.TRAIN
        )

    def test_run_seeds_follow_master(self) -> None:
        first = run_seeds(TrainConfig(master_seed=1))

        assert first == run_seeds(TrainConfig(master_seed=1))
        assert first["init"] != run_seeds(TrainConfig(master_seed=2))["init"]
        assert first["master"] == 1

    def test_pretraining_config(self) -> None:
        config = TrainConfig(
            objective=ObjectiveConfig(kind=ObjectiveKind.SECURE_MSE), epochs=7
        )

        pretrain = pretraining_config(config)

        assert pretrain.channel.kind is ChannelKind.IDENTITY
        assert pretrain.objective.kind is ObjectiveKind.MSE
        assert pretrain.epochs == 7
        assert pretrain.pretrain_checkpoint is None


class TestTrainStep:
    """Test suite for train_step."""

    def test_step_updates_parameters(self, tiny_train_config: TrainConfig) -> None:
        encoder, decoder = build_codec(tiny_train_config.codec, init_seed=0)
        optimizer = torch.optim.Adam([*encoder.parameters(), *decoder.parameters()])
        before = [p.detach().clone() for p in decoder.parameters()]

        report = train_step(
            encoder,
            decoder,
            optimizer,
            torch.rand(4, 3, 16, 16),
            tiny_train_config,
            ChannelStreams.from_seed(0),
        )

        assert math.isfinite(report.total)
        assert any(not torch.equal(a, b) for a, b in zip(before, decoder.parameters()))

    def test_non_finite_loss_skips_update(self, tiny_train_config: TrainConfig) -> None:
        encoder, decoder = build_codec(tiny_train_config.codec, init_seed=0)
        optimizer = torch.optim.Adam([*encoder.parameters(), *decoder.parameters()])
        before = [p.detach().clone() for p in encoder.parameters()]
        images = torch.rand(4, 3, 16, 16)
        images[0, 0, 0, 0] = math.nan

        with pytest.raises(TrainingDivergedError) as excinfo:
            train_step(
                encoder,
                decoder,
                optimizer,
                images,
                tiny_train_config,
                ChannelStreams.from_seed(0),
                epoch=2,
                step=17,
            )

        assert excinfo.value.epoch == 2
        assert excinfo.value.step == 17
        assert all(torch.equal(a, b) for a, b in zip(before, encoder.parameters()))

    def test_parameters_stay_finite(self, tiny_train_config: TrainConfig) -> None:
        config = tiny_train_config.model_copy(
            update={
                "objective": ObjectiveConfig(
                    kind=ObjectiveKind.SECURE_MSE, lambda_weight=0.5, epsilon_threshold=0.05
                )
            }
        )
        encoder, decoder = build_codec(config.codec, init_seed=0)
        optimizer = torch.optim.Adam([*encoder.parameters(), *decoder.parameters()], lr=1e-3)
        generator = torch.Generator().manual_seed(0)

        for step in range(100):
            images = torch.rand(4, 3, 16, 16, generator=generator)
            train_step(
                encoder,
                decoder,
                optimizer,
                images,
                config,
                ChannelStreams.from_seed(step),
                step=step,
            )

        for parameter in [*encoder.parameters(), *decoder.parameters()]:
            assert bool(torch.isfinite(parameter).all())


class TestSummarizeTradeoff:
    """Test suite for summarize_tradeoff."""

    def test_groups_by_lambda_across_seeds(self) -> None:
        records = [
            _evaluated(0.0, 0.6, 0),
            _evaluated(0.0, 0.4, 1),
            _evaluated(0.5, 0.2, 0),
            _evaluated(0.5, 0.1, 1),
        ]

        points = summarize_tradeoff(records, snr_db=0.0)

        assert [(p.objective, p.lambda_weight) for p in points] == [
            ("MSE", 0.0),
            ("SecureMSE", 0.5),
        ]
        assert points[0].eve_ssim == pytest.approx(0.5)
        assert points[1].eve_ssim == pytest.approx(0.15)
        assert points[1].bob_ssim == pytest.approx(0.8)
        assert points[1].num_runs == 2

    def test_other_snr_filtered_out(self) -> None:
        assert summarize_tradeoff([_evaluated(0.5, 0.2, 0)], snr_db=10.0) == []

    def test_rows_of_other_channels_ignored(self) -> None:
        """Test only rows measured on the training channel are averaged."""
        record = _evaluated(0.5, 0.2, 0)
        miso = _evaluated(0.5, 0.9, 0, channel_kind=ChannelKind.MISO_MRT)
        record.eval_rows.extend(miso.eval_rows)

        (default,) = summarize_tradeoff([record])
        (chosen,) = summarize_tradeoff([record], channel_kind=ChannelKind.MISO_MRT)

        assert default.eve_ssim == pytest.approx(0.2)
        assert chosen.eve_ssim == pytest.approx(0.9)
