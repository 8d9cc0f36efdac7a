"""Module providing tests for run record persistence."""

from pathlib import Path

import pytest

from secsemcom.core.config_file import load_train_config
from secsemcom.core.errors import RunRecordError
from secsemcom.schemas import (
    ChannelConfig,
    ChannelKind,
    EpochRecord,
    EvalRow,
    Receiver,
    RunRecord,
    RunStage,
    TrainConfig,
)
from secsemcom.services.record_service import RecordService, load_run_record
from secsemcom.services.storage_service import CONFIG_FILE, RECORD_FILE, StorageService


@pytest.fixture
def records(tmp_path: Path) -> RecordService:
    return RecordService(StorageService(tmp_path))


@pytest.fixture
def run_record() -> RunRecord:
    return RunRecord(
        run_id="train-miso_mrt-mse-seed3-abc",
        stage=RunStage.TRAIN,
        config=TrainConfig(channel=ChannelConfig.miso(10.0), master_seed=3),
        seeds={"master": 3, "init": 11},
        bandwidth_ratio=1 / 24,
    )


def _row(
    snr_db: float,
    receiver: Receiver,
    channel_kind: ChannelKind = ChannelKind.MISO_MRT,
    ssim: float = 0.5,
) -> EvalRow:
    return EvalRow(
        channel_kind=channel_kind,
        eval_seed=0,
        snr_db=snr_db,
        receiver=receiver,
        ssim=ssim,
        ssim_global=0.6,
        psnr_db=20.0,
        mean_intensity=0.4,
        distance_to_black=0.2,
        transmit_power=1.0,
        num_images=10,
    )


class TestRecordService:
    """Test suite for RecordService."""

    def test_full_record_round_trip(
        self, records: RecordService, run_record: RunRecord
    ) -> None:
        """Test a finished record loads back with all its lines."""
        run_dir = records.start(run_record)
        records.log_epoch(run_record.run_id, EpochRecord(epoch=0, loss=0.3, bob_distortion=0.3))
        records.log_epoch(run_record.run_id, EpochRecord(epoch=1, loss=0.2, bob_distortion=0.2))
        run_record.checkpoints.append(str(run_dir / "checkpoints" / "train.pt"))
        run_record.wall_clock_seconds = 4.5
        records.finish(run_record)
        records.log_eval_rows(
            run_record.run_id, [_row(0.0, Receiver.BOB), _row(0.0, Receiver.EVE)]
        )

        loaded = load_run_record(run_dir)

        assert loaded.completed
        assert loaded.config == run_record.config
        assert loaded.seeds == {"master": 3, "init": 11}
        assert [e.loss for e in loaded.epochs] == [0.3, 0.2]
        assert len(loaded.eval_rows) == 2
        assert loaded.checkpoints == run_record.checkpoints
        assert loaded.wall_clock_seconds == 4.5

    def test_repeated_sweep_replaces_rows(
        self, records: RecordService, run_record: RunRecord
    ) -> None:
        """Test a second sweep of the same points replaces the first one."""
        run_dir = records.start(run_record)
        records.finish(run_record)
        first = [_row(0.0, Receiver.BOB, ssim=0.1), _row(0.0, Receiver.EVE, ssim=0.1)]
        second = [_row(0.0, Receiver.BOB, ssim=0.7), _row(0.0, Receiver.EVE, ssim=0.2)]

        assert records.log_eval_rows(run_record.run_id, first) == 0
        assert records.log_eval_rows(run_record.run_id, second) == 2

        loaded = load_run_record(run_dir)
        assert [(r.receiver, r.ssim) for r in loaded.eval_rows] == [
            (Receiver.BOB, 0.7),
            (Receiver.EVE, 0.2),
        ]
        assert loaded.completed

    def test_rows_of_another_channel_kept(
        self, records: RecordService, run_record: RunRecord
    ) -> None:
        run_dir = records.start(run_record)
        records.finish(run_record)
        records.log_eval_rows(run_record.run_id, [_row(0.0, Receiver.BOB)])

        replaced = records.log_eval_rows(
            run_record.run_id, [_row(0.0, Receiver.BOB, channel_kind=ChannelKind.AWGN)]
        )

        loaded = load_run_record(run_dir)
        assert replaced == 0
        assert [r.channel_kind for r in loaded.eval_rows] == [
            ChannelKind.MISO_MRT,
            ChannelKind.AWGN,
        ]

    def test_eval_rows_need_a_record(self, records: RecordService) -> None:
        with pytest.raises(RunRecordError, match="run record not found"):
            records.log_eval_rows("missing-run", [_row(0.0, Receiver.BOB)])

    def test_config_snapshot_written(
        self, records: RecordService, run_record: RunRecord
    ) -> None:
        run_dir = records.start(run_record)

        assert load_train_config(run_dir / CONFIG_FILE) == run_record.config

    def test_incomplete_record_rejected(
        self, records: RecordService, run_record: RunRecord
    ) -> None:
        """Test a record without the marker needs allow_partial."""
        run_dir = records.start(run_record)
        records.log_abort(run_record.run_id, "training diverged", epoch=0, step=3)

        with pytest.raises(RunRecordError, match="incomplete"):
            load_run_record(run_dir)

        partial = load_run_record(run_dir, allow_partial=True)
        assert not partial.completed
        assert partial.epochs == []

    def test_torn_last_line_ignored(
        self, records: RecordService, run_record: RunRecord
    ) -> None:
        run_dir = records.start(run_record)
        with open(run_dir / RECORD_FILE, "a", encoding="utf-8") as f:
            f.write('{"kind": "epoch", "epo')

        loaded = load_run_record(run_dir, allow_partial=True)

        assert loaded.epochs == []

    def test_missing_record(self, tmp_path: Path) -> None:
        with pytest.raises(RunRecordError, match="run record not found"):
            load_run_record(tmp_path)

    def test_header_required(self, tmp_path: Path) -> None:
        storage = StorageService(tmp_path)
        storage.append_line("run", {"kind": "epoch", "epoch": 0})
        storage.mark_complete("run")

        with pytest.raises(RunRecordError, match="exactly one header"):
            load_run_record(tmp_path / "run")

    def test_invalid_lines_rejected(
        self, records: RecordService, run_record: RunRecord
    ) -> None:
        run_dir = records.start(run_record)
        records.storage.append_line(run_record.run_id, {"kind": "epoch", "epoch": "x"})
        records.storage.mark_complete(run_record.run_id)

        with pytest.raises(RunRecordError, match="is invalid"):
            load_run_record(run_dir)
