"""Module providing tests for the run directory storage service."""

import json
import logging
from pathlib import Path
from unittest.mock import patch

import pytest

from secsemcom.services.storage_service import (
    COMPLETE_MARKER,
    RECORD_FILE,
    RUN_SUBDIRS,
    StorageService,
)


@pytest.fixture
def storage(tmp_path: Path) -> StorageService:
    return StorageService(tmp_path / "runs")


class TestStorageService:
    """Test suite for StorageService."""

    def test_default_out_dir_from_settings(self, tmp_path: Path) -> None:
        """Test the output directory falls back to the settings value."""
        with patch("secsemcom.services.storage_service.settings") as mock_settings:
            mock_settings.SECSEMCOM_OUT_DIR = tmp_path / "elsewhere"
            service = StorageService()

        assert service.out_dir == tmp_path / "elsewhere"

    def test_create_run_layout(self, storage: StorageService) -> None:
        """Test a new run directory gets every subdirectory."""
        run_dir = storage.create_run("run-a")

        assert run_dir == storage.out_dir / "run-a"
        for sub in RUN_SUBDIRS:
            assert (run_dir / sub).is_dir()

    def test_create_run_clears_stale_record(self, storage: StorageService) -> None:
        """Test re-creating a run removes its marker and old record."""
        storage.create_run("run-a")
        storage.append_line("run-a", {"kind": "header"})
        storage.mark_complete("run-a")

        run_dir = storage.create_run("run-a")

        assert not storage.is_complete(run_dir)
        assert not (run_dir / RECORD_FILE).exists()

    def test_save_file_is_atomic(self, storage: StorageService) -> None:
        """Test saved files appear whole and leave no temporary files."""
        path = storage.save_file(b"weights", "run-a/checkpoints/train.pt")

        assert path.read_bytes() == b"weights"
        assert [p.name for p in path.parent.iterdir()] == ["train.pt"]

    def test_failed_write_removes_temporary_file(
        self, storage: StorageService, tmp_path: Path
    ) -> None:
        """Test a failing rename leaves the directory clean."""
        target = tmp_path / "out" / "file.bin"
        with patch("secsemcom.services.storage_service.os.replace") as mock_replace:
            mock_replace.side_effect = OSError("disk full")
            with pytest.raises(OSError):
                StorageService.save_file_at(b"data", target)

        assert list(target.parent.iterdir()) == []

    def test_append_line_writes_sorted_json(self, storage: StorageService) -> None:
        storage.append_line("run-a", {"b": 1, "a": 2})
        storage.append_line("run-a", {"kind": "epoch"})

        lines = (storage.run_dir("run-a") / RECORD_FILE).read_text().splitlines()
        assert lines[0] == '{"a": 2, "b": 1}'
        assert json.loads(lines[1]) == {"kind": "epoch"}

    def test_mark_complete(self, storage: StorageService) -> None:
        storage.create_run("run-a")
        storage.mark_complete("run-a")

        assert (storage.run_dir("run-a") / COMPLETE_MARKER).is_file()
        assert storage.is_complete(storage.run_dir("run-a"))

    def test_get_file(self, storage: StorageService) -> None:
        path = storage.write_text("run-a", "config.cfg", "train.epochs = 1\n")

        assert storage.get_file(path) == b"train.epochs = 1\n"

    def test_get_file_not_found(
        self, storage: StorageService, caplog: pytest.LogCaptureFixture
    ) -> None:
        """Test retrieving a missing file returns None and warns."""
        with caplog.at_level(logging.WARNING):
            assert storage.get_file(storage.out_dir / "missing") is None

        assert "File not found" in caplog.text
