"""Module providing Storage Service functionality for the services.

Owns the run directory layout::

    <out>/<run_id>/
        config.cfg
        record.jsonl
        record.complete
        checkpoints/
        panels/
        plots/

Every run directory has a single writer. Whole-file writes go through a
temporary file and a rename so readers never see half-written files.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Optional

from secsemcom.core.config import settings

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.cfg"
RECORD_FILE = "record.jsonl"
COMPLETE_MARKER = "record.complete"
RUN_SUBDIRS = ("checkpoints", "panels", "plots")


class StorageService:
    """Service for handling run directory storage on the local filesystem."""

    def __init__(self, out_dir: Optional[Path] = None) -> None:
        """Initialize the storage service.

        Args:
            out_dir: Root of all run directories; defaults to SECSEMCOM_OUT_DIR
        """
        self.out_dir = Path(out_dir) if out_dir is not None else settings.SECSEMCOM_OUT_DIR

    def run_dir(self, run_id: str) -> Path:
        """Directory of a run (not created)."""
        return self.out_dir / run_id

    def create_run(self, run_id: str) -> Path:
        """Create the run directory and its subdirectories.

        A stale completion marker from an earlier run with the same id is
        removed so the new record starts out incomplete.
        """
        run_dir = self.run_dir(run_id)
        for sub in RUN_SUBDIRS:
            (run_dir / sub).mkdir(parents=True, exist_ok=True)
        (run_dir / COMPLETE_MARKER).unlink(missing_ok=True)
        (run_dir / RECORD_FILE).unlink(missing_ok=True)
        logger.info("Run directory ready: %s", run_dir)
        return run_dir

    def save_file(self, file_data: bytes, relative_path: str | Path) -> Path:
        """Atomically write bytes below the output directory.

        Args:
            file_data: Binary content of the file
            relative_path: Path relative to the output directory

        Returns:
            Path: Absolute path of the written file
        """
        return self.save_file_at(file_data, self.out_dir / relative_path)

    @staticmethod
    def save_file_at(file_data: bytes, full_path: Path) -> Path:
        """Atomically write bytes to an explicit path."""
        full_path = Path(full_path)
        full_path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=full_path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(file_data)
            os.replace(tmp_name, full_path)
        except Exception:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        return full_path.absolute()

    def write_text(self, run_id: str, name: str, text: str) -> Path:
        """Atomically write a text file inside a run directory."""
        return self.save_file_at(text.encode("utf-8"), self.run_dir(run_id) / name)

    def append_line(self, run_id: str, payload: dict[str, Any]) -> None:
        """Append one JSON object as a line of the run record."""
        path = self.run_dir(run_id) / RECORD_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(payload, sort_keys=True) + "\n")
            f.flush()
            os.fsync(f.fileno())

    def mark_complete(self, run_id: str) -> None:
        """Write the explicit completion marker of a run."""
        self.write_text(run_id, COMPLETE_MARKER, "complete\n")

    def is_complete(self, run_dir: Path) -> bool:
        """Whether a run directory carries the completion marker."""
        return (Path(run_dir) / COMPLETE_MARKER).is_file()

    def get_file(self, path: Path) -> bytes | None:
        """Get file content from the filesystem.

        Args:
            path: File to read

        Returns:
            Optional[bytes]: The file content or None if not found
        """
        try:
            return Path(path).read_bytes()
        except FileNotFoundError:
            logger.warning("File not found: %s", path)
            return None
