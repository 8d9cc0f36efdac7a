"""Module providing Run Record persistence for the services.

A run record is stored as ``record.jsonl`` with one JSON object per line:

    {"kind": "header", ...}   run id, stage, config snapshot, seeds, corpus
    {"kind": "epoch", ...}    one per completed epoch
    {"kind": "eval", ...}     one per (channel, SNR, receiver) sweep row
    {"kind": "abort", ...}    diagnostic when training diverged
    {"kind": "footer", ...}   checkpoints and wall-clock time

``record.complete`` marks a record whose training finished. Sweeping a
run again replaces its eval lines with the same (channel, SNR, receiver)
key, so a record never holds two rows for one point.
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional

from pydantic import ValidationError

from secsemcom.core.config_file import dump_train_config
from secsemcom.core.errors import RunRecordError
from secsemcom.schemas.channel_schemas import ChannelKind
from secsemcom.schemas.run_schemas import EpochRecord, EvalRow, Receiver, RunRecord
from secsemcom.services.storage_service import CONFIG_FILE, RECORD_FILE, StorageService

logger = logging.getLogger(__name__)


class RecordService:
    """Service writing and reading run records inside run directories."""

    def __init__(self, storage: StorageService) -> None:
        """Initialize the record service.

        Args:
            storage: Storage service owning the run directories
        """
        self.storage = storage

    def start(self, record: RunRecord) -> Path:
        """Create the run directory and write the config and header line.

        Returns:
            Path: The run directory
        """
        run_dir = self.storage.create_run(record.run_id)
        self.storage.write_text(
            record.run_id, CONFIG_FILE, dump_train_config(record.config)
        )
        header = record.model_dump(
            mode="json",
            include={
                "run_id",
                "stage",
                "config",
                "seeds",
                "corpus",
                "bandwidth_ratio",
                "started_at",
            },
        )
        self.storage.append_line(record.run_id, {"kind": "header", **header})
        return run_dir

    def log_epoch(self, run_id: str, epoch: EpochRecord) -> None:
        """Append one epoch line."""
        self.storage.append_line(
            run_id, {"kind": "epoch", **epoch.model_dump(mode="json")}
        )

    def log_eval_rows(self, run_id: str, rows: Iterable[EvalRow]) -> int:
        """Store sweep rows, replacing earlier rows with the same key.

        The record is rewritten atomically; lines other than the replaced
        eval lines keep their order.

        Args:
            run_id: Run whose record receives the rows
            rows: Rows of one sweep

        Returns:
            int: Number of earlier rows that were replaced

        Raises:
            RunRecordError: If the run has no record yet
        """
        path = self.storage.run_dir(run_id) / RECORD_FILE
        raw = self.storage.get_file(path)
        if raw is None:
            raise RunRecordError(f"run record not found: {path}")

        new_rows = list(rows)
        keys = {row.key for row in new_rows}
        kept: list[dict[str, Any]] = []
        replaced = 0
        for line in _parse_lines(raw.decode("utf-8"), path):
            if line.get("kind") == "eval" and _row_key(line) in keys:
                replaced += 1
                continue
            kept.append(line)
        kept.extend({"kind": "eval", **row.model_dump(mode="json")} for row in new_rows)

        text = "".join(json.dumps(line, sort_keys=True) + "\n" for line in kept)
        self.storage.save_file(text.encode("utf-8"), Path(run_id) / RECORD_FILE)
        if replaced:
            logger.info(f"Replaced {replaced} eval rows of run {run_id}")
        return replaced

    def log_abort(self, run_id: str, message: str, epoch: int, step: int) -> None:
        """Append the diagnostic of an aborted run; the marker stays absent."""
        self.storage.append_line(
            run_id, {"kind": "abort", "message": message, "epoch": epoch, "step": step}
        )

    def finish(self, record: RunRecord) -> None:
        """Append the footer line and write the completion marker."""
        self.storage.append_line(
            record.run_id,
            {
                "kind": "footer",
                "checkpoints": record.checkpoints,
                "wall_clock_seconds": record.wall_clock_seconds,
            },
        )
        self.storage.mark_complete(record.run_id)
        logger.info(f"Run {record.run_id} complete")


def _parse_lines(text: str, path: Path) -> list[dict[str, Any]]:
    lines: list[dict[str, Any]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            lines.append(json.loads(raw))
        except json.JSONDecodeError as e:
            # a torn final line is what a crash mid-append leaves behind
            logger.warning(f"Ignoring unreadable line {lineno} of {path}: {e}")
    return lines


def _row_key(line: dict[str, Any]) -> Optional[tuple[ChannelKind, float, Receiver]]:
    try:
        row = EvalRow.model_validate({k: v for k, v in line.items() if k != "kind"})
    except ValidationError:
        return None
    return row.key


def load_run_record(run_dir: Path, allow_partial: bool = False) -> RunRecord:
    """Rebuild a RunRecord from its run directory.

    Args:
        run_dir: Directory holding ``record.jsonl``
        allow_partial: Accept records without the completion marker

    Returns:
        RunRecord: The record, with ``completed`` reflecting the marker

    Raises:
        RunRecordError: If the record is missing, unreadable or incomplete
    """
    run_dir = Path(run_dir)
    path = run_dir / RECORD_FILE
    storage = StorageService(run_dir.parent)
    raw = storage.get_file(path)
    if raw is None:
        raise RunRecordError(f"run record not found: {path}")

    completed = storage.is_complete(run_dir)
    if not completed:
        if not allow_partial:
            raise RunRecordError(f"run record is incomplete: {run_dir}")
        logger.warning(f"Loading partially written run record {run_dir}")

    lines = _parse_lines(raw.decode("utf-8"), path)
    headers = [line for line in lines if line.get("kind") == "header"]
    if len(headers) != 1:
        raise RunRecordError(f"run record {path} must have exactly one header line")

    payload: dict[str, Any] = {
        k: v for k, v in headers[0].items() if k != "kind"
    }
    payload["epochs"] = []
    payload["eval_rows"] = []
    for line in lines:
        kind = line.pop("kind", None)
        if kind == "epoch":
            payload["epochs"].append(line)
        elif kind == "eval":
            payload["eval_rows"].append(line)
        elif kind == "footer":
            payload["checkpoints"] = line.get("checkpoints", [])
            payload["wall_clock_seconds"] = line.get("wall_clock_seconds", 0.0)
    payload["completed"] = completed

    try:
        return RunRecord.model_validate(payload)
    except ValidationError as e:
        raise RunRecordError(f"run record {path} is invalid: {e}") from e
