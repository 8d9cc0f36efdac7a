"""Module providing SSIM-vs-SNR curves and the sweep table."""

import csv
import io
import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from secsemcom.core.errors import RunRecordError  # noqa: E402
from secsemcom.schemas.channel_schemas import ChannelKind  # noqa: E402
from secsemcom.schemas.run_schemas import Receiver, RunRecord  # noqa: E402
from secsemcom.services.storage_service import StorageService  # noqa: E402

logger = logging.getLogger(__name__)

FIGURE_FILE = "ssim_vs_snr.png"
TABLE_FILE = "sweep_table.csv"
TABLE_COLUMNS = (
    "run_id",
    "objective",
    "channel",
    "lambda",
    "snr_db",
    "receiver",
    "eval_seed",
    "ssim",
    "ssim_global",
    "psnr_db",
    "mean_intensity",
    "distance_to_black",
    "transmit_power",
    "num_images",
)


@dataclass(frozen=True)
class PlotArtifacts:
    """Files written by ``emit_plots`` and the legend of every curve."""

    figure: Path
    table: Path
    curves: tuple[str, ...]


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def curve_label(record: RunRecord, channel_kind: ChannelKind, receiver: Receiver) -> str:
    """Legend entry of one curve, e.g. ``SecureMSE awgn (eve)``."""
    return f"{record.label} {channel_kind.value} ({receiver.value})"


def render_table(records: Sequence[RunRecord]) -> str:
    """CSV text of every eval row, in record order, six significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for record in records:
        objective = record.config.objective
        for row in record.eval_rows:
            writer.writerow(
                [
                    record.run_id,
                    objective.label,
                    row.channel_kind.value,
                    _fmt(objective.lambda_weight),
                    _fmt(row.snr_db),
                    row.receiver.value,
                    row.eval_seed,
                    _fmt(row.ssim),
                    _fmt(row.ssim_global),
                    _fmt(row.psnr_db),
                    _fmt(row.mean_intensity),
                    _fmt(row.distance_to_black),
                    _fmt(row.transmit_power),
                    row.num_images,
                ]
            )
    return buffer.getvalue()


def emit_plots(records: Sequence[RunRecord], out_dir: Path) -> PlotArtifacts:
    """Plot SSIM against SNR, one curve per (record, channel, receiver).

    Args:
        records: Run records with evaluation rows
        out_dir: Directory receiving the figure and the table

    Returns:
        PlotArtifacts: Paths of the figure and table plus the curve labels

    Raises:
        RunRecordError: If none of the records has evaluation rows
    """
    usable = [record for record in records if record.eval_rows]
    for record in records:
        if not record.eval_rows:
            logger.warning(f"Run {record.run_id} has no evaluation rows; skipped")
    if not usable:
        raise RunRecordError("no evaluation rows to plot")

    fig, ax = plt.subplots(figsize=(7, 5))
    labels: list[str] = []
    for record in usable:
        channels = dict.fromkeys(row.channel_kind for row in record.eval_rows)
        for channel_kind, receiver in itertools.product(channels, Receiver):
            rows = sorted(
                (
                    row
                    for row in record.eval_rows
                    if row.channel_kind is channel_kind and row.receiver is receiver
                ),
                key=lambda row: row.snr_db,
            )
            if not rows:
                continue
            label = curve_label(record, channel_kind, receiver)
            if label in labels:
                label = f"{label} seed {record.config.master_seed}"
            labels.append(label)
            ax.plot(
                [row.snr_db for row in rows],
                [row.ssim for row in rows],
                marker="o" if receiver is Receiver.BOB else "s",
                linestyle="-" if receiver is Receiver.BOB else "--",
                label=label,
            )
    ax.set_xlabel("SNR at Bob (dB)")
    ax.set_ylabel("SSIM")
    ax.grid(True, linestyle="--", alpha=0.3)
    ax.legend()
    fig.tight_layout()

    buffer = io.BytesIO()
    fig.savefig(buffer, format="png", dpi=150)
    plt.close(fig)

    out_dir = Path(out_dir)
    figure = StorageService.save_file_at(buffer.getvalue(), out_dir / FIGURE_FILE)
    table = StorageService.save_file_at(
        render_table(usable).encode("utf-8"), out_dir / TABLE_FILE
    )
    logger.info(f"Wrote {len(labels)} curves to {figure} and table {table}")
    return PlotArtifacts(figure=figure, table=table, curves=tuple(labels))
