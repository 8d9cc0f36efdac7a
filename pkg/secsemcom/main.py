"""Command line entry point: ``secsemcom <subcommand> [options]``.

Subcommands:
    pretrain  train the codec on the noiseless link with MSE
    train     train through the configured wiretap channel
    sweep     evaluate a checkpoint over an SNR grid
    render    write original | Bob | Eve panels for chosen test images
    plot      draw SSIM-vs-SNR curves and the sweep table

Exit codes: 0 on success, 1 for runtime errors, 2 for usage errors.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from secsemcom.core.config import Settings, get_settings
from secsemcom.core.config_file import load_train_config
from secsemcom.core.errors import ConfigurationError, SecSemComError
from secsemcom.schemas.channel_schemas import ChannelConfig, ChannelKind
from secsemcom.schemas.run_schemas import SweepSpec
from secsemcom.services.checkpoint_service import load_checkpoint
from secsemcom.services.evaluation_service import EvaluationService, default_channel
from secsemcom.services.plot_service import emit_plots
from secsemcom.services.record_service import load_run_record
from secsemcom.services.render_service import render_examples
from secsemcom.services.storage_service import StorageService
from secsemcom.services.training_service import TrainingService

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str) -> None:
    """Install the process-wide log format and level."""
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    # the training loop logs one line per epoch; keep it at the chosen level
    logging.getLogger("secsemcom.services.training_service").setLevel(level)


def _settings_for(args: argparse.Namespace) -> Settings:
    settings = get_settings()
    if args.out_dir is not None:
        settings = settings.model_copy(update={"SECSEMCOM_OUT_DIR": args.out_dir})
    return settings


def _channel_from_args(args: argparse.Namespace) -> Optional[ChannelConfig]:
    if args.config is not None:
        return load_train_config(args.config).channel
    if args.channel == ChannelKind.MISO_MRT.value:
        return ChannelConfig.miso(10.0)
    if args.channel == ChannelKind.AWGN.value:
        return ChannelConfig.awgn(10.0)
    return None


def _cmd_pretrain(args: argparse.Namespace) -> int:
    settings = _settings_for(args)
    config = load_train_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    service = TrainingService(StorageService(settings.SECSEMCOM_OUT_DIR), settings)
    checkpoint = service.pretrain(config, data_root=args.data_root)
    print(checkpoint)
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    settings = _settings_for(args)
    config = load_train_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.checkpoint is not None:
        config = config.model_copy(update={"pretrain_checkpoint": args.checkpoint})
    service = TrainingService(StorageService(settings.SECSEMCOM_OUT_DIR), settings)
    record = service.train(config, data_root=args.data_root)
    print(record.checkpoints[-1])
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    settings = _settings_for(args)
    values: dict[str, object] = {}
    if args.snr_points is not None:
        values["snr_points_db"] = args.snr_points
    if args.receivers is not None:
        values["receivers"] = args.receivers
    if args.num_eval_batches is not None:
        values["num_eval_batches"] = args.num_eval_batches
    if args.batch_size is not None:
        values["batch_size"] = args.batch_size
    if args.seed is not None:
        values["eval_seed"] = args.seed
    try:
        sweep = SweepSpec.model_validate(values)
    except ValidationError as e:
        raise ConfigurationError(f"invalid sweep options: {e}") from e

    service = EvaluationService(settings)
    rows = service.sweep(
        args.checkpoint,
        sweep,
        channel=_channel_from_args(args),
        data_root=args.data_root,
    )
    for row in rows:
        print(
            f"{row.snr_db:.6g}\t{row.receiver.value}\t{row.ssim:.6g}\t"
            f"{row.psnr_db:.6g}\t{row.mean_intensity:.6g}"
        )
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    settings = _settings_for(args)
    service = EvaluationService(settings)
    checkpoint = load_checkpoint(args.checkpoint, device=service.device)
    split = service.load_test_split(checkpoint, args.data_root)
    out_dir = args.out_dir
    if out_dir is None:
        run_dir = checkpoint.run_dir
        out_dir = (run_dir or settings.SECSEMCOM_OUT_DIR) / "panels"
    files = render_examples(
        checkpoint,
        split,
        args.image_ids,
        args.snr,
        _channel_from_args(args) or default_channel(checkpoint),
        out_dir,
        seed=args.seed or 0,
        device=service.device,
    )
    for path in files:
        print(path)
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    settings = _settings_for(args)
    records = [
        load_run_record(run_dir, allow_partial=args.allow_partial)
        for run_dir in args.records
    ]
    artifacts = emit_plots(records, settings.SECSEMCOM_OUT_DIR / "plots")
    print(artifacts.figure)
    print(artifacts.table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data-root", type=Path, help="Linnaeus 5 root directory")
    common.add_argument("--out-dir", type=Path, help="Output directory for runs")
    common.add_argument("--seed", type=int, help="Master seed (eval seed for sweep)")
    common.add_argument(
        "--log-level", help="Log level; defaults to SECSEMCOM_LOG_LEVEL"
    )

    parser = argparse.ArgumentParser(
        prog="secsemcom",
        description="Privacy-aware semantic communication over wiretap channels",
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")
    subparsers.required = True

    # pretrain command
    pretrain = subparsers.add_parser(
        "pretrain", parents=[common], help="Pretrain on a noiseless link with MSE"
    )
    pretrain.add_argument("--config", type=Path, required=True, help="Config file")
    pretrain.set_defaults(handler=_cmd_pretrain)

    # train command
    train = subparsers.add_parser(
        "train", parents=[common], help="Train through the wiretap channel"
    )
    train.add_argument("--config", type=Path, required=True, help="Config file")
    train.add_argument(
        "--checkpoint", type=Path, help="Pretrained checkpoint to start from"
    )
    train.set_defaults(handler=_cmd_train)

    channel_choices = [ChannelKind.AWGN.value, ChannelKind.MISO_MRT.value]

    # sweep command
    sweep = subparsers.add_parser(
        "sweep", parents=[common], help="Evaluate a checkpoint over SNR"
    )
    sweep.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint")
    sweep.add_argument("--config", type=Path, help="Take the channel from a config")
    sweep.add_argument("--channel", choices=channel_choices, help="Channel kind")
    sweep.add_argument("--snr-points", help="Comma separated SNR points in dB")
    sweep.add_argument("--receivers", help="Comma separated subset of bob,eve")
    sweep.add_argument("--num-eval-batches", type=int, help="0 evaluates all")
    sweep.add_argument("--batch-size", type=int, help="Evaluation batch size")
    sweep.set_defaults(handler=_cmd_sweep)

    # render command
    render = subparsers.add_parser(
        "render", parents=[common], help="Write reconstruction panels"
    )
    render.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint")
    render.add_argument(
        "--image-ids", nargs="+", required=True, help="Test image ids"
    )
    render.add_argument("--snr", type=float, required=True, help="Bob SNR in dB")
    render.add_argument("--config", type=Path, help="Take the channel from a config")
    render.add_argument("--channel", choices=channel_choices, help="Channel kind")
    render.set_defaults(handler=_cmd_render)

    # plot command
    plot = subparsers.add_parser(
        "plot", parents=[common], help="Plot SSIM-vs-SNR curves"
    )
    plot.add_argument(
        "--records", type=Path, nargs="+", required=True, help="Run directories"
    )
    plot.add_argument(
        "--allow-partial", action="store_true", help="Accept incomplete records"
    )
    plot.set_defaults(handler=_cmd_plot)

    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line interface.

    Args:
        argv: Arguments without the program name; defaults to sys.argv

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help
        return int(e.code) if isinstance(e.code, int) else 2

    level = (args.log_level or get_settings().SECSEMCOM_LOG_LEVEL).upper()
    if level not in logging.getLevelNamesMapping():
        parser.print_usage(sys.stderr)
        print(f"secsemcom: error: unknown log level {args.log_level!r}", file=sys.stderr)
        return 2
    configure_logging(level)
    try:
        return int(args.handler(args))
    except SecSemComError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    """Console script entry point."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
