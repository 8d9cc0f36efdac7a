"""Exception hierarchy shared by every secsemcom module.

The CLI maps any ``SecSemComError`` to exit code 1 and prints its message,
so messages are written to stand on their own as one-line diagnostics.
"""


class SecSemComError(Exception):
    """Base class for all errors raised deliberately by secsemcom."""


class ConfigurationError(SecSemComError):
    """Raised for missing settings, bad config files or invalid values."""


class DatasetError(SecSemComError):
    """Raised when the image corpus cannot be read or validated."""


class ShapeMismatchError(SecSemComError, ValueError):
    """Raised when tensors do not have the shapes an operation requires."""


class PowerNormalizationError(SecSemComError, ValueError):
    """Raised when a latent vector carries no power and cannot be scaled."""


class ChannelError(SecSemComError, ValueError):
    """Raised for invalid channel inputs (zero channel, odd latent length)."""


class CheckpointError(SecSemComError):
    """Raised when a checkpoint is missing, corrupt or does not match."""


class TrainingDivergedError(SecSemComError):
    """Raised when the training loss becomes NaN or infinite."""

    def __init__(self, message: str, epoch: int, step: int) -> None:
        """Initialize the error.

        Args:
            message: Human readable diagnostic
            epoch: Epoch index at which divergence was detected
            step: Global optimizer step at which divergence was detected
        """
        super().__init__(message)
        self.epoch = epoch
        self.step = step


class RunRecordError(SecSemComError):
    """Raised for unreadable or incomplete run records."""


class UnknownImageError(SecSemComError, KeyError):
    """Raised when an image id is not part of the requested split."""

    def __str__(self) -> str:
        # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""
