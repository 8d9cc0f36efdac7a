"""Training objectives: MSE and the privacy-aware SecureMSE.

SecureMSE adds a thresholded leakage penalty on Eve's reconstruction:

    d'(s_hat_e) = -d(0, s_hat_e)   if d(0, s_hat_e) > eps
                  0                 otherwise

    L = mean_i [ d(s_i, s_hat_b_i) - lambda * d'(s_hat_e_i) ]

Driving Eve's reconstruction towards the all-black image bounds the
entropy of what she recovers. The threshold gate is a constant under
differentiation.
"""

import logging
from typing import Optional

import torch

from secsemcom.core.errors import ShapeMismatchError
from secsemcom.schemas.objective_schemas import LossReport, ObjectiveConfig, ObjectiveKind

logger = logging.getLogger(__name__)


def _check_shapes(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}"
        )
    if a.dim() < 2:
        raise ShapeMismatchError(f"expected a batch of images, got {tuple(a.shape)}")


def distortion(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Per-item mean squared error over all pixels, shape (B,)."""
    _check_shapes(a, b)
    return ((a - b) ** 2).flatten(start_dim=1).mean(dim=1)


def distance_to_black(images: torch.Tensor) -> torch.Tensor:
    """d(0, s_hat) per item: mean squared pixel value."""
    return (images**2).flatten(start_dim=1).mean(dim=1)


def mse_loss(s: torch.Tensor, s_hat: torch.Tensor) -> torch.Tensor:
    """Batch mean of the per-item distortion."""
    return distortion(s, s_hat).mean()


def leakage_penalty(s_hat_e: torch.Tensor, epsilon: float) -> torch.Tensor:
    """Per-item d' = -d(0, s_hat_e) above the threshold, 0 below it."""
    d_black = distance_to_black(s_hat_e)
    active = (d_black.detach() > epsilon).to(d_black.dtype)
    return -d_black * active


def secure_mse_loss(
    s: torch.Tensor,
    s_hat_b: torch.Tensor,
    s_hat_e: torch.Tensor,
    config: ObjectiveConfig,
) -> tuple[torch.Tensor, LossReport]:
    """SecureMSE objective and its diagnostics."""
    _check_shapes(s, s_hat_b)
    _check_shapes(s, s_hat_e)
    d_bob = distortion(s, s_hat_b)
    penalty = leakage_penalty(s_hat_e, config.epsilon_threshold)
    total = (d_bob - config.lambda_weight * penalty).mean()

    with torch.no_grad():
        d_black = distance_to_black(s_hat_e)
        active = (d_black > config.epsilon_threshold).to(d_black.dtype)
        report = LossReport(
            total=float(total.detach()),
            bob_distortion=float(d_bob.mean()),
            eve_blackness_distance=float(d_black.mean()),
            penalty_active_fraction=float(active.mean()),
        )
    return total, report


def needs_eve_branch(config: ObjectiveConfig) -> bool:
    """Whether the objective looks at Eve's reconstruction at all."""
    return config.kind is ObjectiveKind.SECURE_MSE


def compute_objective(
    s: torch.Tensor,
    s_hat_b: torch.Tensor,
    s_hat_e: Optional[torch.Tensor],
    config: ObjectiveConfig,
) -> tuple[torch.Tensor, LossReport]:
    """Dispatch on the objective kind.

    Raises:
        ValueError: If SecureMSE is requested without Eve's reconstruction
    """
    if config.kind is ObjectiveKind.MSE:
        total = mse_loss(s, s_hat_b)
        value = float(total.detach())
        return total, LossReport(total=value, bob_distortion=value)
    if s_hat_e is None:
        raise ValueError("SecureMSE needs Eve's reconstruction")
    return secure_mse_loss(s, s_hat_b, s_hat_e, config)
