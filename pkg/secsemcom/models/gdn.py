r"""Generalized divisive normalization.

.. math::
   y_i = \frac{x_i}{\sqrt{\beta_i + \sum_j \gamma_{ij} x_j^2}}

The inverse layer multiplies by the same denominator. One multiplication is
the usual IGDN layer; repeating it as a fixed point iteration
``z <- y * sqrt(beta + gamma z^2)`` converges to the exact inverse of the
forward map.
"""

import torch
import torch.nn.functional as F
from torch import nn

BETA_FLOOR = 1e-6
_PEDESTAL = (2.0**-18) ** 2


def _denominator(x: torch.Tensor, beta: torch.Tensor, gamma: torch.Tensor) -> torch.Tensor:
    # 1x1 convolution: beta_i + sum_j gamma[i, j] * x_j^2
    return F.conv2d(x * x, gamma[:, :, None, None], beta)


def gdn(
    x: torch.Tensor,
    beta: torch.Tensor,
    gamma: torch.Tensor,
    inverse: bool = False,
    iterations: int = 1,
) -> torch.Tensor:
    """Apply GDN (or its inverse) across the channel axis of ``x``.

    Args:
        x: Feature tensor (B, C, H, W)
        beta: Offsets (C,), every entry >= BETA_FLOOR
        gamma: Non-negative mixing matrix (C, C)
        inverse: Multiply instead of divide
        iterations: Fixed point steps for the inverse; 1 is plain IGDN

    Returns:
        torch.Tensor: Tensor with the shape of ``x``
    """
    if not inverse:
        return x * torch.rsqrt(_denominator(x, beta, gamma))
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    z = x
    for _ in range(iterations):
        z = x * torch.sqrt(_denominator(z, beta, gamma))
    return z


class NonNegativeParametrizer(nn.Module):
    """Store a bounded non-negative value as the square root of an offset."""

    pedestal: torch.Tensor
    bound: torch.Tensor

    def __init__(self, minimum: float = 0.0) -> None:
        super().__init__()
        self.register_buffer("pedestal", torch.tensor(_PEDESTAL))
        self.register_buffer("bound", torch.tensor((minimum + _PEDESTAL) ** 0.5))

    def init(self, value: torch.Tensor) -> torch.Tensor:
        """Raw parameter that maps back onto ``value``."""
        return torch.sqrt(torch.clamp(value + self.pedestal, min=self.pedestal))

    def forward(self, raw: torch.Tensor) -> torch.Tensor:
        bounded = torch.maximum(raw, self.bound.to(raw.dtype))
        return bounded * bounded - self.pedestal.to(raw.dtype)


class GDN(nn.Module):
    """GDN / IGDN layer with reparameterized beta and gamma."""

    def __init__(
        self,
        channels: int,
        inverse: bool = False,
        beta_min: float = BETA_FLOOR,
        gamma_init: float = 0.1,
    ) -> None:
        super().__init__()
        self.inverse = inverse
        self.beta_reparam = NonNegativeParametrizer(minimum=beta_min)
        self.gamma_reparam = NonNegativeParametrizer()
        self.beta = nn.Parameter(self.beta_reparam.init(torch.ones(channels)))
        self.gamma = nn.Parameter(
            self.gamma_reparam.init(gamma_init * torch.eye(channels))
        )

    @property
    def effective_beta(self) -> torch.Tensor:
        """Beta as used in the forward pass (>= beta_min)."""
        return self.beta_reparam(self.beta)

    @property
    def effective_gamma(self) -> torch.Tensor:
        """Gamma as used in the forward pass (>= 0)."""
        return self.gamma_reparam(self.gamma)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return gdn(x, self.effective_beta, self.effective_gamma, inverse=self.inverse)

    def extra_repr(self) -> str:
        return f"channels={self.beta.numel()}, inverse={self.inverse}"
