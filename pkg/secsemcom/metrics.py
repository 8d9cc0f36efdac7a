"""Reconstruction quality and leakage metrics.

All functions accept a single image (C, H, W) or a batch (B, C, H, W) with
pixel values in [0, 1]; batched inputs return one value per item.
"""

import logging
import math
from collections.abc import Iterable

import torch
import torch.nn.functional as F

from secsemcom.core.errors import ShapeMismatchError
from secsemcom.objectives import distance_to_black
from secsemcom.schemas.metric_schemas import ImageMetrics, MetricReport

logger = logging.getLogger(__name__)

DATA_RANGE = 1.0
C1 = (0.01 * DATA_RANGE) ** 2
C2 = (0.03 * DATA_RANGE) ** 2
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
PSNR_CAP_DB = 99.0


def _as_batch(s: torch.Tensor, s_hat: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, bool]:
    if s.shape != s_hat.shape:
        raise ShapeMismatchError(
            f"shape mismatch: {tuple(s.shape)} vs {tuple(s_hat.shape)}"
        )
    if s.dim() == 3:
        return s.unsqueeze(0), s_hat.unsqueeze(0), True
    if s.dim() != 4:
        raise ShapeMismatchError(f"expected (C, H, W) or (B, C, H, W), got {tuple(s.shape)}")
    return s, s_hat, False


def _ssim_formula(
    mu_x: torch.Tensor,
    mu_y: torch.Tensor,
    var_x: torch.Tensor,
    var_y: torch.Tensor,
    cov_xy: torch.Tensor,
) -> torch.Tensor:
    luminance = (2 * mu_x * mu_y + C1) / (mu_x**2 + mu_y**2 + C1)
    structure = (2 * cov_xy + C2) / (var_x + var_y + C2)
    return luminance * structure


def ssim_global(s: torch.Tensor, s_hat: torch.Tensor) -> torch.Tensor:
    """SSIM with image-wide statistics per channel, averaged over channels."""
    x, y, single = _as_batch(s, s_hat)
    x = x.flatten(start_dim=2)
    y = y.flatten(start_dim=2)
    mu_x = x.mean(dim=2)
    mu_y = y.mean(dim=2)
    var_x = ((x - mu_x[..., None]) ** 2).mean(dim=2)
    var_y = ((y - mu_y[..., None]) ** 2).mean(dim=2)
    cov_xy = ((x - mu_x[..., None]) * (y - mu_y[..., None])).mean(dim=2)
    value = _ssim_formula(mu_x, mu_y, var_x, var_y, cov_xy).mean(dim=1)
    return value[0] if single else value


def gaussian_window(
    size: int = WINDOW_SIZE,
    sigma: float = WINDOW_SIGMA,
    dtype: torch.dtype = torch.float32,
    device: torch.device | str = "cpu",
) -> torch.Tensor:
    """Normalized 2-D Gaussian window of shape (size, size)."""
    coords = torch.arange(size, dtype=dtype, device=device) - (size - 1) / 2.0
    g = torch.exp(-(coords**2) / (2 * sigma**2))
    g = g / g.sum()
    return torch.outer(g, g)


def ssim_windowed(s: torch.Tensor, s_hat: torch.Tensor) -> torch.Tensor:
    """Mean SSIM over 11x11 Gaussian windows (sigma 1.5), averaged over channels.

    Only fully contained windows are used. Images smaller than the window
    fall back to ``ssim_global``.
    """
    x, y, single = _as_batch(s, s_hat)
    _, channels, height, width = x.shape
    if height < WINDOW_SIZE or width < WINDOW_SIZE:
        logger.warning(
            "Image %dx%d smaller than the %dx%d SSIM window; using global SSIM",
            height,
            width,
            WINDOW_SIZE,
            WINDOW_SIZE,
        )
        return ssim_global(s, s_hat)

    window = gaussian_window(dtype=x.dtype, device=x.device)
    kernel = window.expand(channels, 1, WINDOW_SIZE, WINDOW_SIZE)

    def local_mean(t: torch.Tensor) -> torch.Tensor:
        return F.conv2d(t, kernel, groups=channels)

    mu_x = local_mean(x)
    mu_y = local_mean(y)
    var_x = local_mean(x * x) - mu_x**2
    var_y = local_mean(y * y) - mu_y**2
    cov_xy = local_mean(x * y) - mu_x * mu_y
    ssim_map = _ssim_formula(mu_x, mu_y, var_x, var_y, cov_xy)
    value = ssim_map.flatten(start_dim=2).mean(dim=2).mean(dim=1)
    return value[0] if single else value


def psnr(s: torch.Tensor, s_hat: torch.Tensor) -> torch.Tensor:
    """PSNR in dB with peak 1; identical images report PSNR_CAP_DB."""
    x, y, single = _as_batch(s, s_hat)
    mse = ((x - y) ** 2).flatten(start_dim=1).mean(dim=1)
    value = torch.full_like(mse, PSNR_CAP_DB)
    nonzero = mse > 0
    value[nonzero] = torch.clamp(
        10.0 * torch.log10(DATA_RANGE**2 / mse[nonzero]), max=PSNR_CAP_DB
    )
    return value[0] if single else value


def blackness(s_hat_e: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """(mean intensity, d(0, s_hat_e)) of an image or per batch item."""
    batch = s_hat_e.unsqueeze(0) if s_hat_e.dim() == 3 else s_hat_e
    mean_intensity = batch.flatten(start_dim=1).mean(dim=1)
    d_black = distance_to_black(batch)
    if s_hat_e.dim() == 3:
        return mean_intensity[0], d_black[0]
    return mean_intensity, d_black


def measure(
    s: torch.Tensor,
    s_hat: torch.Tensor,
    windowed: bool = True,
    per_image: bool = False,
) -> MetricReport:
    """SSIM, PSNR and mean intensity of a batch of reconstructions."""
    x, y, _ = _as_batch(s, s_hat)
    with torch.no_grad():
        ssim_values = ssim_windowed(x, y) if windowed else ssim_global(x, y)
        psnr_values = psnr(x, y)
        intensity, _ = blackness(y)
    breakdown = None
    if per_image:
        breakdown = [
            ImageMetrics(ssim=float(a), psnr_db=float(b), mean_intensity=float(c))
            for a, b, c in zip(ssim_values, psnr_values, intensity)
        ]
    return MetricReport(
        ssim=float(ssim_values.mean()),
        psnr_db=float(psnr_values.mean()),
        mean_intensity=float(intensity.mean()),
        num_images=int(x.shape[0]),
        per_image=breakdown,
    )


def summarize(reports: Iterable[MetricReport]) -> MetricReport:
    """Average reports weighted by their image counts."""
    reports = list(reports)
    total = sum(r.num_images for r in reports)
    if total == 0:
        return MetricReport(ssim=math.nan, psnr_db=math.nan, mean_intensity=math.nan, num_images=0)

    def weighted(attr: str) -> float:
        return sum(getattr(r, attr) * r.num_images for r in reports) / total

    return MetricReport(
        ssim=weighted("ssim"),
        psnr_db=weighted("psnr_db"),
        mean_intensity=weighted("mean_intensity"),
        num_images=total,
    )
