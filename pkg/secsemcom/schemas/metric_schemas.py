"""Module providing reconstruction metric report schemas."""

from pydantic import BaseModel, Field


class ImageMetrics(BaseModel):
    """Metrics for a single reconstructed image."""

    ssim: float
    psnr_db: float
    mean_intensity: float


class MetricReport(BaseModel):
    """Averaged reconstruction metrics over a set of images."""

    ssim: float = Field(..., description="Mean SSIM in [-1, 1]")
    psnr_db: float = Field(..., description="Mean PSNR in dB (capped)")
    mean_intensity: float = Field(
        ..., description="Mean pixel value of the reconstructions"
    )
    num_images: int = Field(..., ge=0)
    per_image: list[ImageMetrics] | None = Field(
        None, description="Optional per-item breakdown"
    )
