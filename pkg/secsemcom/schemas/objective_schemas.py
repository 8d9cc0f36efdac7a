"""Module providing objective configuration and loss report schemas."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class ObjectiveKind(str, Enum):
    """Training objective."""

    MSE = "mse"
    SECURE_MSE = "secure_mse"


class ObjectiveConfig(BaseModel):
    """Schema for the training objective.

    Both ``lambda`` and ``epsilon`` are quoted in per-pixel mean squared
    units; they are ignored when ``kind`` is MSE.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kind: ObjectiveKind = Field(ObjectiveKind.MSE, description="Objective")
    lambda_weight: float = Field(
        0.5, ge=0, alias="lambda", description="Weight of the leakage penalty"
    )
    epsilon_threshold: float = Field(
        0.05,
        ge=0,
        alias="epsilon",
        description="Per-pixel MSE to black above which Eve is penalised",
    )

    @property
    def label(self) -> str:
        """Short label used for plot legends and tables."""
        if self.kind is ObjectiveKind.MSE:
            return "MSE"
        return "SecureMSE"


class LossReport(BaseModel):
    """Batch diagnostics produced alongside an objective value."""

    total: float = Field(..., description="Objective value")
    bob_distortion: float = Field(..., description="Mean d(s, s_hat_b)")
    eve_blackness_distance: float = Field(
        0.0, description="Mean d(0, s_hat_e); 0 when Eve is not decoded"
    )
    penalty_active_fraction: float = Field(
        0.0, ge=0, le=1, description="Fraction of items with d(0, s_hat_e) > eps"
    )
