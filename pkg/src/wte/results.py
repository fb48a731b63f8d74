"""Result containers shared by the estimator catalogue."""

from dataclasses import dataclass, field

from .data_model import EffectDirection

__all__ = ["FoldEstimate", "WteEstimate", "ConfidenceInterval"]


@dataclass(frozen=True)
class FoldEstimate:
    """Per-fold point and variance; omega_k = cvar_part + kappa_mean."""

    omega_k: float
    sigma2_k: float
    fold_size: int
    cvar_part: float
    kappa_mean: float


@dataclass(frozen=True)
class WteEstimate:
    """Point estimate, variance, and per-fold breakdown.

    For the DM and IPW baselines ``naive_variance`` is True: the
    reported variance is not calibrated for inference and exists only
    for rough comparison.
    """

    alpha: float
    point: float
    variance: float
    n: int
    folds: tuple
    method: str  # "augmented" | "dm" | "ipw"
    direction: EffectDirection = EffectDirection.ADVERSE_HIGH
    naive_variance: bool = False


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    sided: str  # "two" | "upper" | "lower"
