"""Sample-size and power calculations from the asymptotic variance.

For the one-sided test H0: effect >= 0 vs HA: effect < -epsilon at
size 0.05 and power 0.80 the multiplier (z_0.95 + z_0.80)^2 = 6.183,
so n >= 6.2 * sigma^2 / epsilon^2 up to rounding.
"""

import math
from dataclasses import dataclass

from .errors import InvalidSpec
from .normal import norm_cdf, norm_ppf

__all__ = ["PowerSpec", "min_sample_size", "achieved_power", "power_multiplier"]


@dataclass(frozen=True)
class PowerSpec:
    sigma2: float
    epsilon: float
    size: float = 0.05
    power: float = 0.80
    sided: str = "one"  # "one" | "two"

    def __post_init__(self):
        if self.sigma2 <= 0 or not math.isfinite(self.sigma2):
            raise InvalidSpec("sigma2 must be positive")
        if self.epsilon <= 0 or not math.isfinite(self.epsilon):
            raise InvalidSpec("epsilon must be positive")
        if not (0.0 < self.size < 1.0) or not (0.0 < self.power < 1.0):
            raise InvalidSpec("size and power must lie in (0, 1)")
        if self.sided not in ("one", "two"):
            raise InvalidSpec("sided must be 'one' or 'two'")


def _z_size(spec):
    size = spec.size if spec.sided == "one" else spec.size / 2.0
    return norm_ppf(1.0 - size)


def power_multiplier(spec):
    """(z_{1-size} + z_{power})^2; 6.183 at the 0.05/0.80 defaults."""
    return (_z_size(spec) + norm_ppf(spec.power)) ** 2


def min_sample_size(spec):
    """Smallest n with the requested size and power; at least 2."""
    n = math.ceil(power_multiplier(spec) * spec.sigma2 / spec.epsilon ** 2)
    return max(n, 2)


def achieved_power(n, spec):
    """Power of the test at sample size n (the spec's power field is
    ignored)."""
    if n < 2:
        raise InvalidSpec("n must be at least 2")
    sd = math.sqrt(spec.sigma2)
    return float(norm_cdf(spec.epsilon * math.sqrt(n) / sd - _z_size(spec)))
