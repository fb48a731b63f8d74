"""Empirical conditional value-at-risk (tail average) primitives.

The worst-case subpopulation effect of a CATE vector is the empirical
CVaR of its values: the dual problem

    inf_eta { (1/alpha) * mean[(v - eta)_+] + eta }

is piecewise linear in eta with a minimizer at the empirical
(1 - alpha)-quantile, so the infimum has the closed form
``eta* + sum((v - eta*)_+) / (alpha * m)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaOutOfRange, EmptyInput
from .normal import norm_pdf, norm_ppf

__all__ = [
    "CvarResult",
    "empirical_quantile",
    "cvar_dual_objective",
    "empirical_cvar",
    "closed_form_normal_wte",
]


@dataclass(frozen=True)
class CvarResult:
    """Value of the dual infimum together with a minimizing threshold."""

    value: float
    eta_star: float
    alpha: float


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0) or math.isnan(alpha):
        raise AlphaOutOfRange(alpha)


def _as_values(values):
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("empty value vector")
    return v


def empirical_quantile(values, p):
    """Empirical p-quantile inf{t : F_hat(t) >= p} for p in (0, 1].

    Equals the ceil(p*m)-th smallest value (1-indexed order statistic).
    """
    v = _as_values(values)
    if not (0.0 < p <= 1.0) or math.isnan(p):
        raise AlphaOutOfRange(p)
    k = math.ceil(p * v.size)
    return float(np.partition(v, k - 1)[k - 1])


def cvar_dual_objective(values, alpha, eta):
    """Evaluate (1/alpha) * mean[(v - eta)_+] + eta; convex in eta."""
    _check_alpha(alpha)
    v = _as_values(values)
    hinge = np.maximum(v - eta, 0.0)
    return math.fsum(hinge) / (alpha * v.size) + eta


def empirical_cvar(values, alpha):
    """Exact minimum of the dual objective over eta.

    For alpha < 1 the minimizer is the empirical (1-alpha)-quantile; at
    alpha = 1 the value reduces to the plain mean.
    """
    _check_alpha(alpha)
    v = _as_values(values)
    if alpha == 1.0:
        eta = float(np.min(v))
        return CvarResult(value=math.fsum(v) / v.size, eta_star=eta, alpha=1.0)
    eta = empirical_quantile(v, 1.0 - alpha)
    tail = math.fsum(np.maximum(v - eta, 0.0))
    return CvarResult(value=eta + tail / (alpha * v.size), eta_star=eta, alpha=alpha)


def hinge_about(values, threshold):
    """(v - threshold)_+ with a -inf threshold meaning the identity map.

    The -inf sentinel is the alpha = 1 case: the hinge is active
    everywhere, and downstream variances of (v - q)_+ are computed as
    variances of v itself (translation invariance).
    """
    v = np.asarray(values, dtype=float)
    if np.isneginf(threshold):
        return v.copy()
    return np.maximum(v - threshold, 0.0)


def closed_form_normal_wte(mean, sd, alpha):
    """CVaR_alpha of N(mean, sd^2): mean + sd * pdf(ppf(1-alpha)) / alpha."""
    _check_alpha(alpha)
    if sd < 0:
        raise ValueError("sd must be nonnegative")
    if alpha == 1.0 or sd == 0.0:
        return float(mean)
    z = norm_ppf(1.0 - alpha)
    return float(mean + sd * norm_pdf(z) / alpha)
