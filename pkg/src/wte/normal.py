"""Standard normal pdf / cdf / inverse cdf.

The inverse cdf is Acklam's rational approximation refined with a single
Halley step, giving roughly machine accuracy.  Every other module that
needs a normal quantile (confidence intervals, power calculations, the
simulation sampler) routes through :func:`norm_ppf` so the whole package
shares one convention.
"""

import numpy as np
from scipy.special import ndtr

__all__ = ["norm_pdf", "norm_cdf", "norm_ppf"]

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Acklam coefficients for the central and tail rational approximations.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)

_P_LOW = 0.02425


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def norm_cdf(x):
    return ndtr(np.asarray(x, dtype=float))


def _acklam(p):
    p = np.asarray(p, dtype=float)
    x = np.empty_like(p)

    low = p < _P_LOW
    high = p > 1.0 - _P_LOW
    mid = ~(low | high)

    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = q * num / den
    if np.any(low):
        q = np.sqrt(-2.0 * np.log(p[low]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[low] = num / den
    if np.any(high):
        q = np.sqrt(-2.0 * np.log(1.0 - p[high]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[high] = -num / den
    return x


def norm_ppf(p):
    """Inverse standard normal cdf, elementwise.

    Accepts p in [0, 1]; endpoints map to -inf / +inf.
    """
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    if np.any((p < 0.0) | (p > 1.0) | np.isnan(p)):
        raise ValueError("probabilities must lie in [0, 1]")

    x = np.full(p.shape, np.nan)
    x[p == 0.0] = -np.inf
    x[p == 1.0] = np.inf
    interior = (p > 0.0) & (p < 1.0)
    if np.any(interior):
        pi = p[interior]
        xi = _acklam(pi)
        # one Halley refinement step; evaluate the residual through the
        # nearer tail to avoid cancellation for p close to 1
        err = np.where(pi <= 0.5, ndtr(xi) - pi, (1.0 - pi) - ndtr(-xi))
        u = err * _SQRT_2PI * np.exp(0.5 * xi * xi)
        xi = xi - u / (1.0 + 0.5 * xi * u)
        x[interior] = xi
    return float(x[0]) if scalar else x
