"""Estimator catalogue: augmented, direct-method, IPW baselines,
confidence intervals, and influence-value diagnostics.

The augmented estimator delegates to :mod:`wte.crossfit`; the DM and
IPW baselines share its fold machinery but skip the orthogonalizing
augmentation, so their variance columns are naive (not calibrated for
inference).
"""

import math

import numpy as np

from .crossfit import (
    estimate_wte,
    fold_fits,
    kappa,
    threshold_weight,
    _pop_mean,
    _pop_var,
)
from .cvar import empirical_cvar, hinge_about
from .data_model import EffectDirection
from .errors import LevelOutOfRange
from .normal import norm_ppf
from .results import ConfidenceInterval, FoldEstimate, WteEstimate

__all__ = [
    "estimate_wte",
    "dm_estimate",
    "ipw_estimate",
    "confidence_interval",
    "influence_values",
]


def _negated(data, config):
    from .crossfit import negated_problem

    return negated_problem(data, config)


def dm_estimate(data, alpha, K, config, seed=0,
                direction=EffectDirection.ADVERSE_HIGH, pool=None):
    """Direct method: K-fold average of the empirical CVaR of the
    fitted CATE on each main fold."""
    if direction is EffectDirection.DESIRED_HIGH:
        flipped, fconfig = _negated(data, config)
        est = dm_estimate(flipped, alpha, K, fconfig, seed=seed, pool=pool)
        return WteEstimate(
            alpha=alpha, point=-est.point, variance=est.variance, n=est.n,
            folds=tuple(
                FoldEstimate(-f.omega_k, f.sigma2_k, f.fold_size, -f.cvar_part, 0.0)
                for f in est.folds
            ),
            method="dm", direction=direction, naive_variance=True,
        )

    folds, fits = fold_fits(data, alpha, K, config, pool=pool, seed=seed)
    per_fold = []
    for k in range(K):
        idx = folds.indices(k)
        cate = fits[k].cate(data.covariates[idx])
        value = empirical_cvar(cate, alpha).value
        hinge = hinge_about(cate, fits[k].q_hat)
        sigma2 = _pop_var(hinge) / alpha ** 2
        per_fold.append(FoldEstimate(value, sigma2, int(idx.size), value, 0.0))
    return WteEstimate(
        alpha=alpha,
        point=_pop_mean([f.omega_k for f in per_fold]),
        variance=_pop_mean([f.sigma2_k for f in per_fold]),
        n=data.n, folds=tuple(per_fold), method="dm",
        direction=direction, naive_variance=True,
    )


def ipw_fold_value(data, indices, alpha, fit):
    """IPW summand mean and population variance on one fold."""
    X = data.covariates[indices]
    y = data.outcomes[indices]
    z = data.treatments[indices].astype(float)
    h_x = threshold_weight(fit.cate(X), fit.q_hat, alpha)
    e_x = fit.e.predict_prob(X)
    summand = h_x * y * (z / e_x - (1.0 - z) / (1.0 - e_x))
    if indices.size == 1:
        return _pop_mean(summand), 0.0
    return _pop_mean(summand), _pop_var(summand)


def ipw_estimate(data, alpha, K, config, seed=0,
                 direction=EffectDirection.ADVERSE_HIGH, pool=None):
    """Inverse-probability-weighted baseline with the estimated
    threshold weight."""
    if direction is EffectDirection.DESIRED_HIGH:
        flipped, fconfig = _negated(data, config)
        est = ipw_estimate(flipped, alpha, K, fconfig, seed=seed, pool=pool)
        return WteEstimate(
            alpha=alpha, point=-est.point, variance=est.variance, n=est.n,
            folds=tuple(
                FoldEstimate(-f.omega_k, f.sigma2_k, f.fold_size, 0.0, -f.omega_k)
                for f in est.folds
            ),
            method="ipw", direction=direction, naive_variance=True,
        )

    folds, fits = fold_fits(data, alpha, K, config, pool=pool, seed=seed)
    per_fold = []
    for k in range(K):
        idx = folds.indices(k)
        value, var = ipw_fold_value(data, idx, alpha, fits[k])
        per_fold.append(FoldEstimate(value, var, int(idx.size), 0.0, value))
    return WteEstimate(
        alpha=alpha,
        point=_pop_mean([f.omega_k for f in per_fold]),
        variance=_pop_mean([f.sigma2_k for f in per_fold]),
        n=data.n, folds=tuple(per_fold), method="ipw",
        direction=direction, naive_variance=True,
    )


def confidence_interval(est, level, sided="two"):
    """Normal interval point +/- z * sigma_hat / sqrt(n).

    ``sided`` is "two", "upper" (upper bound only, lower = -inf) or
    "lower" (lower bound only, upper = +inf).
    """
    if not (0.0 < level < 1.0):
        raise LevelOutOfRange(f"level must lie in (0, 1), got {level}")
    se = math.sqrt(max(est.variance, 0.0) / est.n)
    if sided == "two":
        z = norm_ppf(1.0 - (1.0 - level) / 2.0)
        return ConfidenceInterval(est.point - z * se, est.point + z * se, level, sided)
    z = norm_ppf(level)
    if sided == "upper":
        return ConfidenceInterval(-math.inf, est.point + z * se, level, sided)
    if sided == "lower":
        return ConfidenceInterval(est.point - z * se, math.inf, level, sided)
    raise LevelOutOfRange(f"unknown sidedness {sided!r}")


def influence_values(data, alpha, K, config, seed=0, pool=None):
    """Estimated per-observation influence values (diagnostic).

    psi_i = (1/alpha)(cate_k(X_i) - q_k)_+ + q_k - omega_hat + kappa_i
    with fold-local fits.  The mean is close to zero by construction
    but not exactly zero because the CVaR part of each fold recomputes
    its own dual infimum.
    """
    folds, fits = fold_fits(data, alpha, K, config, pool=pool, seed=seed)
    per_fold = []
    from .crossfit import fold_estimate

    for k in range(K):
        per_fold.append(fold_estimate(data, folds, k, alpha, fits[k]))
    omega = _pop_mean([f.omega_k for f in per_fold])

    psi = np.empty(data.n)
    for k in range(K):
        idx = folds.indices(k)
        fit = fits[k]
        X = data.covariates[idx]
        cate = fit.cate(X)
        h_x = threshold_weight(cate, fit.q_hat, alpha)
        kap = kappa(data.outcomes[idx], data.treatments[idx],
                    fit.mu0.predict(X), fit.mu1.predict(X),
                    fit.e.predict_prob(X), h_x)
        if math.isinf(fit.q_hat):
            # alpha = 1: hinge active everywhere, (cate - q)/alpha + q -> cate
            psi[idx] = cate - omega + kap
        else:
            psi[idx] = (
                np.maximum(cate - fit.q_hat, 0.0) / alpha + fit.q_hat - omega + kap
            )
    return psi
