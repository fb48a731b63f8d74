"""K-fold cross-fitting of the augmented worst-case effect estimator.

Per fold k: nuisance models are fitted on the complement I_k^c, the
CATE quantile q_hat is taken on the auxiliary covariates (or an
external unlabeled pool), and the fold estimate combines the CVaR of
predicted CATEs on the main fold with the mean augmentation term.
Fold results are averaged unweighted.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .cvar import _check_alpha, empirical_cvar, empirical_quantile, hinge_about
from .data_model import EffectDirection, ObservationSet, validate
from .errors import FoldTooSmall, KOutOfRange
from .nuisance import fit_outcome_model, fit_propensity_model
from .results import FoldEstimate, WteEstimate

__all__ = [
    "FoldAssignment",
    "NuisanceFit",
    "make_folds",
    "fit_fold_nuisances",
    "kappa",
    "fold_estimate",
    "estimate_wte",
]

ALPHA_ONE_SENTINEL = -math.inf


@dataclass(frozen=True)
class FoldAssignment:
    """Balanced random partition of [0, n) into K folds."""

    fold_of: np.ndarray
    K: int
    seed: int

    def indices(self, k):
        return np.flatnonzero(self.fold_of == k)

    def complement(self, k):
        return np.flatnonzero(self.fold_of != k)


@dataclass(frozen=True)
class NuisanceFit:
    """Fitted per-fold nuisances plus the CATE quantile estimate."""

    mu0: object
    mu1: object
    e: object
    q_hat: float

    def cate(self, X):
        return self.mu1.predict(X) - self.mu0.predict(X)


def make_folds(n, K, seed):
    """Uniformly random balanced partition; deterministic given seed."""
    if not (2 <= K <= n):
        raise KOutOfRange(f"need 2 <= K <= n, got K={K}, n={n}")
    perm = np.random.default_rng(np.random.SeedSequence(seed)).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    sizes = [n // K + (1 if k < n % K else 0) for k in range(K)]
    start = 0
    for k, size in enumerate(sizes):
        fold_of[perm[start:start + size]] = k
        start += size
    return FoldAssignment(fold_of=fold_of, K=K, seed=seed)


def fit_fold_nuisances(data, folds, k, alpha, config, pool=None):
    """Fit mu0, mu1, e on the fold complement and estimate q_hat.

    The quantile pool defaults to the auxiliary covariates, keeping
    q_hat independent of the main fold; an external unlabeled pool
    takes precedence when provided.  At alpha = 1 the quantile is the
    -inf sentinel (the threshold function is identically 1).
    """
    aux = folds.complement(k)
    X = data.covariates[aux]
    y = data.outcomes[aux]
    z = data.treatments[aux]

    mu0 = fit_outcome_model(config, X, y, z == 0, arm=0, seed=(config.seed, k, 0))
    mu1 = fit_outcome_model(config, X, y, z == 1, arm=1, seed=(config.seed, k, 1))
    e = fit_propensity_model(config, X, z, seed=(config.seed, k, 2))

    if alpha == 1.0:
        q_hat = ALPHA_ONE_SENTINEL
    else:
        pool_X = pool.covariates if pool is not None else X
        if pool_X.shape[1] != data.d:
            raise ValueError("pool covariate dimension does not match dataset")
        cate_pool = mu1.predict(pool_X) - mu0.predict(pool_X)
        q_hat = empirical_quantile(cate_pool, 1.0 - alpha)
    return NuisanceFit(mu0=mu0, mu1=mu1, e=e, q_hat=q_hat)


def kappa(y, z, mu0_x, mu1_x, e_x, h_x):
    """Augmentation term h * (z/e * (y - mu1) - (1-z)/(1-e) * (y - mu0)).

    Mean zero at the true nuisances under no unobserved confounding;
    vectorizes over numpy arrays.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    return h_x * (z / e_x * (y - mu1_x) - (1.0 - z) / (1.0 - e_x) * (y - mu0_x))


def threshold_weight(cate, q_hat, alpha):
    """h(x) = (1/alpha) * 1{cate(x) >= q_hat}; ties are included."""
    return (np.asarray(cate) >= q_hat).astype(float) / alpha


def _pop_mean(v):
    return math.fsum(v) / len(v)


def _pop_var(v):
    m = _pop_mean(v)
    return math.fsum((x - m) ** 2 for x in v) / len(v)


def fold_estimate(data, folds, k, alpha, fit):
    """Augmented estimate and variance on main fold k.

    The CVaR part recomputes its own dual infimum on the main fold;
    q_hat enters only through the threshold weight and the variance.
    """
    idx = folds.indices(k)
    m = idx.size
    if m < 2:
        raise FoldTooSmall(f"fold {k} has {m} observations; variance undefined")
    X = data.covariates[idx]
    y = data.outcomes[idx]
    z = data.treatments[idx]

    cate = fit.cate(X)
    e_x = fit.e.predict_prob(X)
    cvar_part = empirical_cvar(cate, alpha).value
    h_x = threshold_weight(cate, fit.q_hat, alpha)
    kap = kappa(y, z, fit.mu0.predict(X), fit.mu1.predict(X), e_x, h_x)
    kappa_mean = _pop_mean(kap)
    hinge = hinge_about(cate, fit.q_hat)
    sigma2 = _pop_var(hinge) / alpha ** 2 + _pop_var(kap)
    return FoldEstimate(
        omega_k=cvar_part + kappa_mean,
        sigma2_k=sigma2,
        fold_size=int(m),
        cvar_part=cvar_part,
        kappa_mean=kappa_mean,
    )


def _negate(fn):
    return (lambda X, _fn=fn: -np.asarray(_fn(X), dtype=float))


def negated_problem(data, config):
    """Flip outcome signs (and oracle outcome models) for the
    desired-high convention."""
    flipped = ObservationSet(
        covariates=data.covariates,
        outcomes=-data.outcomes,
        treatments=data.treatments,
        column_names=data.column_names,
    )
    if config.outcome_model == "oracle":
        config = replace(
            config,
            oracle_mu0=_negate(config.oracle_mu0) if config.oracle_mu0 else None,
            oracle_mu1=_negate(config.oracle_mu1) if config.oracle_mu1 else None,
        )
    return flipped, config


def _negate_fold(f):
    return FoldEstimate(
        omega_k=-f.omega_k, sigma2_k=f.sigma2_k, fold_size=f.fold_size,
        cvar_part=-f.cvar_part, kappa_mean=-f.kappa_mean,
    )


def fold_fits(data, alpha, K, config, pool=None, seed=0):
    """Folds plus per-fold nuisance fits; shared by all estimators."""
    _check_alpha(alpha)
    needs_arms = config.outcome_model != "oracle" or config.propensity_model in (
        "logistic", "forest",
    )
    validate(data, fitting_requested=needs_arms)
    folds = make_folds(data.n, K, seed)
    fits = [fit_fold_nuisances(data, folds, k, alpha, config, pool) for k in range(K)]
    return folds, fits


def estimate_wte(data, alpha, K, config, direction=EffectDirection.ADVERSE_HIGH,
                 pool=None, seed=0):
    """Cross-fitted augmented estimator: unweighted fold averages of
    omega_k and sigma2_k."""
    if direction is EffectDirection.DESIRED_HIGH:
        flipped, flipped_config = negated_problem(data, config)
        est = estimate_wte(flipped, alpha, K, flipped_config,
                           direction=EffectDirection.ADVERSE_HIGH, pool=pool, seed=seed)
        return WteEstimate(
            alpha=alpha, point=-est.point, variance=est.variance, n=est.n,
            folds=tuple(_negate_fold(f) for f in est.folds),
            method="augmented", direction=EffectDirection.DESIRED_HIGH,
        )

    folds, fits = fold_fits(data, alpha, K, config, pool=pool, seed=seed)
    per_fold = tuple(
        fold_estimate(data, folds, k, alpha, fits[k]) for k in range(K)
    )
    point = _pop_mean([f.omega_k for f in per_fold])
    variance = _pop_mean([f.sigma2_k for f in per_fold])
    return WteEstimate(
        alpha=alpha, point=point, variance=variance, n=data.n,
        folds=per_fold, method="augmented", direction=direction,
    )
