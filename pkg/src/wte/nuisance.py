"""Nuisance-parameter estimation: outcome models, propensity models.

All built-in learners are fitted by empirical loss minimization
(penalized least squares for outcomes, penalized log-loss for the
propensity) and are deterministic given (config, data, seed).  Oracle
wrappers expose known ground-truth functions for simulations, and
``corrupt_oracle`` injects a smooth perturbation with an exactly
controlled sup-norm decay rate for orthogonality experiments.
"""

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    InsufficientArmSamples,
    NonConvergence,
    SingleArmInput,
    SingularDesign,
)

__all__ = [
    "NuisanceConfig",
    "RidgeRegressor",
    "ElasticNetRegressor",
    "PolynomialSieveRegressor",
    "TreeEnsembleRegressor",
    "TreeEnsembleClassifier",
    "ElasticNetLogistic",
    "KnownPropensity",
    "OracleRegressor",
    "OraclePropensity",
    "fit_outcome_model",
    "fit_propensity_model",
    "corrupt_oracle",
    "penalized_logloss",
    "penalized_logloss_grad",
]


@dataclass(frozen=True)
class NuisanceConfig:
    """Model choices and hyperparameters for nuisance fitting.

    outcome_model: "ridge" | "elastic_net" | "sieve" | "forest" | "oracle"
    propensity_model: "logistic" | "forest" | "known" | "oracle"
    """

    outcome_model: str = "ridge"
    propensity_model: str = "logistic"
    clip_c: float = 0.01
    cv_folds: int = 2
    seed: int = 0

    ridge_penalty: float = 1e-3          # None -> cv over ridge_grid
    ridge_grid: tuple = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    enet_penalty: float = 1e-3
    enet_mix: float = 0.5
    sieve_degree: int = 3
    forest_tune: bool = False
    forest_depth: int = 5
    forest_trees: int = 50
    forest_min_leaf: int = 5
    forest_grid_depth: tuple = (3, 5, 8)
    forest_grid_trees: tuple = (50, 200)
    logistic_penalty: float = 1e-3
    logistic_mix: float = 0.5
    logistic_max_iter: int = 5000
    logistic_tol: float = 1e-9

    known_propensity: object = 0.5       # constant or callable of X
    oracle_mu0: object = None
    oracle_mu1: object = None
    oracle_propensity: object = None

    # optional corruption of oracle nuisances (orthogonality studies)
    corrupt_gamma: object = None
    corrupt_amplitude: float = 1.0
    corrupt_seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.clip_c < 0.5):
            raise ValueError("clip_c must lie in (0, 0.5)")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")


def _with_intercept(X):
    return np.hstack([np.ones((X.shape[0], 1)), X])


def seed_tuple(seed, *extra):
    """Flatten a possibly-tuple seed plus extra stream labels into a
    flat tuple usable as SeedSequence entropy."""
    base = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    return base + extra


# ---------------------------------------------------------------------------
# outcome regressors
# ---------------------------------------------------------------------------


class RidgeRegressor:
    """Least squares with an L2 penalty on the slopes (intercept free).

    The penalty is applied unscaled: the fitted slope on centered 1-d
    data is sum(xy) / (sum(x^2) + penalty).
    """

    def __init__(self, penalty=1e-3):
        self.penalty = penalty
        self.coef_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        A = _with_intercept(X)
        p = A.shape[1]
        gram = A.T @ A
        if self.penalty == 0.0:
            if np.linalg.matrix_rank(gram) < p:
                raise SingularDesign("rank-deficient design with zero ridge penalty")
        reg = np.zeros(p)
        reg[1:] = self.penalty
        self.coef_ = np.linalg.solve(gram + np.diag(reg), A.T @ y)
        return self

    def predict(self, X):
        return _with_intercept(np.asarray(X, dtype=float)) @ self.coef_


class ElasticNetRegressor:
    """Linear regression with elastic-net penalty, fitted by cyclic
    coordinate descent on the glmnet-scaled objective

        (1/2m) ||y - b0 - X b||^2 + penalty * (mix |b|_1 + (1-mix)/2 |b|_2^2)
    """

    def __init__(self, penalty=1e-3, mix=0.5, max_iter=1000, tol=1e-10):
        self.penalty = penalty
        self.mix = mix
        self.max_iter = max_iter
        self.tol = tol
        self.coef_ = None
        self.intercept_ = None
        self.loss_path_ = None

    def _loss(self, X, y, b0, b):
        m = X.shape[0]
        r = y - b0 - X @ b
        pen = self.penalty * (self.mix * np.abs(b).sum() + 0.5 * (1 - self.mix) * b @ b)
        return 0.5 * (r @ r) / m + pen

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        m, d = X.shape
        b = np.zeros(d)
        b0 = y.mean()
        col_sq = (X * X).sum(axis=0) / m
        lam1 = self.penalty * self.mix
        lam2 = self.penalty * (1 - self.mix)
        r = y - b0 - X @ b
        losses = [self._loss(X, y, b0, b)]
        for _ in range(self.max_iter):
            delta = 0.0
            for j in range(d):
                old = b[j]
                rho = (X[:, j] @ r) / m + col_sq[j] * old
                new = np.sign(rho) * max(abs(rho) - lam1, 0.0) / (col_sq[j] + lam2) if col_sq[j] > 0 else 0.0
                if new != old:
                    r += X[:, j] * (old - new)
                    b[j] = new
                    delta = max(delta, abs(new - old))
            old0 = b0
            b0 = b0 + r.mean()
            r -= b0 - old0
            delta = max(delta, abs(b0 - old0))
            losses.append(self._loss(X, y, b0, b))
            if delta <= self.tol:
                break
        self.coef_ = b
        self.intercept_ = b0
        self.loss_path_ = np.array(losses)
        return self

    def predict(self, X):
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_


def _poly_powers(d, degree):
    """Multi-indices of total degree 1..degree over d variables."""
    powers = []
    for deg in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), deg):
            pw = [0] * d
            for j in combo:
                pw[j] += 1
            powers.append(tuple(pw))
    return powers


class PolynomialSieveRegressor:
    """Polynomial features up to a total degree, fed to ridge.

    The degree is reduced until the feature count stays below n/10
    (never below degree 1), keeping the sieve honest at desk scale.
    """

    def __init__(self, degree=3, penalty=1e-6):
        self.degree = degree
        self.penalty = penalty
        self.powers_ = None
        self._ridge = None

    def _features(self, X):
        cols = [np.prod(X ** np.asarray(pw), axis=1) for pw in self.powers_]
        return np.column_stack(cols)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        n, d = X.shape
        degree = self.degree
        while degree > 1 and len(_poly_powers(d, degree)) >= max(n / 10.0, d + 2):
            degree -= 1
        self.powers_ = _poly_powers(d, degree)
        self._ridge = RidgeRegressor(penalty=self.penalty).fit(self._features(X), y)
        return self

    def predict(self, X):
        return self._ridge.predict(self._features(np.asarray(X, dtype=float)))


# ---------------------------------------------------------------------------
# regression trees / ensembles
# ---------------------------------------------------------------------------


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, value=None, feature=None, threshold=None, left=None, right=None):
        self.value = value
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


def _best_split(X, y, features, min_leaf):
    """Exact CART split by variance reduction.

    Ties in gain are broken by lowest feature index, then lowest
    threshold.  Returns (feature, threshold) or None.
    """
    m = y.size
    total = y.sum()
    sse_parent = (y * y).sum() - total * total / m
    best = None  # (neg_gain is implicit: track gain, feature, threshold)
    best_gain = 1e-12  # require strictly positive reduction
    for j in sorted(features):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        # candidate split after position i (1-indexed sizes)
        sizes = np.arange(1, m)
        valid = (xs[1:] != xs[:-1]) & (sizes >= min_leaf) & (m - sizes >= min_leaf)
        if not np.any(valid):
            continue
        left_sum = csum[:-1]
        left_sq = csq[:-1]
        sse_left = left_sq - left_sum * left_sum / sizes
        right_sum = total - left_sum
        right_sq = (y * y).sum() - left_sq
        sse_right = right_sq - right_sum * right_sum / (m - sizes)
        gain = sse_parent - sse_left - sse_right
        gain[~valid] = -np.inf
        i = int(np.argmax(gain))
        g = gain[i]
        if g > best_gain:
            best_gain = g
            best = (j, 0.5 * (xs[i] + xs[i + 1]))
        elif best is not None and g == best_gain:
            thr = 0.5 * (xs[i] + xs[i + 1])
            if (j, thr) < best:
                best = (j, thr)
    return best


def _grow_tree(X, y, depth, max_depth, min_leaf, n_feats, rng):
    if depth >= max_depth or y.size < 2 * min_leaf or np.ptp(y) == 0.0:
        return _TreeNode(value=y.mean())
    d = X.shape[1]
    feats = rng.choice(d, size=min(n_feats, d), replace=False) if n_feats < d else np.arange(d)
    split = _best_split(X, y, feats, min_leaf)
    if split is None:
        return _TreeNode(value=y.mean())
    j, thr = split
    mask = X[:, j] <= thr
    left = _grow_tree(X[mask], y[mask], depth + 1, max_depth, min_leaf, n_feats, rng)
    right = _grow_tree(X[~mask], y[~mask], depth + 1, max_depth, min_leaf, n_feats, rng)
    return _TreeNode(feature=j, threshold=thr, left=left, right=right, value=y.mean())


def _tree_predict(node, X):
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if nd.feature is None:
            out[idx] = nd.value
            continue
        mask = X[idx, nd.feature] <= nd.threshold
        stack.append((nd.left, idx[mask]))
        stack.append((nd.right, idx[~mask]))
    return out


class TreeEnsembleRegressor:
    """Bagged depth-limited CART regression trees.

    Bootstrap row sampling plus per-split feature subsampling of
    ceil(d/3); per-tree RNG streams derive from (seed, tree index) so
    parallel and serial fits agree bit for bit.
    """

    def __init__(self, n_trees=50, max_depth=5, min_leaf=5, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.trees_ = None
        self.y_range_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        m, d = X.shape
        n_feats = max(1, math.ceil(d / 3))
        self.trees_ = []
        for t in range(self.n_trees):
            rng = np.random.default_rng(np.random.SeedSequence(seed_tuple(self.seed, t)))
            rows = rng.integers(0, m, size=m)
            self.trees_.append(
                _grow_tree(X[rows], y[rows], 0, self.max_depth, self.min_leaf, n_feats, rng)
            )
        self.y_range_ = (float(y.min()), float(y.max()))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        acc = np.zeros(X.shape[0])
        for tree in self.trees_:
            acc += _tree_predict(tree, X)
        return acc / len(self.trees_)


class TreeEnsembleClassifier:
    """Bagged trees on 0/1 labels; leaf means are class probabilities."""

    def __init__(self, n_trees=50, max_depth=5, min_leaf=5, seed=0, clip_c=0.01):
        self._reg = TreeEnsembleRegressor(n_trees, max_depth, min_leaf, seed)
        self.clip_c = clip_c

    def fit(self, X, z):
        self._reg.fit(X, np.asarray(z, dtype=float))
        return self

    def predict_prob(self, X):
        return np.clip(self._reg.predict(X), self.clip_c, 1.0 - self.clip_c)


# ---------------------------------------------------------------------------
# propensity models
# ---------------------------------------------------------------------------


def _sigmoid(t):
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def penalized_logloss(beta, X, z, penalty, mix):
    """Mean log-loss plus elastic-net penalty (intercept unpenalized)."""
    A = _with_intercept(X)
    t = A @ beta
    # log(1 + exp(-s*t)) with s in {-1, +1}
    s = 2.0 * np.asarray(z, dtype=float) - 1.0
    u = -s * t
    ll = np.logaddexp(0.0, u).mean()
    b = beta[1:]
    return ll + penalty * (mix * np.abs(b).sum() + 0.5 * (1 - mix) * b @ b)


def penalized_logloss_grad(beta, X, z, penalty, mix):
    """Gradient of :func:`penalized_logloss`; uses sign(b) for the L1 part."""
    A = _with_intercept(X)
    p = _sigmoid(A @ beta)
    g = A.T @ (p - np.asarray(z, dtype=float)) / X.shape[0]
    b = beta[1:]
    g[1:] += penalty * (mix * np.sign(b) + (1 - mix) * b)
    return g


class ElasticNetLogistic:
    """Logistic regression with elastic-net penalty via proximal gradient.

    Probabilities are raw penalized-MLE outputs clipped to
    [clip_c, 1 - clip_c]; no recalibration step is applied.
    """

    def __init__(self, penalty=1e-3, mix=0.5, clip_c=0.01, max_iter=5000, tol=1e-9):
        self.penalty = penalty
        self.mix = mix
        self.clip_c = clip_c
        self.max_iter = max_iter
        self.tol = tol
        self.coef_ = None

    def fit(self, X, z):
        X = np.asarray(X, dtype=float)
        z = np.asarray(z, dtype=float)
        if np.all(z == z[0]):
            raise SingleArmInput("propensity fitting needs both arms")
        m, d = X.shape
        A = _with_intercept(X)
        lam1 = self.penalty * self.mix
        lam2 = self.penalty * (1 - self.mix)
        # Lipschitz constant of the smooth part
        L = (np.linalg.norm(A, 2) ** 2) / (4.0 * m) + lam2
        beta = np.zeros(d + 1)
        vel = beta.copy()
        t_k = 1.0
        for it in range(self.max_iter):
            p = _sigmoid(A @ vel)
            grad = A.T @ (p - z) / m
            grad[1:] += lam2 * vel[1:]
            step = vel - grad / L
            new = step.copy()
            new[1:] = np.sign(step[1:]) * np.maximum(np.abs(step[1:]) - lam1 / L, 0.0)
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_k * t_k))
            vel = new + ((t_k - 1.0) / t_next) * (new - beta)
            moved = np.max(np.abs(new - beta))
            beta, t_k = new, t_next
            if moved <= self.tol * max(1.0, np.max(np.abs(beta))):
                break
        else:
            raise NonConvergence(
                f"logistic solver did not converge in {self.max_iter} iterations"
            )
        self.coef_ = beta
        return self

    def predict_prob(self, X):
        p = _sigmoid(_with_intercept(np.asarray(X, dtype=float)) @ self.coef_)
        return np.clip(p, self.clip_c, 1.0 - self.clip_c)


class KnownPropensity:
    """Known propensity score: a constant (RCT case) or a function of X."""

    def __init__(self, value, clip_c=0.01):
        self.value = value
        self.clip_c = clip_c

    def fit(self, X, z):
        return self

    def predict_prob(self, X):
        X = np.asarray(X, dtype=float)
        if callable(self.value):
            p = np.asarray(self.value(X), dtype=float)
        else:
            p = np.full(X.shape[0], float(self.value))
        return np.clip(p, self.clip_c, 1.0 - self.clip_c)


class OracleRegressor:
    """Pass-through outcome model evaluating a known function of X."""

    def __init__(self, fn):
        self.fn = fn

    def fit(self, X, y):
        return self

    def predict(self, X):
        return np.asarray(self.fn(np.asarray(X, dtype=float)), dtype=float)


class OraclePropensity(KnownPropensity):
    pass


# ---------------------------------------------------------------------------
# corruption wrapper
# ---------------------------------------------------------------------------


class _CorruptedModel:
    """Adds amplitude * n^{-gamma} * cos(w.x + b) to a base predictor.

    The injected error has sup-norm exactly ``amplitude * n**-gamma``;
    frequency w and phase b are drawn once from the given seed (lazily,
    when the covariate dimension is first seen).
    """

    def __init__(self, base, rate_exponent, amplitude, n, seed, clip_c=None):
        self.base = base
        self.sup_error = amplitude * float(n) ** (-rate_exponent)
        self.seed = seed
        self.clip_c = clip_c if clip_c is not None else getattr(base, "clip_c", 0.01)
        self._w = None
        self._b = None

    def _perturbation(self, X):
        if self._w is None:
            rng = np.random.default_rng(np.random.SeedSequence(seed_tuple(self.seed)))
            d = X.shape[1]
            self._w = rng.uniform(0.5, 1.5, size=d) * rng.choice([-1.0, 1.0], size=d)
            self._b = rng.uniform(0.0, 2.0 * np.pi)
        return self.sup_error * np.cos(X @ self._w + self._b)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        return self.base.predict(X) + self._perturbation(X)

    def predict_prob(self, X):
        X = np.asarray(X, dtype=float)
        p = self.base.predict_prob(X) + self._perturbation(X)
        return np.clip(p, self.clip_c, 1.0 - self.clip_c)


def corrupt_oracle(oracle, rate_exponent, amplitude, n, seed, clip_c=None):
    """Wrap an oracle nuisance with a vanishing smooth perturbation."""
    return _CorruptedModel(oracle, rate_exponent, amplitude, n, seed, clip_c)


# ---------------------------------------------------------------------------
# fitting entry points
# ---------------------------------------------------------------------------


def _cv_splits(m, folds, seed):
    idx = np.random.default_rng(np.random.SeedSequence(seed)).permutation(m)
    return np.array_split(idx, folds)


def _cv_mse(make_model, X, y, folds, seed):
    splits = _cv_splits(X.shape[0], folds, seed)
    errs = []
    for i, val in enumerate(splits):
        train = np.concatenate([s for j, s in enumerate(splits) if j != i])
        model = make_model().fit(X[train], y[train])
        r = y[val] - model.predict(X[val])
        errs.append((r @ r) / val.size)
    return float(np.mean(errs))


def fit_outcome_model(config, covariates, outcomes, arm_mask, arm=None, seed=None):
    """Fit the configured outcome regressor on one treatment arm.

    ``arm`` selects which oracle function to use in oracle mode
    (0 -> mu0, 1 -> mu1).  ``seed`` overrides config.seed, letting
    per-fold fits draw independent deterministic streams.
    """
    seed = config.seed if seed is None else seed
    X = np.asarray(covariates, dtype=float)[arm_mask]
    y = np.asarray(outcomes, dtype=float)[arm_mask]

    kind = config.outcome_model
    if kind == "oracle":
        fn = config.oracle_mu1 if arm == 1 else config.oracle_mu0
        if fn is None:
            raise ValueError("oracle outcome model requires oracle_mu0/oracle_mu1")
        model = OracleRegressor(fn)
        if config.corrupt_gamma is not None:
            model = corrupt_oracle(
                model, config.corrupt_gamma, config.corrupt_amplitude,
                np.asarray(covariates).shape[0],
                seed=seed_tuple(config.corrupt_seed, 100 + (arm or 0)),
            )
        return model

    if X.shape[0] < 2:
        raise InsufficientArmSamples(f"arm has only {X.shape[0]} rows")

    if kind == "ridge":
        if config.ridge_penalty is None:
            mses = [
                _cv_mse(lambda lam=lam: RidgeRegressor(lam), X, y, config.cv_folds, seed)
                for lam in config.ridge_grid
            ]
            lam = config.ridge_grid[int(np.argmin(mses))]
        else:
            lam = config.ridge_penalty
        return RidgeRegressor(penalty=lam).fit(X, y)
    if kind == "elastic_net":
        return ElasticNetRegressor(penalty=config.enet_penalty, mix=config.enet_mix).fit(X, y)
    if kind == "sieve":
        return PolynomialSieveRegressor(degree=config.sieve_degree).fit(X, y)
    if kind == "forest":
        if config.forest_tune:
            grid = [
                (depth, trees)
                for depth in config.forest_grid_depth
                for trees in config.forest_grid_trees
            ]
            mses = [
                _cv_mse(
                    lambda depth=depth, trees=trees: TreeEnsembleRegressor(
                        n_trees=trees, max_depth=depth,
                        min_leaf=config.forest_min_leaf, seed=seed,
                    ),
                    X, y, config.cv_folds, seed,
                )
                for depth, trees in grid
            ]
            depth, trees = grid[int(np.argmin(mses))]
        else:
            depth, trees = config.forest_depth, config.forest_trees
        return TreeEnsembleRegressor(
            n_trees=trees, max_depth=depth, min_leaf=config.forest_min_leaf, seed=seed
        ).fit(X, y)
    raise ValueError(f"unknown outcome model {kind!r}")


def fit_propensity_model(config, covariates, treatments, seed=None):
    """Fit the configured propensity model; probabilities are clipped."""
    seed = config.seed if seed is None else seed
    X = np.asarray(covariates, dtype=float)
    z = np.asarray(treatments, dtype=float)

    kind = config.propensity_model
    if kind == "known":
        return KnownPropensity(config.known_propensity, clip_c=config.clip_c)
    if kind == "oracle":
        if config.oracle_propensity is None:
            raise ValueError("oracle propensity requires oracle_propensity")
        model = OraclePropensity(config.oracle_propensity, clip_c=config.clip_c)
        if config.corrupt_gamma is not None:
            model = corrupt_oracle(
                model, config.corrupt_gamma, config.corrupt_amplitude, X.shape[0],
                seed=seed_tuple(config.corrupt_seed, 200), clip_c=config.clip_c,
            )
        return model
    if np.all(z == z[0]):
        raise SingleArmInput("propensity fitting needs both arms")
    if kind == "logistic":
        return ElasticNetLogistic(
            penalty=config.logistic_penalty, mix=config.logistic_mix,
            clip_c=config.clip_c, max_iter=config.logistic_max_iter,
            tol=config.logistic_tol,
        ).fit(X, z)
    if kind == "forest":
        return TreeEnsembleClassifier(
            n_trees=config.forest_trees, max_depth=config.forest_depth,
            min_leaf=config.forest_min_leaf, seed=seed, clip_c=config.clip_c,
        ).fit(X, z)
    raise ValueError(f"unknown propensity model {kind!r}")
