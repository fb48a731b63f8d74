"""End-to-end acceptance gate.

Each test exercises one release criterion and prints a single
``PASS``/``FAIL`` line so the suite doubles as a checklist.  The slower
Monte Carlo criteria share one session-scoped experiment run.
"""

import math
import time

import numpy as np
import pytest

from wte.crossfit import estimate_wte, fold_fits
from wte.cvar import closed_form_normal_wte, cvar_dual_objective, empirical_cvar
from wte.nuisance import NuisanceConfig
from wte.power import PowerSpec, power_multiplier
from wte.simulate import (
    GaussianCateDgp,
    generate,
    run_coverage_experiment,
    run_orthogonality_experiment,
    true_sigma2_alpha,
)


def report(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def brute_force_cvar(values, alpha):
    """Dual objective minimized over a grid guaranteed to contain the
    minimizer: the data points themselves plus midpoints."""
    v = np.sort(np.asarray(values, dtype=float))
    grid = np.concatenate([v, (v[:-1] + v[1:]) / 2.0, [v[0] - 1.0, v[-1] + 1.0]])
    return min(cvar_dual_objective(values, alpha, eta) for eta in grid)


def test_criterion_1_closed_form_examples():
    t0 = time.perf_counter()
    a = closed_form_normal_wte(-0.1, 1.0, 0.9)
    b = closed_form_normal_wte(-0.1, 1.0, 0.5)
    elapsed = time.perf_counter() - t0
    ok = abs(a - 0.095) < 5e-4 and abs(b - 0.698) < 5e-4 and elapsed < 1e-3
    report("criterion 1: closed-form normal tail values", ok,
           f"wte(.9)={a:.5f}, wte(.5)={b:.5f}, {elapsed * 1e6:.0f}us")


def test_criterion_2_cvar_oracle_equivalence():
    rng = np.random.default_rng(2024)
    alphas = (0.1, 0.25, 0.5, 0.75, 0.9, 1.0)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 13))
        values = rng.normal(scale=rng.uniform(0.5, 5.0), size=m)
        for alpha in alphas:
            got = empirical_cvar(values, alpha).value
            want = brute_force_cvar(values, alpha)
            worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 5.0
    report("criterion 2: tail-average vs brute-force dual", ok,
           f"max |diff|={worst:.2e}, {elapsed:.2f}s")


def test_criterion_3_ate_reduction():
    rng = np.random.default_rng(77)
    dgp = GaussianCateDgp()
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(60, 501))
        data = generate(dgp, n, seed=(300, i))
        cfg = NuisanceConfig(outcome_model="ridge", propensity_model="logistic",
                             seed=i)
        est = estimate_wte(data, 1.0, 3, cfg, seed=(301, i))
        folds, fits = fold_fits(data, 1.0, 3, cfg, seed=(301, i))
        parts = []
        for k in range(3):
            idx = folds.indices(k)
            X = data.covariates[idx]
            y = data.outcomes[idx]
            z = data.treatments[idx].astype(float)
            m0, m1 = fits[k].mu0.predict(X), fits[k].mu1.predict(X)
            e = fits[k].e.predict_prob(X)
            parts.append(np.mean(m1 - m0 + z * (y - m1) / e
                                 - (1 - z) * (y - m0) / (1 - e)))
        worst = max(worst, abs(est.point - float(np.mean(parts))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 60.0
    report("criterion 3: alpha=1 equals cross-fitted AIPW", ok,
           f"max |diff|={worst:.2e}, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def coverage_runs():
    dgp = GaussianCateDgp()
    t0 = time.perf_counter()
    runs = {
        alpha: run_coverage_experiment(dgp, n=2000, alpha=alpha, reps=500,
                                       seed=400, threads=4)
        for alpha in (0.5, 0.8)
    }
    return dgp, runs, time.perf_counter() - t0


def test_criterion_4_clt_coverage(coverage_runs):
    _, runs, elapsed = coverage_runs
    covs = {a: r.empirical_coverage for a, r in runs.items()}
    ok = all(0.92 <= c <= 0.98 for c in covs.values()) and elapsed < 300.0
    report("criterion 4: 95% CI empirical coverage", ok,
           f"alpha .5 -> {covs[0.5]:.3f}, alpha .8 -> {covs[0.8]:.3f}, "
           f"{elapsed:.0f}s")


def test_criterion_5_variance_consistency(coverage_runs):
    dgp, runs, _ = coverage_runs
    details = []
    ok = True
    for alpha, rep in runs.items():
        truth = true_sigma2_alpha(dgp, alpha)
        ratio = rep.variance_ratio
        rel = abs(rep.mean_sigma2_hat - truth) / truth
        ok = ok and 0.8 <= ratio <= 1.2 and rel <= 0.10
        details.append(f"alpha {alpha}: ratio={ratio:.3f}, sigma2 rel err={rel:.3f}")
    report("criterion 5: Monte Carlo variance matches sigma2_alpha", ok,
           "; ".join(details))


def test_criterion_6_orthogonality():
    dgp = GaussianCateDgp()
    t0 = time.perf_counter()
    rep = run_orthogonality_experiment(
        dgp, ns=(1000, 4000, 16000), gamma=0.25, reps=200,
        seed=500, amplitude=1.0, threads=4,
    )
    elapsed = time.perf_counter() - t0
    lo, hi = rep.slope_ci("augmented")
    dm_grows = rep.dm_strictly_increasing()
    ok = dm_grows and lo <= 0.0 <= hi and elapsed < 900.0
    dm_vals = [f"{r['abs_sqrt_n_bias']:.2f}" for r in rep.series("dm")]
    report("criterion 6: augmentation removes first-order nuisance bias", ok,
           f"dm sqrt(n)-bias {dm_vals}, augmented slope CI "
           f"[{lo:.3f}, {hi:.3f}], {elapsed:.0f}s")


def test_criterion_7_power_multiplier():
    mult = power_multiplier(PowerSpec(sigma2=1.0, epsilon=1.0))
    ok = abs(mult - 6.183) <= 1e-3
    report("criterion 7: sample-size multiplier", ok, f"{mult:.4f}")


def test_criterion_8_property_suite():
    rng = np.random.default_rng(888)
    checks = []

    # CVaR coherence: translation, positive homogeneity, monotone in
    # alpha, dominates the mean
    for _ in range(200):
        v = rng.normal(size=int(rng.integers(2, 30)))
        a = float(rng.uniform(0.05, 1.0))
        c, s = float(rng.normal()), float(rng.uniform(0.1, 3.0))
        base = empirical_cvar(v, a).value
        checks.append(abs(empirical_cvar(v + c, a).value - (base + c)) < 1e-9)
        checks.append(abs(empirical_cvar(s * v, a).value - s * base) < 1e-9)
        checks.append(base >= v.mean() - 1e-12)
        a2 = float(rng.uniform(a, 1.0))
        checks.append(empirical_cvar(v, a2).value <= base + 1e-12)

    # quantile definition of the dual minimizer
    for _ in range(100):
        v = rng.normal(size=int(rng.integers(2, 30)))
        a = float(rng.uniform(0.05, 0.99))
        res = empirical_cvar(v, a)
        frac_below = np.mean(v < res.eta_star - 1e-12)
        frac_at_or_below = np.mean(v <= res.eta_star + 1e-12)
        checks.append(frac_below < 1.0 - a + 1e-12)
        checks.append(frac_at_or_below >= 1.0 - a - 1e-12)

    # propensity clipping contract
    from wte.nuisance import ElasticNetLogistic
    X = rng.normal(size=(200, 2)) * 5
    z = (X[:, 0] > 0).astype(float)
    p = ElasticNetLogistic(penalty=0.1, clip_c=0.05).fit(X, z).predict_prob(X * 10)
    checks.append(bool(p.min() >= 0.05 and p.max() <= 0.95))

    # determinism under parallelism
    dgp = GaussianCateDgp()
    r1 = run_coverage_experiment(dgp, n=300, alpha=0.5, reps=6, seed=42, threads=1)
    r4 = run_coverage_experiment(dgp, n=300, alpha=0.5, reps=6, seed=42, threads=4)
    checks.append(r1.per_rep == r4.per_rep)

    # DM alpha-monotonicity
    from wte.estimators import dm_estimate
    data = generate(dgp, 600, seed=43)
    cfg = dgp.oracle_config()
    checks.append(dm_estimate(data, 0.4, 3, cfg, seed=44).point
                  >= dm_estimate(data, 0.8, 3, cfg, seed=44).point)

    # sign symmetry of the augmented estimator
    from wte.data_model import EffectDirection, ObservationSet
    adverse = estimate_wte(data, 0.6, 3, cfg, seed=45)
    flipped = ObservationSet(data.covariates, -data.outcomes, data.treatments)
    neg_cfg = NuisanceConfig(
        outcome_model="oracle", propensity_model="oracle",
        oracle_mu0=lambda X: -dgp.mu0_fn(X), oracle_mu1=lambda X: -dgp.mu1_fn(X),
        oracle_propensity=dgp.propensity,
    )
    desired = estimate_wte(flipped, 0.6, 3, neg_cfg,
                           direction=EffectDirection.DESIRED_HIGH, seed=45)
    checks.append(abs(desired.point + adverse.point) < 1e-12)

    # kappa studentized mean-zero statistical check
    from wte.crossfit import kappa, threshold_weight
    from wte.normal import norm_ppf
    hits = 0
    for r in range(100):
        d = generate(dgp, 200, seed=(46, r))
        Xr = d.covariates
        cate = dgp.cate_fn(Xr)
        q = dgp.cate_mean + dgp.cate_sd * norm_ppf(0.5)
        h = threshold_weight(cate, q, 0.5)
        kap = kappa(d.outcomes, d.treatments.astype(float),
                    dgp.mu0_fn(Xr), dgp.mu1_fn(Xr), 0.5, h)
        t = kap.mean() / (kap.std(ddof=1) / math.sqrt(kap.size))
        hits += abs(t) <= 4.0
    checks.append(hits >= 99)

    n_fail = len(checks) - sum(checks)
    report("criterion 8: invariant property suite", n_fail == 0,
           f"{sum(checks)}/{len(checks)} checks")
