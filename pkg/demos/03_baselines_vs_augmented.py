"""Why the augmentation term matters.

The direct method (DM) plugs fitted effect models straight into the
tail average; the augmented estimator adds an orthogonalizing
correction built from propensity-weighted residuals.  When the fitted
models carry a slowly vanishing systematic error (rate n^{-1/4}), the
DM bias survives sqrt(n) scaling while the augmented estimator's does
not.  This is the debiasing property that licenses normal confidence
intervals with flexible nuisance estimators.
"""

from wte import GaussianCateDgp, run_orthogonality_experiment

dgp = GaussianCateDgp()
report = run_orthogonality_experiment(
    dgp, ns=(500, 2000, 8000), gamma=0.25, reps=80, seed=3, threads=4,
)

print(f"{'estimator':>10} {'n':>6} {'sqrt(n) x bias':>15} {'se':>7}")
for row in report.rows:
    print(f"{row['estimator']:>10} {row['n']:>6} "
          f"{row['sqrt_n_bias']:>+15.3f} {row['se']:>7.3f}")

lo, hi = report.slope_ci("augmented")
print(f"\nDM scaled bias strictly increasing: {report.dm_strictly_increasing()}")
print(f"augmented bias-trend slope CI: [{lo:+.3f}, {hi:+.3f}] "
       "(contains 0 -> no detectable first-order bias)")
