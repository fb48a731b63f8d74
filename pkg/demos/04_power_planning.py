"""Planning a study around the worst-case effect.

Given the asymptotic variance sigma^2 of the estimator and a minimal
harm epsilon one wants to detect, the required sample size is
(z_{1-size} + z_{power})^2 * sigma^2 / epsilon^2 -- a 6.2x multiplier
at the conventional 5% size / 80% power.  Tail-focused levels (small
alpha) inflate sigma^2, so guarding the worst-off 10% costs far more
samples than guarding the average.
"""

from wte import (
    GaussianCateDgp,
    PowerSpec,
    achieved_power,
    min_sample_size,
    power_multiplier,
    true_sigma2_alpha,
)

spec = PowerSpec(sigma2=1.0, epsilon=0.1)
n = min_sample_size(spec)
print(f"multiplier     : {power_multiplier(spec):.4f}")
print(f"required n     : {n}")
print(f"achieved power : {achieved_power(n, spec):.4f}")

dgp = GaussianCateDgp()
print(f"\nsample size to detect epsilon=0.2 at each level "
      f"(variance from the {dgp.__class__.__name__} ground truth):")
for alpha in (1.0, 0.5, 0.25, 0.1):
    sigma2 = true_sigma2_alpha(dgp, alpha)
    need = min_sample_size(PowerSpec(sigma2=sigma2, epsilon=0.2))
    print(f"  alpha={alpha:4}: sigma^2 = {sigma2:7.2f}  ->  n = {need}")
