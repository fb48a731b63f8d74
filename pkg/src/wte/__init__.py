"""Worst-case subpopulation treatment effect estimation.

A library for estimating the treatment effect on the worst-off
covariate subpopulation of mass at least alpha, via a cross-fitted
augmented estimator with asymptotically exact confidence intervals,
plus direct-method and IPW baselines, power calculations, and a Monte
Carlo validation harness.
"""

from .cvar import (
    CvarResult,
    closed_form_normal_wte,
    cvar_dual_objective,
    empirical_cvar,
    empirical_quantile,
)
from .crossfit import (
    FoldAssignment,
    NuisanceFit,
    estimate_wte,
    fit_fold_nuisances,
    fold_estimate,
    kappa,
    make_folds,
)
from .data_model import (
    EffectDirection,
    ObservationSet,
    UnlabeledCovariates,
    load_dataset,
    save_dataset,
    validate,
)
from .estimators import (
    confidence_interval,
    dm_estimate,
    influence_values,
    ipw_estimate,
)
from .nuisance import NuisanceConfig, corrupt_oracle, fit_outcome_model, fit_propensity_model
from .power import PowerSpec, achieved_power, min_sample_size, power_multiplier
from .results import ConfidenceInterval, FoldEstimate, WteEstimate
from .simulate import (
    GaussianCateDgp,
    OrthogonalityReport,
    SimulationReport,
    generate,
    run_coverage_experiment,
    run_orthogonality_experiment,
    true_sigma2_alpha,
)

__version__ = "0.1.0"
