"""Command-line front end.

Subcommands: ``estimate`` (CSV in, alpha-sweep report out), ``power``
(sample-size table), ``simulate`` (Monte Carlo experiments).  Reports
are JSON plus a long-format CSV ready for external plotting; identical
invocations produce byte-identical files (no timestamps).  Exit codes:
0 ok, 2 configuration error, 3 data error, 4 estimation error.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .data_model import EffectDirection, UnlabeledCovariates, load_dataset
from .errors import DataError, EstimationError, InvalidSpec, WteError
from .estimators import confidence_interval, dm_estimate, estimate_wte, ipw_estimate
from .nuisance import NuisanceConfig
from .power import PowerSpec, achieved_power, min_sample_size, power_multiplier
from .simulate import (
    GaussianCateDgp,
    run_coverage_experiment,
    run_orthogonality_experiment,
)

SCHEMA_VERSION = 1

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_ESTIMATION = 4


class ConfigError(Exception):
    pass


def _parse_float_list(text, name, lo=None, hi_inclusive=None, increasing=False):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}")
    if not values:
        raise ConfigError(f"{name}: empty list")
    if lo is not None and any(not (lo < v <= hi_inclusive) for v in values):
        raise ConfigError(f"{name}: values must lie in ({lo}, {hi_inclusive}]")
    if increasing and any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"{name}: values must be strictly increasing")
    return values


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("WTE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"WTE_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _nuisance_config(args, seed):
    kwargs = {
        "outcome_model": args.outcome_model,
        "clip_c": args.clip,
        "seed": seed,
    }
    prop = args.propensity
    if prop.startswith("known:"):
        try:
            kwargs["propensity_model"] = "known"
            kwargs["known_propensity"] = float(prop.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad known propensity value in {prop!r}")
        if not (0.0 < kwargs["known_propensity"] < 1.0):
            raise ConfigError("known propensity must lie in (0, 1)")
    elif prop in ("logistic", "forest"):
        kwargs["propensity_model"] = prop
    else:
        raise ConfigError(f"unknown propensity model {prop!r}")
    return NuisanceConfig(**kwargs)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_estimate(args):
    alphas = _parse_float_list(args.alphas, "--alphas", lo=0.0, hi_inclusive=1.0,
                               increasing=True)
    if args.k < 2:
        raise ConfigError("--k must be >= 2")
    if not (0.0 < args.level < 1.0):
        raise ConfigError("--level must lie in (0, 1)")
    config = _nuisance_config(args, args.seed)
    direction = (EffectDirection.DESIRED_HIGH if args.direction == "desired-high"
                 else EffectDirection.ADVERSE_HIGH)

    data = load_dataset(args.data, args.outcome, args.treatment,
                        drop_cols=tuple(args.drop_cols.split(",")) if args.drop_cols else ())
    pool = None
    if args.pool:
        # covariate-only CSV with a header row
        with open(args.pool, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 2:
            raise DataError(f"{args.pool}: pool file needs a header and data rows")
        try:
            pool = UnlabeledCovariates(np.array(rows[1:], dtype=float))
        except ValueError:
            raise DataError(f"{args.pool}: non-numeric cell in pool file")

    fns = {"augmented": estimate_wte, "dm": dm_estimate, "ipw": ipw_estimate}
    estimate_fn = fns[args.method]

    results = []
    for alpha in alphas:
        est = estimate_fn(data, alpha, args.k, config, direction=direction,
                          pool=pool, seed=args.seed)
        ci = confidence_interval(est, args.level)
        results.append({
            "alpha": alpha,
            "method": est.method,
            "point": est.point,
            "variance": est.variance,
            "naive_variance": est.naive_variance,
            "ci_lower": ci.lower,
            "ci_upper": ci.upper,
            "level": args.level,
            "n": est.n,
            "folds": [
                {
                    "omega_k": f.omega_k, "sigma2_k": f.sigma2_k,
                    "fold_size": f.fold_size, "cvar_part": f.cvar_part,
                    "kappa_mean": f.kappa_mean,
                }
                for f in est.folds
            ],
        })

    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "data": args.data, "outcome": args.outcome, "treatment": args.treatment,
            "drop_cols": args.drop_cols or "", "alphas": alphas, "k": args.k,
            "method": args.method, "direction": args.direction,
            "outcome_model": args.outcome_model, "propensity": args.propensity,
            "clip": args.clip, "seed": args.seed, "level": args.level,
        },
        "results": results,
    }
    if args.out:
        _write_json(args.out, payload)
    if args.csv:
        _write_csv(
            args.csv,
            ["alpha", "method", "point", "variance", "ci_lower", "ci_upper"],
            [[r["alpha"], r["method"], repr(r["point"]), repr(r["variance"]),
              repr(r["ci_lower"]), repr(r["ci_upper"])] for r in results],
        )
    if not args.out and not args.csv:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def cmd_power(args):
    try:
        spec = PowerSpec(sigma2=args.sigma2, epsilon=args.epsilon,
                         size=args.size, power=args.power, sided=args.sided)
    except InvalidSpec as exc:
        raise ConfigError(str(exc))
    n = min_sample_size(spec)
    print(f"multiplier {power_multiplier(spec):.4f}")
    print(f"n {n}")
    print(f"achieved_power {achieved_power(n, spec):.4f}")
    return 0


def _simulate_config(args, dgp):
    if args.nuisance == "oracle":
        return dgp.oracle_config(clip_c=args.clip)
    if args.nuisance == "ridge":
        return NuisanceConfig(outcome_model="ridge", propensity_model="known",
                              known_propensity=dgp.propensity,
                              clip_c=args.clip, seed=args.seed)
    raise ConfigError(f"unknown nuisance mode {args.nuisance!r}")


def cmd_simulate(args):
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    dgp = GaussianCateDgp(cate_mean=args.cate_mean, cate_sd=args.cate_sd,
                          noise_sd=args.noise_sd, propensity=args.propensity_value,
                          d=args.d, seed=args.seed)
    threads = _threads(args)

    if args.subkind in ("coverage", "efficiency"):
        if not (0.0 < args.alpha <= 1.0):
            raise ConfigError("--alpha must lie in (0, 1]")
        report = run_coverage_experiment(
            dgp, args.n, args.alpha, args.reps,
            config=_simulate_config(args, dgp), K=args.k,
            seed=args.seed, threads=threads,
        )
        payload = {
            "schema_version": SCHEMA_VERSION,
            "kind": args.subkind,
            "config": {
                "n": args.n, "alpha": args.alpha, "reps": args.reps,
                "k": args.k, "nuisance": args.nuisance, "seed": args.seed,
                "dgp": {"cate_mean": dgp.cate_mean, "cate_sd": dgp.cate_sd,
                        "noise_sd": dgp.noise_sd, "propensity": dgp.propensity,
                        "d": dgp.d},
            },
            "true_wte": report.true_wte,
            "true_sigma2": report.true_sigma2,
            "mean_bias": report.mean_bias,
            "empirical_coverage": report.empirical_coverage,
            "variance_ratio": report.variance_ratio,
            "mean_sigma2_hat": report.mean_sigma2_hat,
            "per_rep": list(report.per_rep),
        }
        csv_header = ["rep", "point", "sigma2", "ci_lower", "ci_upper", "covered"]
        csv_rows = [
            [i, repr(r["point"]), repr(r["sigma2"]), repr(r["ci_lower"]),
             repr(r["ci_upper"]), int(r["covered"])]
            for i, r in enumerate(report.per_rep)
        ]
    else:  # orthogonality
        ns = [int(v) for v in _parse_float_list(args.ns, "--ns")]
        report = run_orthogonality_experiment(
            dgp, ns, args.gamma, args.reps, seed=args.seed, alpha=args.alpha,
            K=args.k, threads=threads,
        )
        lo, hi = report.slope_ci("augmented")
        payload = {
            "schema_version": SCHEMA_VERSION,
            "kind": "orthogonality",
            "config": {
                "ns": ns, "gamma": args.gamma, "alpha": args.alpha,
                "reps": args.reps, "k": args.k, "seed": args.seed,
            },
            "rows": list(report.rows),
            "dm_strictly_increasing": report.dm_strictly_increasing(),
            "augmented_slope_ci": [lo, hi],
        }
        csv_header = ["estimator", "n", "sqrt_n_bias", "abs_sqrt_n_bias", "se"]
        csv_rows = [
            [r["estimator"], r["n"], repr(r["sqrt_n_bias"]),
             repr(r["abs_sqrt_n_bias"]), repr(r["se"])]
            for r in report.rows
        ]

    if args.out:
        _write_json(args.out, payload)
    if args.csv:
        _write_csv(args.csv, csv_header, csv_rows)
    if not args.out and not args.csv:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wte",
        description="Worst-case subpopulation treatment effect estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate WTE over an alpha grid from CSV")
    est.add_argument("--data", required=True)
    est.add_argument("--outcome", required=True)
    est.add_argument("--treatment", required=True)
    est.add_argument("--drop-cols", dest="drop_cols", default="")
    est.add_argument("--alphas", default="0.2,0.4,0.6,0.8,1.0")
    est.add_argument("--k", type=int, default=3)
    est.add_argument("--method", choices=("augmented", "dm", "ipw"), default="augmented")
    est.add_argument("--direction", choices=("adverse-high", "desired-high"),
                     default="adverse-high")
    est.add_argument("--outcome-model", dest="outcome_model",
                     choices=("ridge", "elastic_net", "sieve", "forest"),
                     default="ridge")
    est.add_argument("--propensity", default="logistic",
                     help="logistic | forest | known:VALUE")
    est.add_argument("--pool", default=None,
                     help="optional covariate-only CSV for quantile estimation")
    est.add_argument("--clip", type=float, default=0.01)
    est.add_argument("--level", type=float, default=0.95)
    est.add_argument("--seed", type=int, required=True)
    est.add_argument("--threads", type=int, default=None)
    est.add_argument("--out", default=None, help="JSON report path")
    est.add_argument("--csv", default=None, help="long-format CSV path")
    est.set_defaults(func=cmd_estimate)

    pw = sub.add_parser("power", help="minimum sample size for a worst-case effect")
    pw.add_argument("--sigma2", type=float, required=True)
    pw.add_argument("--epsilon", type=float, required=True)
    pw.add_argument("--size", type=float, default=0.05)
    pw.add_argument("--power", type=float, default=0.80)
    pw.add_argument("--sided", choices=("one", "two"), default="one")
    pw.set_defaults(func=cmd_power)

    sim = sub.add_parser("simulate", help="Monte Carlo validation experiments")
    sim.add_argument("subkind", choices=("coverage", "orthogonality", "efficiency"))
    sim.add_argument("--n", type=int, default=2000)
    sim.add_argument("--ns", default="1000,4000,16000")
    sim.add_argument("--alpha", type=float, default=0.5)
    sim.add_argument("--gamma", type=float, default=0.25)
    sim.add_argument("--reps", type=int, default=200)
    sim.add_argument("--k", type=int, default=3)
    sim.add_argument("--nuisance", choices=("oracle", "ridge"), default="oracle")
    sim.add_argument("--cate-mean", dest="cate_mean", type=float, default=-0.1)
    sim.add_argument("--cate-sd", dest="cate_sd", type=float, default=1.0)
    sim.add_argument("--noise-sd", dest="noise_sd", type=float, default=1.0)
    sim.add_argument("--propensity-value", dest="propensity_value", type=float,
                     default=0.5)
    sim.add_argument("--d", type=int, default=2)
    sim.add_argument("--clip", type=float, default=0.01)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--out", default=None)
    sim.add_argument("--csv", default=None)
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (EstimationError, WteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
