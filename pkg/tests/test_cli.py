import json

import numpy as np
import pytest

from wte.cli import main
from wte.data_model import save_dataset
from wte.estimators import estimate_wte
from wte.nuisance import NuisanceConfig
from wte.simulate import GaussianCateDgp, generate


@pytest.fixture()
def dataset_csv(tmp_path):
    data = generate(GaussianCateDgp(), 400, seed=100)
    path = tmp_path / "data.csv"
    save_dataset(data, path)
    return path, data


class TestEstimateCommand:
    def test_report_round_trip(self, dataset_csv, tmp_path):
        path, data = dataset_csv
        out = tmp_path / "report.json"
        code = main([
            "estimate", "--data", str(path), "--outcome", "y", "--treatment", "z",
            "--alphas", "0.5,1.0", "--propensity", "known:0.5",
            "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["schema_version"] == 1
        assert [r["alpha"] for r in payload["results"]] == [0.5, 1.0]

        # the alpha=1 row must agree with the library call byte for byte
        cfg = NuisanceConfig(outcome_model="ridge", propensity_model="known",
                             known_propensity=0.5, clip_c=0.01, seed=7)
        est = estimate_wte(data, 1.0, 3, cfg, seed=7)
        assert payload["results"][1]["point"] == est.point
        assert payload["results"][1]["variance"] == est.variance

    def test_reruns_byte_identical(self, dataset_csv, tmp_path):
        path, _ = dataset_csv
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert main([
                "estimate", "--data", str(path), "--outcome", "y",
                "--treatment", "z", "--alphas", "0.4,0.8",
                "--propensity", "known:0.5", "--seed", "3", "--out", str(out),
            ]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_csv_output(self, dataset_csv, tmp_path):
        path, _ = dataset_csv
        csv_out = tmp_path / "r.csv"
        assert main([
            "estimate", "--data", str(path), "--outcome", "y", "--treatment", "z",
            "--alphas", "0.5", "--propensity", "known:0.5",
            "--seed", "1", "--csv", str(csv_out),
        ]) == 0
        lines = csv_out.read_text().strip().splitlines()
        assert lines[0] == "alpha,method,point,variance,ci_lower,ci_upper"
        assert len(lines) == 2
        fields = lines[1].split(",")
        assert float(fields[2]) == float(fields[2])  # parses as a number

    def test_methods_run(self, dataset_csv, tmp_path):
        path, _ = dataset_csv
        for method in ("dm", "ipw"):
            out = tmp_path / f"{method}.json"
            assert main([
                "estimate", "--data", str(path), "--outcome", "y",
                "--treatment", "z", "--alphas", "0.5", "--method", method,
                "--propensity", "known:0.5", "--seed", "2", "--out", str(out),
            ]) == 0
            payload = json.loads(out.read_text())
            assert payload["results"][0]["naive_variance"] is True


class TestExitCodes:
    def test_bad_alpha_is_config_error(self, dataset_csv):
        path, _ = dataset_csv
        assert main([
            "estimate", "--data", str(path), "--outcome", "y", "--treatment", "z",
            "--alphas", "0.5,1.5", "--seed", "1",
        ]) == 2

    def test_nonincreasing_alphas(self, dataset_csv):
        path, _ = dataset_csv
        assert main([
            "estimate", "--data", str(path), "--outcome", "y", "--treatment", "z",
            "--alphas", "0.8,0.5", "--seed", "1",
        ]) == 2

    def test_missing_file_is_data_error(self, tmp_path):
        assert main([
            "estimate", "--data", str(tmp_path / "absent.csv"),
            "--outcome", "y", "--treatment", "z", "--seed", "1",
        ]) == 3

    def test_bad_column_is_data_error(self, dataset_csv):
        path, _ = dataset_csv
        assert main([
            "estimate", "--data", str(path), "--outcome", "wrong",
            "--treatment", "z", "--seed", "1",
        ]) == 3

    def test_zero_reps_is_config_error(self):
        assert main(["simulate", "coverage", "--reps", "0", "--seed", "1"]) == 2

    def test_bad_epsilon_is_config_error(self):
        assert main(["power", "--sigma2", "1.0", "--epsilon", "0"]) == 2

    def test_single_arm_is_data_error(self, tmp_path):
        # every row treated: nuisance fitting is impossible
        path = tmp_path / "one_arm.csv"
        path.write_text("x1,y,z\n" + "".join(f"{i},{i},1\n" for i in range(20)))
        assert main([
            "estimate", "--data", str(path), "--outcome", "y", "--treatment", "z",
            "--alphas", "0.5", "--seed", "1",
        ]) == 3

    def test_estimation_failure_code(self, dataset_csv):
        # more folds than rows cannot be satisfied
        path, _ = dataset_csv
        assert main([
            "estimate", "--data", str(path), "--outcome", "y", "--treatment", "z",
            "--alphas", "0.5", "--k", "9999", "--seed", "1",
        ]) == 4


class TestPowerCommand:
    def test_prints_table(self, capsys):
        assert main(["power", "--sigma2", "1.0", "--epsilon", "0.1"]) == 0
        out = capsys.readouterr().out
        assert "multiplier 6.1826" in out
        assert "n 619" in out
        assert "achieved_power 0.80" in out


class TestSimulateCommand:
    def test_coverage_json(self, tmp_path):
        out = tmp_path / "cov.json"
        assert main([
            "simulate", "coverage", "--n", "300", "--reps", "10",
            "--seed", "5", "--threads", "1", "--out", str(out),
        ]) == 0
        payload = json.loads(out.read_text())
        assert payload["kind"] == "coverage"
        assert len(payload["per_rep"]) == 10
        assert 0.0 <= payload["empirical_coverage"] <= 1.0

    def test_orthogonality_csv(self, tmp_path):
        csv_out = tmp_path / "orth.csv"
        assert main([
            "simulate", "orthogonality", "--ns", "200,400", "--reps", "4",
            "--seed", "6", "--threads", "1", "--csv", str(csv_out),
        ]) == 0
        lines = csv_out.read_text().strip().splitlines()
        assert lines[0] == "estimator,n,sqrt_n_bias,abs_sqrt_n_bias,se"
        assert len(lines) == 1 + 2 * 3  # two sample sizes x three estimators


class TestPipelineAccuracy:
    def test_fitted_nuisances_recover_truth(self, tmp_path):
        # end-to-end: generated CSV, ridge outcome models, known propensity
        dgp = GaussianCateDgp()
        data = generate(dgp, 50_000, seed=200)
        path = tmp_path / "big.csv"
        save_dataset(data, path)
        out = tmp_path / "big.json"
        assert main([
            "estimate", "--data", str(path), "--outcome", "y", "--treatment", "z",
            "--alphas", "0.9", "--propensity", "known:0.5",
            "--seed", "9", "--out", str(out),
        ]) == 0
        point = json.loads(out.read_text())["results"][0]["point"]
        assert point == pytest.approx(dgp.true_wte(0.9), abs=0.05)
