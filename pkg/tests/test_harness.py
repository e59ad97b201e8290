import json

import numpy as np
import pytest

from rkhslab import (
    ConfigError,
    ExperimentConfig,
    fit_loglog_slope,
    make_responses,
    replicate_rng,
    run_inconsistency_experiment,
    run_variance_experiment,
    sample_inputs,
)
from rkhslab.cli import main as cli_main


class TestSampleInputs:
    def test_deterministic(self):
        a = sample_inputs("unit_interval", 10, replicate_rng(0, 10, 0))
        b = sample_inputs("unit_interval", 10, replicate_rng(0, 10, 0))
        assert np.array_equal(a, b)

    def test_streams_differ_across_replicates(self):
        a = sample_inputs("unit_interval", 10, replicate_rng(0, 10, 0))
        b = sample_inputs("unit_interval", 10, replicate_rng(0, 10, 1))
        assert not np.array_equal(a, b)

    def test_uniform_mean(self):
        x = sample_inputs("unit_interval", 100_000, replicate_rng(1, 100_000, 0))
        assert abs(x.mean() - 0.5) <= 0.005

    def test_sphere_unit_norm(self):
        x = sample_inputs(("sphere", 2), 50, replicate_rng(2, 50, 0))
        assert x.shape == (50, 3)
        assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0)) <= 1e-12

    def test_unknown_domain(self):
        with pytest.raises(ValueError):
            sample_inputs("torus", 5, replicate_rng(0, 5, 0))


class TestMakeResponses:
    def test_tiny_noise(self):
        rng = replicate_rng(3, 4, 0)
        y = make_responses(np.zeros(4), None, 1e-12, rng)
        assert np.max(np.abs(y)) <= 1e-10

    def test_noise_variance(self):
        rng = replicate_rng(4, 100_000, 0)
        y = make_responses(np.zeros(100_000), None, 2.0, rng)
        assert y.var() == pytest.approx(4.0, rel=0.02)

    def test_signal_plus_noise(self):
        rng = replicate_rng(5, 3, 0)
        f = np.array([1.0, 2.0, 3.0])
        y = make_responses(np.zeros(3), f, 1e-12, rng)
        assert np.allclose(y, f, atol=1e-10)

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            make_responses(np.zeros(2), None, 0.0, replicate_rng(0, 2, 0))


class TestExperimentConfig:
    def test_defaults_valid(self):
        cfg = ExperimentConfig(beta=2.0, gamma=0.5)
        assert cfg.n_grid == (64, 128, 256, 512, 1024)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(beta=1.0, gamma=0.5),
            dict(beta=2.0, gamma=1.0),
            dict(beta=2.0, gamma=-0.1),
            dict(beta=2.0, gamma=0.5, sigma=0.0),
            dict(beta=2.0, gamma=0.5, n_grid=()),
            dict(beta=2.0, gamma=0.5, n_grid=(64, 64)),
            dict(beta=2.0, gamma=0.5, n_grid=(128, 64)),
            dict(beta=2.0, gamma=0.5, replicates=0),
            dict(beta=2.0, gamma=0.5, f_star="cubic"),
            dict(beta=2.0, gamma=0.5, lambda_grid=(0.0,)),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kwargs)

    def test_from_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"beta": 2.0, "gamma": 0.5, "n_grid": [8, 16, 32]}))
        cfg = ExperimentConfig.from_json(path)
        assert cfg.n_grid == (8, 16, 32)

    def test_from_json_unknown_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"beta": 2.0, "gamma": 0.5, "bogus": 1}))
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(path)

    def test_from_json_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(tmp_path / "absent.json")

    def test_from_json_invalid_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(path)


class TestFitLoglogSlope:
    def test_exact_square(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        slope, stderr = fit_loglog_slope(x, x**2)
        assert slope == pytest.approx(2.0, abs=1e-12)
        assert stderr == pytest.approx(0.0, abs=1e-10)

    def test_constant(self):
        x = np.array([1.0, 2.0, 4.0])
        slope, _ = fit_loglog_slope(x, np.full(3, 5.0))
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_noisy_power_law(self):
        rng = np.random.default_rng(0)
        x = np.geomspace(1.0, 100.0, 30)
        y = x**1.5 * (1.0 + 0.01 * rng.standard_normal(30))
        slope, _ = fit_loglog_slope(x, y)
        assert slope == pytest.approx(1.5, abs=0.1)

    def test_rejects_short_or_degenerate(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            fit_loglog_slope([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            fit_loglog_slope([1.0, 2.0, 3.0], [1.0, -1.0, 2.0])


def small_variance_config(out, seed=0):
    return ExperimentConfig(
        beta=2.0,
        gamma=0.0,
        truncation=256,
        n_grid=(16, 32, 64),
        replicates=4,
        lambda_grid=(1e-3, 1e-2, 1e-1),
        seed=seed,
        output_dir=str(out),
    )


class TestVarianceExperiment:
    def test_outputs_and_monotonicity(self, tmp_path):
        cfg = small_variance_config(tmp_path)
        summary = run_variance_experiment(cfg)
        for n in cfg.n_grid:
            lines = (tmp_path / f"curve_n{n}.csv").read_text().splitlines()
            assert lines[0] == "lambda,v_coeff,v_gram,v1,v2,envelope"
            v = np.array([float(l.split(",")[1]) for l in lines[1:]])
            assert np.all(np.diff(v) <= 1e-10)
        assert (tmp_path / "curve.csv").read_bytes() == (
            tmp_path / f"curve_n{cfg.n_grid[-1]}.csv"
        ).read_bytes()
        assert (tmp_path / "plot.py").exists()
        assert set(summary["per_n"]) == {"16", "32", "64"}

    def test_v_v1_contraction_in_n(self, tmp_path):
        cfg = small_variance_config(tmp_path)
        summary = run_variance_experiment(cfg)
        rel = [summary["per_n"][str(n)]["median_rel_v_minus_v1"] for n in cfg.n_grid]
        assert rel[-1] < rel[0]

    def test_deterministic_rerun(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_variance_experiment(small_variance_config(out1, seed=7))
        run_variance_experiment(small_variance_config(out2, seed=7))
        for name in ("curve.csv", "curve_n16.csv", "curve_n64.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_threads_match_serial(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_variance_experiment(small_variance_config(out1, seed=3), threads=1)
        run_variance_experiment(small_variance_config(out2, seed=3), threads=4)
        assert (out1 / "curve.csv").read_bytes() == (out2 / "curve.csv").read_bytes()

    def test_rejects_missing_or_large_lambda(self, tmp_path):
        import dataclasses

        cfg = small_variance_config(tmp_path)
        with pytest.raises(ConfigError):
            run_variance_experiment(dataclasses.replace(cfg, lambda_grid=()))
        with pytest.raises(ConfigError):
            run_variance_experiment(dataclasses.replace(cfg, lambda_grid=(0.6,)))


def small_inconsistency_config(out, seed=0):
    return ExperimentConfig(
        beta=2.0,
        gamma=0.5,
        truncation=256,
        n_grid=(8, 16, 32),
        replicates=4,
        seed=seed,
        output_dir=str(out),
    )


class TestInconsistencyExperiment:
    def test_outputs(self, tmp_path):
        cfg = small_inconsistency_config(tmp_path)
        result = run_inconsistency_experiment(cfg)
        assert result.success_counts == [4, 4, 4]
        assert result.fitted_slope is not None
        assert result.theoretical_exponent == pytest.approx(1.0)
        assert result.classification == "inconsistent"
        lines = (tmp_path / "errors.csv").read_text().splitlines()
        assert lines[0] == "n,replicate,gamma_error_sq"
        assert len(lines) == 1 + 3 * 4
        payload = json.loads((tmp_path / "summary.json").read_text())
        assert payload["config"]["beta"] == 2.0

    def test_deterministic_rerun(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_inconsistency_experiment(small_inconsistency_config(out1, seed=5))
        run_inconsistency_experiment(small_inconsistency_config(out2, seed=5))
        assert (out1 / "errors.csv").read_bytes() == (out2 / "errors.csv").read_bytes()

    def test_no_slope_with_short_grid(self, tmp_path):
        import dataclasses

        cfg = dataclasses.replace(small_inconsistency_config(tmp_path), n_grid=(8, 16))
        result = run_inconsistency_experiment(cfg)
        assert result.fitted_slope is None

    def test_single_mode_target(self, tmp_path):
        import dataclasses

        cfg = dataclasses.replace(
            small_inconsistency_config(tmp_path),
            f_star="single_mode",
            f_star_b1=2.0,
            n_grid=(8, 16, 32),
        )
        result = run_inconsistency_experiment(cfg)
        assert all(np.isfinite(result.mean_errors))


class TestCli:
    def write_config(self, tmp_path, extra=None):
        cfg = {
            "beta": 2.0,
            "gamma": 0.5,
            "truncation": 128,
            "n_grid": [8, 16, 32],
            "replicates": 2,
        }
        cfg.update(extra or {})
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_inconsistency_success(self, tmp_path, capsys):
        path = self.write_config(tmp_path)
        code = cli_main(
            ["inconsistency", "--config", str(path), "--out", str(tmp_path / "run")]
        )
        assert code == 0
        assert "fitted slope" in capsys.readouterr().out
        assert (tmp_path / "run" / "errors.csv").exists()

    def test_variance_success(self, tmp_path):
        path = self.write_config(tmp_path, {"lambda_grid": [1e-2, 1e-1]})
        code = cli_main(
            ["variance", "--config", str(path), "--out", str(tmp_path / "run")]
        )
        assert code == 0
        assert (tmp_path / "run" / "curve.csv").exists()

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"beta": 0.5, "gamma": 0.5}))
        assert cli_main(["inconsistency", "--config", str(path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_seed_override_changes_outputs(self, tmp_path):
        path = self.write_config(tmp_path)
        for seed, name in ((1, "r1"), (2, "r2")):
            assert (
                cli_main(
                    [
                        "inconsistency",
                        "--config",
                        str(path),
                        "--seed",
                        str(seed),
                        "--out",
                        str(tmp_path / name),
                    ]
                )
                == 0
            )
        a = (tmp_path / "r1" / "errors.csv").read_bytes()
        b = (tmp_path / "r2" / "errors.csv").read_bytes()
        assert a != b

    def test_failure_exit_code(self, tmp_path, monkeypatch):
        import rkhslab.harness as harness

        def always_fail(kernel, s):
            raise np.linalg.LinAlgError("forced")

        monkeypatch.setattr(harness, "min_norm_fit", always_fail)
        path = self.write_config(tmp_path)
        code = cli_main(
            ["inconsistency", "--config", str(path), "--out", str(tmp_path / "run")]
        )
        assert code == 3
