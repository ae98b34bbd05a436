import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hawkes_merton import config_path
from hawkes_merton.errors import ConfigError
from hawkes_merton.harness import serialize
from hawkes_merton.harness.cli import main
from hawkes_merton.harness.config import KINDS, dumps, load, loads
from hawkes_merton.harness.experiments import run_experiment
from hawkes_merton.harness.stats import ks_critical_value, ks_statistic, normal_cdf, normality_check


class TestNormalCdf:
    def test_against_mpmath(self):
        x = np.linspace(-8.0, 8.0, 2001)
        ref = np.array([float(mpmath.ncdf(v)) for v in x])
        assert np.max(np.abs(normal_cdf(x) - ref)) < 1e-7

    def test_symmetry(self):
        x = np.linspace(0, 6, 101)
        np.testing.assert_allclose(normal_cdf(x) + normal_cdf(-x), 1.0, atol=1e-15)


class TestKS:
    def test_quantile_sample(self):
        n = 1000
        sample = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
        assert ks_statistic(sample) <= 0.5 / n + 1e-6

    def test_constant_sample(self):
        assert ks_statistic(np.zeros(50)) >= 0.5

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_scipy(self, seed):
        x = np.random.default_rng(seed).normal(0.1, 1.2, size=500)
        assert ks_statistic(x) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=60), st.randoms())
    def test_permutation_invariant(self, xs, rnd):
        ys = list(xs)
        rnd.shuffle(ys)
        assert ks_statistic(xs) == ks_statistic(ys)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=60))
    def test_in_unit_interval(self, xs):
        assert 0.0 <= ks_statistic(xs) <= 1.0

    def test_critical_value(self):
        assert ks_critical_value(2000, 0.01) == pytest.approx(1.6276 / math.sqrt(2000), rel=1e-4)

    def test_normal_draws_usually_pass(self):
        crit = ks_critical_value(2000, 0.01)
        passes = [ks_statistic(np.random.default_rng(900 + i).standard_normal(2000)) < crit for i in range(100)]
        assert sum(passes) >= 95

    def test_empty(self):
        with pytest.raises(ValueError):
            ks_statistic([])


class TestNormalityCheck:
    def test_exact_normal_sample(self):
        n = 2000
        rep = normality_check(stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n))
        assert rep.passed and rep.ok

    def test_zeros(self):
        rep = normality_check(np.zeros(200))
        assert not rep.passed and not rep.ok

    def test_shifted(self):
        rep = normality_check(np.random.default_rng(0).normal(0.5, 1.0, 2000))
        assert not rep.ok

    def test_too_small(self):
        with pytest.raises(ValueError):
            normality_check(np.zeros(99))

    def test_dict(self):
        d = normality_check(np.random.default_rng(1).standard_normal(500)).to_dict()
        assert {"n", "ks", "critical_value", "level", "mean", "variance", "passed", "ok"} <= set(d)


class TestSerialize:
    def test_seventeen_digits(self):
        text = serialize.dumps({"x": 0.1, "y": 2.0, "z": float("nan"), "n": 3, "b": True})
        assert '"x": 0.10000000000000001' in text
        assert '"y": 2.0' in text and '"z": null' in text and '"n": 3' in text and '"b": true' in text

    @settings(max_examples=200, deadline=None)
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert json.loads(serialize.dumps({"v": x}))["v"] == x

    def test_numpy_values(self):
        d = json.loads(serialize.dumps({"a": np.arange(3.0), "b": np.float64(1.5), "c": np.int64(4)}))
        assert d == {"a": [0.0, 1.0, 2.0], "b": 1.5, "c": 4}


REF_TEXT = config_path("reference_two_state.cfg").read_text()


class TestConfig:
    @pytest.mark.parametrize("name", ["reference_two_state", "poisson_iid", "three_state", "finance_reference"])
    def test_round_trip(self, name):
        cfg = load(config_path(f"{name}.cfg"))
        assert loads(dumps(cfg)) == cfg

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(0.1, 10), st.floats(0, 0.9), st.integers(1, 4), st.integers(0, 2**31), st.sampled_from(KINDS[:4]),
    )
    def test_round_trip_generated(self, lam, mu, n, seed, kind):
        P = np.full((n, n), 1.0 / n)
        text = (
            f"[experiment]\nkind = {kind}\n[model]\nlambda0 = {lam!r}\nalpha = {mu!r}\nbeta = 1.0\n"
            "P =\n" + "\n".join("    " + " ".join(repr(float(v)) for v in row) for row in P)
            + f"\na = {' '.join(str(i) for i in range(n))}\n[run]\nT = 10.0\nn_paths = 3\nseed = {seed}\n"
        )
        cfg = loads(text)
        assert loads(dumps(cfg)) == cfg
        assert cfg.model.P == tuple(tuple(r) for r in P)

    @pytest.mark.parametrize(
        "edit,field",
        [
            (("kind = params", "kind = bogus"), "experiment.kind"),
            (("alpha = 0.5", "alpha = 1.5"), "model.alpha"),
            (("lambda0 = 1.0", "lambda0 = -1.0"), "model.lambda0"),
            (("lambda0 = 1.0", "lambda0 = abc"), "model.lambda0"),
            (("T = 2000.0", "T = 0"), "run.T"),
            (("p = 0.7", "q = 0.7"), "model.q"),
        ],
    )
    def test_field_level_errors(self, edit, field):
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            loads(REF_TEXT.replace(*edit))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load(tmp_path / "nope.cfg")

    def test_missing_chain_for_gchp(self):
        with pytest.raises(ConfigError, match="model.P"):
            loads("[experiment]\nkind = fclt_gchp\n[model]\nlambda0 = 1.0\n[run]\nT = 1.0\n")


class TestExperiments:
    def test_params_kind(self):
        res = run_experiment(load(config_path("reference_two_state.cfg")))
        body = res.report["result"]
        assert {"a_star", "sigma", "sigma_star", "sigma_bar"} <= set(body["diffusion_params"])
        assert body["two_state_closed_form"]["agrees_with_matrix_formula"] is True

    def test_lln_hp_kind(self):
        text = "[experiment]\nkind = lln_hp\n[model]\nlambda0 = 1.0\nalpha = 0.5\n[run]\nT = 5000.0\nn_paths = 100\n"
        body = run_experiment(loads(text)).report["result"]
        assert body["relative_error"] < 0.05

    def test_finance_kind(self):
        body = run_experiment(load(config_path("finance_reference.cfg"))).report["result"]
        assert body["argmax_pi"] == pytest.approx(body["pi_star"]) == pytest.approx(2.5)
        assert set(body) == {"pi_star", "mu_e", "sigma_bar", "r", "grid", "argmax_pi"}
        assert set(body["grid"][0]) == {"pi", "utility_mc", "utility_analytic", "stderr"}

    def test_deterministic_and_writes(self, tmp_path):
        text = REF_TEXT.replace("kind = params", "kind = fclt_gchp").replace("T = 2000.0", "T = 50.0")
        text = text.replace("n_paths = 2000", "n_paths = 120")
        cfg = loads(text)
        a, b = run_experiment(cfg, tmp_path / "a"), run_experiment(cfg, tmp_path / "b")
        a.report.pop("timestamp"), b.report.pop("timestamp")
        assert serialize.dumps(a.report) == serialize.dumps(b.report)
        for name in ("report.json", "statistics.csv", "sample_path.csv"):
            assert (tmp_path / "a" / name).exists() and (tmp_path / "b" / name).exists()
        assert (tmp_path / "a" / "sample_path.csv").read_text().splitlines()[0] == "time,state,mark,cumulative"
        assert (tmp_path / "a" / "statistics.csv").read_bytes() == (tmp_path / "b" / "statistics.csv").read_bytes()


class TestCli:
    def test_params(self, capsys):
        assert main(["params", str(config_path("reference_two_state.cfg"))]) == 0
        out = json.loads(capsys.readouterr().out)
        assert set(out["result"]["diffusion_params"]) == {
            "a_star", "sigma", "sigma_star", "sigma_bar", "drift", "mu_hat", "lambda"}

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_no_arguments(self, capsys):
        assert main([]) == 1

    def test_missing_config(self, tmp_path, capsys):
        assert main(["params", str(tmp_path / "none.cfg")]) == 1
        assert "error" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text(REF_TEXT.replace("alpha = 0.5", "alpha = 2.0"))
        assert main(["params", str(bad)]) == 1
        assert "model.alpha" in capsys.readouterr().err

    def test_model_error_is_validation(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text(REF_TEXT.replace("p = 0.7", "p = 1.0").replace("p_prime = 0.6", "p_prime = 1.0"))
        assert main(["params", str(bad)]) == 1

    def test_optimal_insurance_csv_falls_back_to_json(self, capsys):
        assert main(["optimal-insurance", str(config_path("poisson_iid.cfg")), "--format", "csv"]) == 0
        assert "pi" in json.loads(capsys.readouterr().out)["result"]

    def test_optimal_finance_csv(self, capsys):
        assert main(["optimal-finance", str(config_path("finance_reference.cfg")), "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "pi,utility_mc,utility_analytic,stderr" and len(lines) == 22

    def test_ruin_with_seed_and_out(self, tmp_path, capsys):
        cfg = tmp_path / "r.cfg"
        cfg.write_text(config_path("three_state.cfg").read_text().replace("n_paths = 2000", "n_paths = 50"))
        assert main(["ruin", str(cfg), "--seed", "3", "--out", str(tmp_path / "o")]) == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["seed"] == 3 and 0.0 <= report["result"]["ruin_probability"] <= 1.0

    def test_simulate_falls_back_to_simulation_kind(self, tmp_path, capsys):
        cfg = tmp_path / "s.cfg"
        cfg.write_text(REF_TEXT.replace("T = 2000.0", "T = 20.0").replace("n_paths = 2000", "n_paths = 100"))
        assert main(["simulate", str(cfg), "--format", "csv"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "path,statistic"
