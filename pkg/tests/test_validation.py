import numpy as np
import pytest

from mg1bayes.service import Deterministic, Erlang, Exponential, HyperExponential, TrueArrivalPmf
from mg1bayes.simulate import SimConfig
from mg1bayes.validation import (
    ConsistencyThresholds,
    bvm_experiment,
    consistency_experiment,
    covariance_H,
    covariance_K,
    covariance_K_series,
    ks_to_standard_normal,
    oracle_a_pmf,
    oracle_a_pgf_table,
    oracle_agreement,
    pi_empirical_check,
    tau_exhaustive_experiment,
)


class TestOracle:
    def test_exponential_matches_geometric(self):
        service = Exponential(2.0)
        for k in range(21):
            expected = (2.0 / 3.0) * (1.0 / 3.0) ** k
            assert abs(oracle_a_pmf(service, 1.0, k) - expected) < 1e-10

    def test_deterministic_matches_poisson(self):
        import math

        service = Deterministic(0.5)
        for k in range(21):
            expected = math.exp(-0.5) * 0.5**k / math.factorial(k)
            assert abs(oracle_a_pmf(service, 1.0, k) - expected) < 1e-10

    def test_erlang_matches_negative_binomial(self):
        service = Erlang(2, 4.0)
        for k in range(21):
            assert abs(
                oracle_a_pmf(service, 1.0, k) - service.arrival_pmf(1.0, k)
            ) < 1e-10

    def test_hyperexponential_matches_mixture(self):
        service = HyperExponential((0.3, 0.7), (2.0, 5.0))
        for k in range(15):
            assert abs(
                oracle_a_pmf(service, 1.3, k) - service.arrival_pmf(1.3, k)
            ) < 1e-10

    def test_normalization(self):
        for service in (Exponential(2.0), Deterministic(0.5), Erlang(2, 4.0)):
            total = sum(oracle_a_pmf(service, 1.0, k) for k in range(201))
            assert total == pytest.approx(1.0, abs=1e-8)

    def test_pgf_table_holds_nearly_all_mass(self):
        table = oracle_a_pgf_table(Exponential(2.0), 1.0)
        assert table.sum() == pytest.approx(1.0, abs=1e-11)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            oracle_a_pmf(Exponential(2.0), 1.0, -1)
        with pytest.raises(ValueError):
            oracle_a_pmf(Exponential(2.0), 0.0, 1)

    def test_agreement_report_passes(self):
        report = oracle_agreement()
        assert report.passed
        assert report.metrics["max_abs_err.exp"] < 1e-10
        assert report.metrics["max_abs_err.det"] < 1e-10


class TestCovariances:
    A0 = TrueArrivalPmf(Exponential(2.0), 1.0)

    def test_h_vanishes_at_one(self):
        assert covariance_H(self.A0.pgf, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_h_symmetry(self):
        for u, v in [(0.2, 0.8), (0.5, 0.9)]:
            assert covariance_H(self.A0.pgf, u, v) == pytest.approx(
                covariance_H(self.A0.pgf, v, u)
            )

    def test_h_is_variance_on_diagonal(self):
        # H(u, u) equals the variance of u^X under the arrival law
        u = 0.6
        ks = np.arange(60)
        pmf = np.array([self.A0.pmf(int(k)) for k in ks])
        var = float(np.sum(pmf * u ** (2 * ks)) - np.sum(pmf * u**ks) ** 2)
        assert covariance_H(self.A0.pgf, u, u) == pytest.approx(var, abs=1e-10)

    def test_h_degenerate_law_collapses(self):
        # a point mass makes u^X deterministic, so every covariance vanishes
        pgf = lambda z: z**3
        for u, v in [(0.3, 0.3), (0.5, 0.9)]:
            assert covariance_H(pgf, u, v) == pytest.approx(0.0, abs=1e-12)

    def test_k_at_origin(self):
        val = covariance_K(self.A0.pgf, self.A0.pgf_prime, 1.0, 0.0, 0.0)
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_k_symmetry(self):
        for u, v in [(0.1, 0.4), (0.3, 0.2)]:
            assert covariance_K(self.A0.pgf, self.A0.pgf_prime, 1.0, u, v) == pytest.approx(
                covariance_K(self.A0.pgf, self.A0.pgf_prime, 1.0, v, u)
            )

    def test_k_against_independent_series_implementation(self):
        table = oracle_a_pgf_table(Exponential(2.0), 1.0)
        for u in (0.0, 0.2, 0.5):
            for v in (0.1, 0.4):
                exact = covariance_K(self.A0.pgf, self.A0.pgf_prime, 1.0, u, v)
                series = covariance_K_series(table, 1.0, u, v)
                assert exact == pytest.approx(series, abs=1e-6)


class TestNormalityStatistic:
    def test_small_for_gaussian_draws(self):
        rng = np.random.default_rng(0)
        assert ks_to_standard_normal(rng.normal(3.0, 2.0, 4000)) < 0.03

    def test_large_for_skewed_draws(self):
        rng = np.random.default_rng(0)
        assert ks_to_standard_normal(rng.exponential(1.0, 4000)) > 0.05


class TestConsistencyExperiment:
    CONFIG = SimConfig(lam=1.0, service=Exponential(2.0), n=2000, warmup=200, seed=42)

    def test_structure_and_baseline(self):
        report = consistency_experiment(
            self.CONFIG,
            (200, 2000),
            g_grid_max=2.0,
            thresholds=ConsistencyThresholds(final_g_sup=0.1),
        )
        assert report.name == "consistency"
        assert "lambda_err.0" in report.metrics  # prior-to-truth baseline row
        assert report.metrics["gamma_sup.0"] > report.metrics["gamma_sup.2000"]
        assert report.passed

    def test_deterministic_given_seed(self):
        one = consistency_experiment(self.CONFIG, (200, 2000), g_grid_max=2.0)
        two = consistency_experiment(self.CONFIG, (200, 2000), g_grid_max=2.0)
        assert one.metrics == two.metrics

    def test_n_list_bound(self):
        with pytest.raises(ValueError):
            consistency_experiment(self.CONFIG, (5000,))


class TestBvmExperiment:
    CONFIG = SimConfig(lam=1.0, service=Exponential(2.0), n=2000, warmup=200, seed=7)

    def test_smoke_and_determinism(self):
        one = bvm_experiment(self.CONFIG, draws=300, truncation=64)
        two = bvm_experiment(self.CONFIG, draws=300, truncation=64)
        assert one.metrics == two.metrics
        assert set(one.metrics) >= {
            "cov_rel_err",
            "rate_var",
            "rate_var_rel_err",
            "truncation_tv",
            "ks.0.2",
            "ks.0.5",
            "ks.0.8",
        }
        assert one.metrics["truncation_tv"] < 0.05


class TestPiCheck:
    def test_smoke(self):
        config = SimConfig(lam=1.0, service=Exponential(2.0), n=5000, warmup=500, seed=3)
        report = pi_empirical_check(config)
        assert report.metrics["sup_gap"] < 0.05
        assert report.passed in (True, False)

    def test_boundary_point_matches_exactly(self):
        # at z = 1 both curves are normalizations and agree exactly
        config = SimConfig(lam=1.0, service=Exponential(2.0), n=2000, warmup=200, seed=4)
        report = pi_empirical_check(config)
        assert report.extras["estimate"][-1] == pytest.approx(1.0, abs=1e-12)
        assert report.extras["empirical"][-1] == pytest.approx(1.0, abs=1e-12)


class TestTauExhaustiveExperiment:
    def test_small_sweep_passes(self):
        report = tau_exhaustive_experiment(5, 3)
        assert report.passed
        assert report.metrics["violations.s-structure"] == 0.0
        assert report.metrics["checked.terminal-state"] > 0


def test_report_lines_format():
    report = oracle_agreement()
    lines = report.lines()
    assert lines[0] == "report.name=oracles"
    assert lines[-1] == "pass=true"
    assert any(line.startswith("metric.") for line in lines)
    assert any(line.startswith("param.") for line in lines)
