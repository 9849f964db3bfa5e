"""Identity checks and the verification suite runner."""

import json
import math

import pytest

import validation
from charfn import BesselKParams, GammaModel, GammaParams, LogGammaParams, make_model
from errors import ConfigError, QuadratureError
from samplers import RngStream, SeriesConfig
from validation import (
    IDENTITIES, IdentityReport, SuiteConfig, check_bessel_series_kernel,
    check_besselk_bdcf, check_besselk_innovation_atom, check_besselk_innovation_cf,
    check_besselk_symmetric_inversion, check_cf_bdcf_roundtrip, check_gamma_bddf_atom,
    check_gamma_bddf_bessel_form, check_gamma_bddf_inversion, check_gamma_bddf_mixture,
    check_gamma_bddf_sine_integral, check_gamma_bdrv_atom, check_innovation_cf_closed,
    check_levy_bddf_erfc, check_levy_chirp_integral, check_loggamma_bddf_moments,
    check_loggamma_levy_khintchine, check_loggamma_moments, check_loggamma_product,
    check_loggamma_series_ks, check_selfdecomposition, check_series_identities,
    check_stable1_bddf_arctan, check_stable_fixed_point, check_trigamma_integral, run_all,
)

T_GRID = (0.5, 1.0, 2.0, 5.0)
A_GRID = (0.1, 1.0, 4.0)


class TestCatalog:
    def test_every_identity_is_planned(self):
        planned = {identity_id for identity_id, _, _ in validation._planned_checks(SuiteConfig())}
        assert planned == set(IDENTITIES)

    def test_labels_are_unique(self):
        labels = [label for _, label, _ in validation._planned_checks(SuiteConfig())]
        assert len(labels) == len(set(labels))

    def test_unregistered_identity(self):
        with pytest.raises(KeyError):
            validation._report("no_such_identity", 0.0, 0.0, 0.0, 1.0)


class TestAnalyticChecks:
    def test_round_trip(self, catalog_model, quad):
        assert check_cf_bdcf_roundtrip(catalog_model, T_GRID, quad).passed

    def test_stable_fixed_point(self):
        report = check_stable_fixed_point(2.0, T_GRID)
        assert report.passed
        assert report.residual == 0.0

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_special_function_identities(self, alpha, quad):
        assert check_trigamma_integral(alpha, quad).passed
        assert check_series_identities(alpha).passed
        assert check_loggamma_levy_khintchine(alpha, (0.5, 1.0, 2.0), quad).passed
        assert check_loggamma_product(alpha, 1.0).passed

    def test_trigamma_integral_large_shape(self, quad):
        report = check_trigamma_integral(50.0, quad)
        assert report.passed
        assert report.lhs == pytest.approx(1.0 / 50.0 + 1.0 / (2.0 * 50.0**2), rel=0.01)

    def test_product_modulus(self):
        report = check_loggamma_product(1.0, 1.0)
        # |Gamma(1+i)|^2 = pi / sinh(pi)
        assert abs(report.rhs) == pytest.approx(math.sqrt(math.pi / math.sinh(math.pi)), abs=1e-12)
        assert report.passed

    def test_product_needs_enough_terms(self):
        with pytest.raises(ConfigError):
            check_loggamma_product(1.0, 1.0, n_terms=100)

    @pytest.mark.parametrize("b", [0.0, 0.5, 4.0, 100.0, 400.0])
    def test_bessel_kernel(self, b):
        assert check_bessel_series_kernel(b).passed

    @pytest.mark.parametrize("alpha, lam", [(0.5, 1.0), (2.0, 3.0)])
    def test_gamma_bddf_forms(self, alpha, lam, quad):
        for check in (check_gamma_bddf_inversion, check_gamma_bddf_mixture,
                      check_gamma_bddf_bessel_form, check_gamma_bddf_sine_integral):
            report = check(alpha, lam, A_GRID, quad)
            assert report.passed, report

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_gamma_bddf_atom(self, alpha, quad):
        report = check_gamma_bddf_atom(alpha, quad)
        assert report.passed
        assert report.rhs == math.exp(-alpha)

    def test_heavy_tailed_bddfs(self, quad):
        assert check_levy_bddf_erfc(0.0, 2.0, (0.25, 1.0, 5.0), quad).passed
        assert check_stable1_bddf_arctan(1.0, (-2.0, 0.0, 3.0), quad).passed

    def test_besselk(self, quad):
        params = BesselKParams(1.0, 1.0)
        assert check_besselk_bdcf(params, T_GRID).passed
        assert check_besselk_symmetric_inversion(params, 0.5, quad).passed

    def test_innovation_cf(self, quad):
        for model in (GammaModel(GammaParams(2.0, 3.0)), make_model("LogGamma", alpha=1.0, **{"lambda": 1.0})):
            assert check_innovation_cf_closed(model, 0.3, T_GRID, quad).passed

    def test_loggamma_bddf_moments(self, quad):
        assert check_loggamma_bddf_moments(LogGammaParams(2.0, 1.0), quad).passed

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
    def test_chirp(self, a, quad):
        assert check_levy_chirp_integral(a, quad).passed


class TestMonteCarloChecks:
    def test_loggamma_moments(self):
        report = check_loggamma_moments(LogGammaParams(1.0, 1.0), 100_000, RngStream(11), SeriesConfig())
        assert report.passed
        assert report.tolerance == 1.0

    def test_loggamma_moments_needs_samples(self):
        with pytest.raises(ConfigError):
            check_loggamma_moments(LogGammaParams(1.0, 1.0), 100, RngStream(11))

    def test_series_ks(self):
        assert check_loggamma_series_ks(LogGammaParams(2.0, 1.0), 100_000, RngStream(12)).passed

    def test_selfdecomposition(self):
        model = make_model("BesselK", alpha=2.0, **{"lambda": 1.0})
        assert check_selfdecomposition(model, 0.7, 100_000, RngStream(13)).passed

    def test_atoms(self):
        assert check_gamma_bdrv_atom(1.0, 100_000, RngStream(14)).passed
        assert check_besselk_innovation_atom(BesselKParams(1.0, 1.0), 0.3, 100_000, RngStream(15)).passed

    def test_besselk_innovation_cf(self):
        report = check_besselk_innovation_cf(BesselKParams(1.0, 1.0), 0.7, (0.5, 1.0, 2.0), 100_000, RngStream(16))
        assert report.passed
        assert report.tolerance == pytest.approx(4.0 / math.sqrt(100_000))


class TestSuite:
    def fast(self, **overrides):
        return SuiteConfig.empty(**overrides)

    def test_empty_matrix(self):
        assert run_all(self.fast()) == []

    def test_filter_by_substring(self):
        reports = run_all(SuiteConfig(only="chirp"))
        assert [r.identity_id for r in reports] == ["levy_chirp_integral"] * 3
        assert all(r.passed for r in reports)

    def test_sorted_by_identity(self):
        reports = run_all(self.fast(alphas=(1.0,), bessel_points=(0.0, 4.0), moment_samples=10_000))
        ids = [r.identity_id for r in reports]
        assert ids == sorted(ids)
        assert {"bessel_series_kernel", "trigamma_integral", "gamma_bdrv_atom"} <= set(ids)

    def test_tolerance_scale(self):
        cfg = SuiteConfig(only="gamma_bdrv_atom", moment_samples=10_000, tolerance_scale=0.01)
        reports = run_all(cfg)
        assert len(reports) == 3
        assert not all(r.passed for r in reports)
        assert all(r.tolerance < 0.01 for r in reports)

    def test_reproducible(self):
        cfg = SuiteConfig(only="gamma_bdrv_atom", moment_samples=10_000)
        first = [r.residual for r in run_all(cfg)]
        assert first == [r.residual for r in run_all(cfg)]

    def test_failure_becomes_report(self, monkeypatch):
        def broken(a, quad=None):
            raise QuadratureError("segment budget exhausted", partial=0.0, residual=1.0)

        monkeypatch.setattr(validation, "levy_chirp_integral", broken)
        reports = run_all(SuiteConfig(only="chirp"))
        assert len(reports) == 3
        assert not any(r.passed for r in reports)
        assert all(math.isinf(r.residual) for r in reports)
        assert reports[0].to_json()["residual"] is None
        assert "segment budget" in reports[0].metadata["error"]

    @pytest.mark.parametrize("overrides", [
        {"tolerance_scale": 0.0},
        {"moment_samples": 100},
        {"ks_samples": 10},
        {"workers": 0},
        {"only": "cor3"},
    ])
    def test_rejects_invalid(self, overrides):
        with pytest.raises(ConfigError):
            SuiteConfig(**overrides)


class TestReport:
    def test_json_shape(self):
        report = check_bessel_series_kernel(1.0)
        record = report.to_json()
        assert set(record) == {"identity_id", "residual", "tolerance", "passed", "params"}
        assert record["params"] == {"b": 1.0}
        json.dumps(record)

    def test_verdict(self):
        report = IdentityReport("selfdecomposition", 0.1, 0.0, 0.1, 0.012, False)
        assert report.to_json()["passed"] is False
