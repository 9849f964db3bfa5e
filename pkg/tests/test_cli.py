"""End to end runs of the command line."""

import csv
import io
import json
import math
from pathlib import Path

import pytest

from cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED
from utils import SEED_ENV

DATA = Path(__file__).parent / "data"


def _table(text):
    """Comment lines and the CSV body of a command's output"""
    lines = text.splitlines()
    comments = [line for line in lines if line.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(line for line in lines if not line.startswith("#")))))
    return comments, rows


class TestGolden:
    def test_bddf_stable1(self, run_cli):
        code, text = run_cli("bddf", "--kind", "SymStable1", "--scale", "1", "--a", "0")
        assert code == EXIT_OK
        assert text == (DATA / "bddf_stable1.csv").read_text()

    def test_cf_stable1_bdcf(self, run_cli):
        code, text = run_cli("cf", "--kind", "SymStable1", "--scale", "1", "--which", "bdcf", "--t", "0")
        assert code == EXIT_OK
        assert text == (DATA / "cf_stable1_bdcf.csv").read_text()


class TestCf:
    def test_gamma_bdcf(self, run_cli):
        code, text = run_cli("cf", "--kind", "Gamma", "--alpha", "1", "--lambda", "1", "--which", "bdcf", "--t", "1")
        assert code == EXIT_OK
        _, rows = _table(text)
        assert float(rows[0]["re"]) == pytest.approx(math.exp(-0.5) * math.cos(0.5), abs=1e-15)
        assert float(rows[0]["im"]) == pytest.approx(math.exp(-0.5) * math.sin(0.5), abs=1e-15)

    def test_numeric_bdcf_matches(self, run_cli):
        args = ("cf", "--kind", "LogGamma", "--alpha", "2", "--lambda", "1", "--which", "bdcf", "--t", "0:4:5")
        _, closed = _table(run_cli(*args)[1])
        _, numeric = _table(run_cli(*args, "--numeric")[1])
        for a, b in zip(closed, numeric):
            assert float(a["re"]) == pytest.approx(float(b["re"]), abs=1e-6)
            assert float(a["im"]) == pytest.approx(float(b["im"]), abs=1e-6)

    def test_numeric_bdcf_near_origin(self, run_cli):
        code, text = run_cli("cf", "--kind", "Gamma", "--alpha", "2", "--lambda", "3", "--which", "bdcf",
                             "--numeric", "--t", "1e-8")
        assert code == EXIT_OK
        _, rows = _table(text)
        assert float(rows[0]["re"]) == pytest.approx(1.0, abs=1e-6)
        assert float(rows[0]["im"]) == pytest.approx(0.0, abs=1e-6)

    def test_model_json_wins(self, run_cli):
        code, text = run_cli("cf", "--model", '{"kind": "SymStable1", "params": {"scale": 2}}',
                             "--kind", "Gamma", "--alpha", "1", "--t", "1")
        assert code == EXIT_OK
        comments, rows = _table(text)
        assert '# model: {"kind": "SymStable1", "params": {"scale": 2.0}}' in comments
        assert float(rows[0]["re"]) == pytest.approx(math.exp(-2.0))

    @pytest.mark.parametrize("argv", [
        ("cf", "--t", "1"),
        ("cf", "--kind", "Weibull", "--t", "1"),
        ("cf", "--kind", "Gamma", "--alpha", "1", "--t", "1"),
        ("cf", "--model", "{not json", "--t", "1"),
        ("cf", "--kind", "Gamma", "--alpha", "-1", "--lambda", "1", "--t", "1"),
        ("cf", "--kind", "SymStable1", "--t", "1:2"),
    ])
    def test_usage_errors(self, run_cli, argv):
        assert run_cli(*argv)[0] == EXIT_USAGE


class TestBddf:
    def test_levy(self, run_cli):
        code, text = run_cli("bddf", "--model", '{"kind": "Levy", "params": {"m": 0, "c": 2}}', "--a", "0.25")
        assert code == EXIT_OK
        _, rows = _table(text)
        assert float(rows[0]["value"]) == pytest.approx(math.erfc(1.0), abs=1e-6)
        assert int(rows[0]["segments_used"]) > 0

    def test_stable_grid(self, run_cli):
        code, text = run_cli("bddf", "--kind", "SymStable1", "--a=-1:1:3")
        assert code == EXIT_OK
        _, rows = _table(text)
        assert [float(r["a"]) for r in rows] == [-1.0, 0.0, 1.0]
        values = [float(r["value"]) for r in rows]
        assert values == pytest.approx([0.25, 0.5, 0.75], abs=1e-6)

    def test_numeric_matches_closed(self, run_cli):
        args = ("bddf", "--kind", "Gamma", "--alpha", "2", "--lambda", "3", "--a", "0.5,1")
        _, closed = _table(run_cli(*args)[1])
        code, text = run_cli(*args, "--numeric")
        assert code == EXIT_OK
        for a, b in zip(closed, _table(text)[1]):
            assert float(b["value"]) == pytest.approx(float(a["value"]), abs=1e-6)

    def test_failed_points_are_flagged(self, run_cli):
        code, text = run_cli("bddf", "--kind", "Gamma", "--alpha", "1", "--lambda", "1",
                             "--a", "1,2", "--max-segments", "10", "--accel-terms", "4", "--abs-tol", "1e-15")
        assert code == EXIT_NUMERIC
        comments, rows = _table(text)
        assert len(rows) == 2
        assert any(line.startswith("# failed[0]") for line in comments)
        failed = [r for r in rows if r["segments_used"] == "-1"]
        assert failed and all(r["value"] == "nan" for r in failed)


class TestSample:
    ARGS = ("sample", "--gen", "gamma_bdrv", "--alpha", "2", "--lambda", "1", "--n", "50")

    def test_deterministic(self, run_cli):
        first = run_cli(*self.ARGS, "--seed", "7")
        assert first[0] == EXIT_OK
        assert first == run_cli(*self.ARGS, "--seed", "7")
        assert first != run_cli(*self.ARGS, "--seed", "8")

    def test_header(self, run_cli):
        comments, rows = _table(run_cli(*self.ARGS, "--seed", "7")[1])
        assert "# generator: gamma_bdrv" in comments
        assert "# seed: 7" in comments
        assert "# n: 50" in comments
        assert '# params: {"alpha": 2.0, "lambda": 1.0}' in comments
        assert len(rows) == 50

    def test_seed_from_environment(self, run_cli, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "7")
        assert run_cli(*self.ARGS) == run_cli(*self.ARGS, "--seed", "7")

    def test_malformed_environment_seed(self, run_cli, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "seven")
        assert run_cli(*self.ARGS)[0] == EXIT_USAGE

    def test_json_format(self, run_cli):
        code, text = run_cli(*self.ARGS, "--seed", "7", "--format", "json")
        assert code == EXIT_OK
        record = json.loads(text)
        assert record["generator"] == "gamma_bdrv"
        assert len(record["values"]) == 50

    def test_series_header_and_default_rate(self, run_cli):
        code, text = run_cli("sample", "--gen", "loggamma_innovation", "--alpha", "1", "--c", "0.5",
                             "--n", "5", "--truncation-n", "100", "--seed", "3")
        assert code == EXIT_OK
        comments, _ = _table(text)
        assert '# params: {"alpha": 1.0, "lambda": 1.0}' in comments
        assert any(line.startswith("# series: ") and '"truncation_n": 100' in line for line in comments)

    def test_innovation_header_records_poisson_mean(self, run_cli):
        code, text = run_cli("sample", "--gen", "besselk_innovation", "--alpha", "2", "--lambda", "1",
                             "--c", "0.5", "--n", "10", "--seed", "7")
        assert code == EXIT_OK
        comments, _ = _table(text)
        line = next(line for line in comments if line.startswith("# poisson_mean: "))
        assert float(line.split(": ")[1]) == pytest.approx(2.7725887, abs=1e-7)

    def test_partitioned(self, run_cli):
        code, text = run_cli(*self.ARGS, "--seed", "7", "--streams", "3", "--workers", "2")
        assert code == EXIT_OK
        comments, rows = _table(text)
        assert "# streams: 3" in comments
        assert len(rows) == 50

    @pytest.mark.parametrize("extra", [
        ("--gen", "weibull", "--alpha", "1", "--lambda", "1", "--n", "5"),
        ("--gen", "gamma_bdrv", "--alpha", "1", "--n", "5"),
        ("--gen", "gamma_innovation", "--alpha", "1", "--lambda", "1", "--n", "5"),
        ("--gen", "gamma_innovation", "--alpha", "1", "--lambda", "1", "--c", "1.5", "--n", "5"),
        ("--gen", "gamma_bdrv", "--alpha", "1", "--lambda", "1", "--n", "0"),
        ("--gen", "besselk", "--alpha", "0", "--lambda", "1", "--n", "5"),
    ])
    def test_usage_errors(self, run_cli, extra):
        assert run_cli("sample", *extra)[0] == EXIT_USAGE

    def test_writes_output_file(self, run_cli, tmp_path):
        target = tmp_path / "draws.csv"
        code, text = run_cli(*self.ARGS, "--seed", "7", "-o", str(target))
        assert code == EXIT_OK
        assert text == ""
        assert target.read_text() == run_cli(*self.ARGS, "--seed", "7")[1]


class TestMoments:
    def test_loggamma(self, run_cli):
        code, text = run_cli("moments", "--kind", "LogGamma", "--alpha", "1", "--lambda", "1")
        assert code == EXIT_OK
        record = json.loads(text)
        assert set(record) == {"mean", "variance", "bddf_mean", "bddf_variance"}
        assert record["mean"] == pytest.approx(-0.5772156649015329)
        assert record["bddf_variance"] == pytest.approx(math.pi**2 / 3.0)

    def test_levy_has_none(self, run_cli):
        assert run_cli("moments", "--kind", "Levy", "--m", "0", "--c", "1")[0] == EXIT_USAGE


class TestVerify:
    def test_chirp_passes(self, run_cli):
        code, text = run_cli("verify", "--only", "chirp")
        assert code == EXIT_OK
        records = [json.loads(line) for line in text.splitlines()]
        assert len(records) == 3
        assert all(r["identity_id"] == "levy_chirp_integral" and r["passed"] for r in records)

    def test_tight_tolerance_fails(self, run_cli):
        code, text = run_cli("verify", "--only", "chirp", "--tolerance-scale", "1e-12")
        assert code == EXIT_VERIFY_FAILED
        assert any(not json.loads(line)["passed"] for line in text.splitlines())

    def test_bad_configuration(self, run_cli):
        assert run_cli("verify", "--only", "chirp", "--tolerance-scale", "0")[0] == EXIT_USAGE

    def test_filter_matching_nothing(self, run_cli):
        code, text = run_cli("verify", "--only", "cor3")
        assert code == EXIT_USAGE
        assert text == ""


class TestParser:
    def test_missing_subcommand(self, run_cli):
        with pytest.raises(SystemExit) as info:
            run_cli()
        assert info.value.code == 2
