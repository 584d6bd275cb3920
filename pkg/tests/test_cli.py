import json

import pytest

from relustab import TestId
from relustab.cli import (
    EXIT_AUDIT,
    EXIT_FAILURES,
    EXIT_OK,
    EXIT_USAGE,
    main,
)
from relustab.certify import TestResult
from relustab.sweep import InclusionAudit


def write_config(tmp_path, text, name="config.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def sweep_config(tmp_path, extra=""):
    return write_config(tmp_path, (
        "model: {a: 0.0, b: 0.0}\n"
        "grid: {a_min: 0.0, a_max: 0.0, a_steps: 1,\n"
        "       b_min: 0.0, b_max: 0.0, b_steps: 1}\n"
        "tests: [I]\n"
        f"output:\n"
        f"  records_path: {tmp_path / 'records.csv'}\n"
        f"  regions_path: {tmp_path / 'regions.csv'}\n"
        + extra))


class TestNorm:
    def test_benchmark_origin(self, capsys):
        assert main(["norm", "--a", "0", "--b", "0"]) == EXIT_OK
        out = capsys.readouterr().out.strip()
        assert float(out) == pytest.approx(0.9605, abs=1e-3)
        assert len(out.split(".")[1]) == 6

    def test_model_from_config(self, tmp_path, capsys):
        path = write_config(tmp_path, (
            "model:\n"
            "  lambda: [[0.5]]\n"
            "  win: [[1.0]]\n"
            "  wout: [[1.0]]\n"
            "tests: [I]\n"))
        assert main(["norm", "--config", path]) == EXIT_OK
        # First-order lag: peak gain 1 / (1 - 0.5) at z = 1.
        assert float(capsys.readouterr().out) == pytest.approx(2.0, abs=1e-4)


class TestUsageErrors:
    def test_no_command(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_unknown_flag(self, capsys):
        assert main(["certify", "--nope"]) == EXIT_USAGE

    def test_sweep_requires_config(self, capsys):
        assert main(["sweep"]) == EXIT_USAGE

    def test_unknown_test_name(self, capsys):
        assert main(["certify", "--tests", "V"]) == EXIT_USAGE
        assert "unknown test" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert main(["sweep", "--config", "no-such-file.yaml"]) == EXIT_USAGE

    def test_config_error_reported(self, tmp_path, capsys):
        path = write_config(tmp_path, "model: {a: 0.0}\n")
        assert main(["norm", "--config", path]) == EXIT_USAGE
        assert "tests" in capsys.readouterr().err

    def test_ab_rejected_for_inline_model(self, tmp_path, capsys):
        path = write_config(tmp_path, (
            "model:\n"
            "  lambda: [[0.0]]\n"
            "  win: [[0.5]]\n"
            "  wout: [[1.0]]\n"
            "tests: [I]\n"))
        assert main(["norm", "--config", path, "--a", "1.0"]) == EXIT_USAGE

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == EXIT_OK


class TestCertify:
    def test_json_lines_and_exit_zero(self, capsys):
        code = main(["certify", "--a", "0", "--b", "0", "--tests", "I,II"])
        assert code == EXIT_OK
        lines = [json.loads(line)
                 for line in capsys.readouterr().out.splitlines() if line]
        assert [line["test"] for line in lines] == ["SSG", "L2P_SSG"]
        assert all(line["status"] == "Feasible" for line in lines)
        assert all(line["verified"] for line in lines)
        assert all(line["margin"] > 0 for line in lines)

    def test_infeasible_is_still_exit_zero(self, capsys):
        # An Infeasible outcome is an answer, not a failure.
        code = main(["certify", "--a", "1.0", "--b", "1.4", "--tests", "III"])
        assert code == EXIT_OK
        line = json.loads(capsys.readouterr().out)
        assert line["status"] == "Infeasible"
        assert "detail" in line

    def test_solver_failure_exit_two(self, capsys, monkeypatch):
        def fake_run_test(model, test, options=None):
            return TestResult(test=test, status="SolverFailure",
                              verified=False, margin=None, solve_ms=0.1,
                              detail="stubbed")
        monkeypatch.setattr("relustab.cli.run_test", fake_run_test)
        assert main(["certify", "--a", "0", "--b", "0",
                     "--tests", "I"]) == EXIT_FAILURES

    def test_certificate_roundtrip_via_check_cert(self, tmp_path, capsys):
        cert_path = str(tmp_path / "cert.json")
        assert main(["certify", "--a", "0", "--b", "0", "--tests", "I",
                     "--cert-out", cert_path]) == EXIT_OK
        capsys.readouterr()
        # model_ref in the file pins (a, b); no flags needed.
        assert main(["check-cert", "--cert", cert_path]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["verified"] is True
        assert report["test"] == "SSG"
        assert report["lmi_max_eig"] < 0

    def test_cert_out_suffixed_per_test(self, tmp_path, capsys):
        cert_path = str(tmp_path / "cert.json")
        assert main(["certify", "--a", "0", "--b", "0", "--tests", "I,II",
                     "--cert-out", cert_path]) == EXIT_OK
        assert (tmp_path / "cert_SSG.json").exists()
        assert (tmp_path / "cert_L2P_SSG.json").exists()

    def test_tampered_certificate_exit_two(self, tmp_path, capsys):
        cert_path = str(tmp_path / "cert.json")
        main(["certify", "--a", "0", "--b", "0", "--tests", "I",
              "--cert-out", cert_path])
        with open(cert_path) as fh:
            payload = json.load(fh)
        payload["P"]["data"] = [0.0] * len(payload["P"]["data"])
        with open(cert_path, "w") as fh:
            json.dump(payload, fh)
        capsys.readouterr()
        assert main(["check-cert", "--cert", cert_path]) == EXIT_FAILURES
        assert json.loads(capsys.readouterr().out)["verified"] is False


class TestSweepCommand:
    def test_clean_sweep_exit_zero(self, tmp_path, capsys):
        assert main(["sweep", "--config", sweep_config(tmp_path)]) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["records"] == 1
        assert summary["solver_failures"] == 0
        assert summary["inclusion_violations"] == []
        assert (tmp_path / "records.csv").exists()

    def test_tests_override_rederives_compare(self, tmp_path, capsys):
        # Narrowing --tests must not trip the compare-subset validation.
        path = sweep_config(tmp_path, "compare: [[I, I]]\n")
        assert main(["sweep", "--config", path, "--tests", "I"]) == EXIT_OK

    def test_failure_fraction_exit_two(self, tmp_path, capsys, monkeypatch):
        def fake_run_test(model, test, options=None):
            return TestResult(test=test, status="SolverFailure",
                              verified=False, margin=None, solve_ms=0.1,
                              detail="stubbed")
        monkeypatch.setattr("relustab.certify.run_test", fake_run_test)
        monkeypatch.setattr("relustab.sweep.run_test", fake_run_test)
        code = main(["sweep", "--config", sweep_config(tmp_path)])
        assert code == EXIT_FAILURES
        summary = json.loads(capsys.readouterr().out)
        assert summary["failure_fraction"] == 1.0

    def test_inclusion_violation_exit_three(self, tmp_path, capsys,
                                            monkeypatch):
        def fake_audit(records):
            return [InclusionAudit(
                weaker=TestId.SSG, stronger=TestId.L2P_SSG,
                violations=("synthetic violation",), excluded=())]
        monkeypatch.setattr("relustab.cli.audit_inclusions", fake_audit)
        code = main(["sweep", "--config", sweep_config(tmp_path)])
        assert code == EXIT_AUDIT
        summary = json.loads(capsys.readouterr().out)
        assert summary["inclusion_violations"] == ["synthetic violation"]

    def test_failure_exit_takes_precedence_over_audit(self, tmp_path, capsys,
                                                      monkeypatch):
        def fake_run_test(model, test, options=None):
            return TestResult(test=test, status="SolverFailure",
                              verified=False, margin=None, solve_ms=0.1,
                              detail="stubbed")

        def fake_audit(records):
            return [InclusionAudit(
                weaker=TestId.SSG, stronger=TestId.L2P_SSG,
                violations=("synthetic violation",), excluded=())]
        monkeypatch.setattr("relustab.sweep.run_test", fake_run_test)
        monkeypatch.setattr("relustab.cli.audit_inclusions", fake_audit)
        code = main(["sweep", "--config", sweep_config(tmp_path)])
        assert code == EXIT_FAILURES
