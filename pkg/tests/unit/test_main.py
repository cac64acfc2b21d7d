"""CLI exit codes, written reports and golden flags."""

import json
import os
from pathlib import Path

import pytest

from cprover.main import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, build_config, main, parse_args

GOLDEN_DIR = Path(__file__).resolve().parents[2] / "golden" / "v1"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith("CPROVER_"):
            monkeypatch.delenv(key, raising=False)
    return monkeypatch


class TestConfigErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["--check", "table1", "--omega", "1"],
            ["--check", "nope", "--omega", "2"],
            ["--check", "checksum", "--samples", "0"],
            ["--check", "checksum", "--omega", "two"],
            ["--check", "prop-s", "--omega", "4"],
        ],
    )
    def test_exit_two(self, argv, capsys):
        assert main(argv) == EXIT_CONFIG
        assert "Error:" in capsys.readouterr().err

    def test_bad_env_value(self, clean_env):
        clean_env.setenv("CPROVER_FORMAT", "xml")
        assert main(["--check", "checksum"]) == EXIT_CONFIG


class TestBuildConfig:
    def test_flags_override_env(self, clean_env):
        clean_env.setenv("CPROVER_SEED", "5")
        clean_env.setenv("CPROVER_OMEGA", "3")
        config = build_config(parse_args(["--seed", "9", "--check", "comb,checksum"]))
        assert config.seed == 9
        assert config.omegas == (3,)
        assert config.checks == ("comb", "checksum")

    def test_verbose(self):
        assert build_config(parse_args(["-v"])).log_level == "DEBUG"


class TestRun:
    def test_writes_both_formats(self, tmp_path):
        out = tmp_path / "report"
        code = main(["--check", "checksum", "--omega", "2", "--out", str(out), "--format", "both", "--seed", "3"])
        assert code == EXIT_OK
        data = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert data["seed"] == 3
        assert [c["check"] for c in data["checks"]] == ["checksum"]
        assert "millis" not in (out / "report.json").read_text(encoding="utf-8")
        assert (out / "report.md").read_text(encoding="utf-8").startswith("# Verification report (cprover ")

    def test_timings_add_ms_column(self, tmp_path):
        main(["--check", "checksum", "--omega", "2", "--out", str(tmp_path), "--format", "markdown", "--timings"])
        assert "| ms |" in (tmp_path / "report.md").read_text(encoding="utf-8")
        assert not (tmp_path / "report.json").exists()

    def test_golden_cycle(self, tmp_path):
        golden = str(tmp_path / "golden")
        base = ["--check", "comb,checksum", "--omega", "2,3", "--golden-dir", golden]
        assert main([*base, "--golden"]) == EXIT_FAILED
        assert main([*base, "--update-golden"]) == EXIT_OK
        assert main([*base, "--golden"]) == EXIT_OK

    def test_golden_mismatch(self, tmp_path, capsys):
        golden = tmp_path / "golden"
        main(["--check", "checksum", "--omega", "2", "--golden-dir", str(golden), "--update-golden"])
        (golden / "checksum-omega2.json").write_text("{}\n", encoding="utf-8")
        assert main(["--check", "checksum", "--omega", "2", "--golden-dir", str(golden), "--golden"]) == EXIT_FAILED
        assert "checksum-omega2.json" in capsys.readouterr().out

    @pytest.mark.parametrize("omega", ["2", "5", "8"])
    def test_committed_golden_matches(self, omega):
        assert main(["--check", "checksum", "--omega", omega, "--golden", "--golden-dir", str(GOLDEN_DIR)]) == EXIT_OK

    def test_committed_golden_comb(self):
        assert main(["--check", "comb", "--golden", "--golden-dir", str(GOLDEN_DIR)]) == EXIT_OK


class TestSummary:
    """Console output of a run."""

    def test_single_check_lists_values(self, capsys):
        assert main(["--check", "checksum", "--omega", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "multiplicity-sum" in out
        assert "40320" in out

    def test_several_checks_list_values_on_request(self, capsys):
        main(["--check", "checksum", "--omega", "2,3"])
        assert "40320" not in capsys.readouterr().out
        main(["--check", "checksum", "--omega", "2,3", "--items"])
        out = capsys.readouterr().out
        assert "40320" in out
        assert "3628800" in out

    def test_bracketed_names_print_literally(self, capsys):
        main(["--check", "comb", "--items"])
        assert "comb1[omega=1]" in capsys.readouterr().out
