"""Tests for the command-line interface."""

import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from lindblad_bounds.cli import (BOUNDS_COLUMNS, GAP_COLUMNS, load_config,
                                 main)


@pytest.fixture
def runner():
    return CliRunner()


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestConfig:
    def test_defaults_without_file(self):
        cfg = load_config(None)
        assert cfg["tol_feas"] == 1e-9
        assert cfg["record_timing"] is True

    def test_parse_values_and_comments(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# comment\n"
                     "tol_feas = 1e-7\n"
                     "record_timing = false  # trailing comment\n"
                     "max_iter = 500\n")
        cfg = load_config(str(p))
        assert cfg["tol_feas"] == 1e-7
        assert cfg["record_timing"] is False
        assert cfg["max_iter"] == 500

    def test_unknown_key_reports_line(self, tmp_path, runner):
        p = tmp_path / "run.cfg"
        p.write_text("tol_feas = 1e-8\nbogus = 3\n")
        result = runner.invoke(main, ["steady", "--omega", "0", "--n", "3",
                                      "--config", str(p),
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0
        assert ":2:" in result.output and "bogus" in result.output

    def test_bad_value_reports_line(self, tmp_path, runner):
        p = tmp_path / "run.cfg"
        p.write_text("max_iter = soon\n")
        result = runner.invoke(main, ["steady", "--omega", "0", "--n", "3",
                                      "--config", str(p),
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0
        assert ":1:" in result.output

    def test_missing_equals_rejected(self, tmp_path, runner):
        p = tmp_path / "run.cfg"
        p.write_text("tol_feas 1e-8\n")
        result = runner.invoke(main, ["steady", "--omega", "0", "--n", "3",
                                      "--config", str(p),
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0
        assert "key = value" in result.output


class TestSteady:
    def test_decoupled_point(self, tmp_path, runner):
        result = runner.invoke(main, ["steady", "--omega", "0", "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code == 0, result.output
        rows = read_csv(tmp_path / "steady.csv")
        assert rows[0] == list(BOUNDS_COLUMNS)
        assert len(rows) == 2
        bound = float(rows[1][4])
        assert abs(bound + 1.0) < 1e-6
        assert rows[1][5] == "optimal"
        manifest = json.loads((tmp_path / "steady.manifest.json").read_text())
        assert manifest["command"] == "steady"
        assert manifest["csv"] == "steady.csv"

    def test_bad_observable_fails(self, tmp_path, runner):
        result = runner.invoke(main, ["steady", "--omega", "1", "--n", "3",
                                      "--objective", "Q1",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0

    def test_site_beyond_level_fails(self, tmp_path, runner):
        result = runner.invoke(main, ["steady", "--omega", "1", "--n", "3",
                                      "--objective", "Z4",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0

    def test_env_var_output_dir(self, tmp_path, runner, monkeypatch):
        monkeypatch.setenv("LINDBLAD_BOUNDS_OUTPUT_DIR", str(tmp_path))
        result = runner.invoke(main, ["steady", "--omega", "0", "--n", "3"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "steady.csv").exists()


class TestScan:
    def test_explicit_grid(self, tmp_path, runner):
        result = runner.invoke(main, ["scan", "--omegas", "0,0.5,1",
                                      "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code == 0, result.output
        rows = read_csv(tmp_path / "scan.csv")
        assert len(rows) == 4
        assert [r[0] for r in rows[1:]] == ["0", "0.5", "1"]

    def test_bad_grid_list(self, tmp_path, runner):
        result = runner.invoke(main, ["scan", "--omegas", "0,zero", "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0

    def test_grid_options_required(self, tmp_path, runner):
        result = runner.invoke(main, ["scan", "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0


class TestRatio:
    def test_infeasible_below_transition(self, tmp_path, runner):
        result = runner.invoke(main, ["ratio", "--omega", "0.5", "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert "infeasible" in result.output
        rows = read_csv(tmp_path / "ratio.csv")
        assert rows[1][5] == "primal_infeasible"

    def test_feasible_above_transition(self, tmp_path, runner):
        result = runner.invoke(main, ["ratio", "--omega", "2", "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code == 0, result.output
        rows = read_csv(tmp_path / "ratio.csv")
        assert rows[1][2] == "r(Z1*Z2)"
        assert rows[1][5] == "optimal"
        assert abs(float(rows[1][4]) - (-1.6255693)) < 1e-4


class TestGap:
    def test_window_reported(self, tmp_path, runner):
        result = runner.invoke(main, ["gap", "--omega", "2", "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert "allowed decay-rate window" in result.output
        rows = read_csv(tmp_path / "gap.csv")
        assert rows[0] == list(GAP_COLUMNS)
        assert rows[1][6] == "ok"
        assert float(rows[1][3]) > float(rows[1][2])


class TestExport:
    def test_deterministic_bytes(self, tmp_path, runner):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d in (d1, d2):
            result = runner.invoke(main, ["export-sdpa", "--omega", "2",
                                          "--n", "3",
                                          "--output-dir", str(d)])
            assert result.exit_code == 0, result.output
        assert ((d1 / "steady.dat-s").read_bytes()
                == (d2 / "steady.dat-s").read_bytes())

    def test_gap_requires_delta(self, tmp_path, runner):
        result = runner.invoke(main, ["export-sdpa", "--problem", "gap",
                                      "--omega", "2", "--n", "3",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0
        assert "--delta" in result.output

    def test_custom_name(self, tmp_path, runner):
        result = runner.invoke(main, ["export-sdpa", "--problem", "gap",
                                      "--omega", "2", "--n", "3",
                                      "--delta", "0.5", "--out", "g.dat-s",
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "g.dat-s").exists()


class TestRerun:
    def test_byte_identical_without_timing(self, tmp_path, runner):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("record_timing = false\n")
        first = tmp_path / "first"
        result = runner.invoke(main, ["steady", "--omega", "1", "--n", "3",
                                      "--config", str(cfgfile),
                                      "--output-dir", str(first)])
        assert result.exit_code == 0, result.output
        second = tmp_path / "second"
        result = runner.invoke(main, ["rerun",
                                      str(first / "steady.manifest.json"),
                                      "--output-dir", str(second)])
        assert result.exit_code == 0, result.output
        assert ((first / "steady.csv").read_bytes()
                == (second / "steady.csv").read_bytes())

    def test_unknown_command_rejected(self, tmp_path, runner):
        bad = tmp_path / "m.json"
        bad.write_text(json.dumps({"command": "launch", "params": {}}))
        result = runner.invoke(main, ["rerun", str(bad),
                                      "--output-dir", str(tmp_path)])
        assert result.exit_code != 0
        assert "launch" in result.output
