import csv
import json
from fractions import Fraction

import jsonschema
import pytest


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def report(out):
    return json.loads((out / "report.json").read_text())


def test_dmd_finds_lfo_pair(cli, schema, tmp_path):
    result = cli("analyze", "dmd", "--profile", "lfo_udc", "--stack", 1000, "--out", tmp_path)
    assert result.returncode == 0, result.stderr
    r = report(tmp_path)
    jsonschema.validate(r, schema)
    assert r["dominant_mode"]["frequency_hz"] == pytest.approx(8.6, abs=0.01)
    header = rows(tmp_path / "eigenvalues.csv")[0].keys()
    for column in ("lambda_re", "lambda_im", "omega_re", "omega_im", "frequency_hz", "damping",
                   "amplitude", "integral_contribution"):
        assert column in header
    assert list(rows(tmp_path / "reconstruction.csv")[0].keys()) == ["t", "measured", "reconstructed"]


def test_mrdmd_lfo_plan_and_dominant_level(cli, schema, tmp_path):
    result = cli("analyze", "mrdmd", "--profile", "lfo_udc", "--mu", 16, "--g", 4, "--out", tmp_path)
    assert result.returncode == 0, result.stderr
    plan = rows(tmp_path / "plan.csv")
    assert [float(row["max_capturable_hz"]) for row in plan] == [5 * 2**l for l in range(8)]
    r = report(tmp_path)
    jsonschema.validate(r, schema)
    assert r["dominant_mode"]["level"] == 4
    assert r["dominant_mode"]["frequency_hz"] == pytest.approx(8.6, abs=0.2)
    for level in range(1, 9):
        assert (tmp_path / f"level_{level}.csv").exists()
    tags = rows(tmp_path / "modes.csv")[0]
    assert "level" in tags and "bin" in tags


def test_mrdmd_ac_sidebands_at_level_five(cli, tmp_path):
    result = cli("analyze", "mrdmd", "--profile", "ac_in", "--mu", 50, "--g", 4,
                 "--termination-level", 6, "--out", tmp_path)
    assert result.returncode == 0, result.stderr
    level5 = [float(m["frequency_hz"]) for m in rows(tmp_path / "modes.csv")
              if m["level"] == "5" and m["slow"] == "1"]
    for hz in (50.0, 41.4, 58.6):
        assert any(abs(f - hz) <= 0.5 for f in level5), hz
    plan = rows(tmp_path / "plan.csv")
    assert [Fraction(row["max_capturable_hz"]) for row in plan] == [Fraction(125, 8) * 2**l for l in range(6)]


def test_rank_zero_rejected_before_work(cli, tmp_path):
    out = tmp_path / "never"
    result = cli("analyze", "dmd", "--profile", "lfo_udc", "--rank", 0, "--out", out)
    assert result.returncode != 0
    assert result.stderr.strip().count("\n") == 0
    assert result.stderr.startswith("error: invalid_argument:")
    assert not out.exists()


def test_missing_file_names_path(cli, tmp_path):
    missing = tmp_path / "absent.csv"
    result = cli("analyze", "mrdmd", "--input", missing, "--dt", 4e-4, "--out", tmp_path / "o")
    assert result.returncode != 0
    assert result.stderr.startswith("error: io:")
    assert str(missing) in result.stderr


def test_infeasible_mu_rejected(cli, tmp_path):
    result = cli("analyze", "mrdmd", "--profile", "lfo_udc", "--mu", 5000, "--out", tmp_path)
    assert result.returncode != 0
    assert result.stderr.startswith("error: infeasible_plan:")


def test_compare_gap_and_degenerate_windows(cli, tmp_path):
    gapped = tmp_path / "gap"
    assert cli("analyze", "compare", "--profile", "lfo_udc", "--gap-start", 2000, "--gap-length", 250,
               "--out", gapped).returncode == 0
    c = json.loads((gapped / "compare.json").read_text())
    assert c["mrdmd"]["growth_rate_error"] < c["dmd"]["growth_rate_error"]
    assert c["dmd"]["reconstruction"]["rmse"] >= 2 * c["mrdmd"]["reconstruction"]["rmse"]

    empty = tmp_path / "empty"
    result = cli("analyze", "compare", "--profile", "lfo_udc", "--gap-start", 0, "--gap-length", 5000,
                 "--out", empty)
    assert result.returncode == 0, result.stderr
    c = json.loads((empty / "compare.json").read_text())
    assert c["dmd"]["status"] == c["mrdmd"]["status"] == "failed_to_identify"


def test_failed_report_still_validates(cli, schema, tmp_path):
    result = cli("analyze", "mrdmd", "--profile", "lfo_udc", "--gap-start", 0, "--gap-length", 5000,
                 "--out", tmp_path)
    assert result.returncode == 0, result.stderr
    r = report(tmp_path)
    assert r["status"] == "failed_to_identify"
    jsonschema.validate(r, schema)


def test_generate_then_analyze(cli, schema, tmp_path):
    data = tmp_path / "lfo.csv"
    assert cli("generate", "--profile", "lfo_udc", "--seed", 3, "--out", data).returncode == 0
    out = tmp_path / "run"
    result = cli("analyze", "mrdmd", "--input", data, "--time-column", "--out", out)
    assert result.returncode == 0, result.stderr
    r = report(out)
    jsonschema.validate(r, schema)
    assert r["input"]["samples"] == 5000
    assert r["input"]["dt"] == pytest.approx(4e-4)


def test_golden_input_reports_validate(cli, schema, golden_input, tmp_path):
    for method in ("dmd", "mrdmd"):
        out = tmp_path / method
        result = cli("analyze", method, "--input", golden_input, "--time-column", "--stack", 40, "--mu", 8,
                     "--out", out)
        assert result.returncode == 0, result.stderr
        jsonschema.validate(report(out), schema)


def test_threads_do_not_change_output(cli, golden_input, tmp_path):
    outputs = []
    for threads in (1, 4):
        out = tmp_path / f"t{threads}"
        assert cli("analyze", "mrdmd", "--input", golden_input, "--time-column", "--stack", 40, "--mu", 8,
                   "--threads", threads, "--out", out).returncode == 0
        outputs.append({p.name: p.read_bytes() for p in out.glob("*.csv")})
    assert outputs[0] == outputs[1]


def test_config_file_and_environment(cli, golden_input, tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(
        "[analyze.mrdmd]\n"
        f"input = \"{golden_input}\"\n"
        "time-column = true\n"
        "stack = 40\n"
        "mu = 8\n"
        f"out = \"{tmp_path / 'from-file'}\"\n")
    result = cli("--config", config, "analyze", "mrdmd")
    assert result.returncode == 0, result.stderr
    assert report(tmp_path / "from-file")["plan"]["mu"] == 8

    # Precedence: command line, then config file, then environment.
    result = cli("--config", config, "analyze", "mrdmd", env={"OSCID_MU": "6"})
    assert result.returncode == 0, result.stderr
    assert report(tmp_path / "from-file")["plan"]["mu"] == 8
    result = cli("--config", config, "analyze", "mrdmd", "--mu", 7, env={"OSCID_MU": "6"})
    assert result.returncode == 0, result.stderr
    assert report(tmp_path / "from-file")["plan"]["mu"] == 7

    out = tmp_path / "from-env"
    result = cli("analyze", "mrdmd", "--input", golden_input, "--time-column", "--stack", 40, "--out", out,
                 env={"OSCID_MU": "6"})
    assert result.returncode == 0, result.stderr
    assert report(out)["plan"]["mu"] == 6


def test_plan_subcommand_prints_table(cli, tmp_path):
    result = cli("analyze", "plan", "--n", 4000, "--dt", 4e-4, "--mu", 16, "--out", tmp_path)
    assert result.returncode == 0, result.stderr
    assert "L=8" in result.stdout
    assert len(rows(tmp_path / "plan.csv")) == 8
